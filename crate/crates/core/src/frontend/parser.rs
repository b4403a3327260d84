//! Recursive-descent parser for MiniC++.
//!
//! The parser tracks which identifiers name types and templates. `f < e`
//! starts an explicit template argument list only when `f` names a
//! template; otherwise it is a comparison.

use std::collections::HashSet;
use std::rc::Rc;

use super::ast::*;
use super::lexer::{tokenize, TokKind, Token};
use crate::diag::Diagnostic;

pub type PResult<T> = Result<T, Diagnostic>;

/// Tokenizes and parses a whole file.
pub fn parse_source(file: &str, source: &str) -> PResult<Ast> {
    let toks = tokenize(file, source)?;
    let lines = source.split('\n').count() as u32;
    let last_col = source.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32;
    let eof = SourceLoc::new(Rc::from(file), lines.max(1), last_col + 1);
    Parser::new(toks, eof).parse_program()
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: SourceLoc,
    types: HashSet<String>,
    class_templates: HashSet<String>,
    fn_templates: HashSet<String>,
    /// Set while parsing the declaration of a function template.
    in_fn_template: bool,
    /// Template parameter scopes: (type parameters, value parameters).
    scopes: Vec<(HashSet<String>, HashSet<String>)>,
    /// Set while parsing template arguments: `>` closes the list.
    no_gt: bool,
    class_stack: Vec<String>,
}

fn is_assign_op(p: &str) -> Option<Option<BinOp>> {
    Some(match p {
        "=" => None,
        "+=" => Some(BinOp::Add),
        "-=" => Some(BinOp::Sub),
        "*=" => Some(BinOp::Mul),
        "/=" => Some(BinOp::Div),
        "%=" => Some(BinOp::Rem),
        _ => return None,
    })
}

fn binop_of(p: &str) -> Option<BinOp> {
    Some(match p {
        "+" => BinOp::Add,
        "-" => BinOp::Sub,
        "*" => BinOp::Mul,
        "/" => BinOp::Div,
        "%" => BinOp::Rem,
        "==" => BinOp::Eq,
        "!=" => BinOp::Ne,
        "<" => BinOp::Lt,
        "<=" => BinOp::Le,
        ">" => BinOp::Gt,
        ">=" => BinOp::Ge,
        "&&" => BinOp::And,
        "||" => BinOp::Or,
        _ => return None,
    })
}

impl Parser {
    pub fn new(toks: Vec<Token>, eof: SourceLoc) -> Self {
        Parser {
            toks,
            pos: 0,
            eof,
            types: HashSet::new(),
            class_templates: HashSet::new(),
            fn_templates: HashSet::new(),
            in_fn_template: false,
            scopes: Vec::new(),
            no_gt: false,
            class_stack: Vec::new(),
        }
    }

    // ---- token helpers ----

    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&TokKind> {
        self.toks.get(self.pos + n).map(|t| &t.kind)
    }

    fn loc(&self) -> SourceLoc {
        self.toks
            .get(self.pos)
            .map(|t| t.loc.clone())
            .unwrap_or_else(|| self.eof.clone())
    }

    fn found(&self) -> String {
        match self.toks.get(self.pos) {
            Some(t) => format!("`{}`", t.spelling()),
            None => "end of file".into(),
        }
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.loc(),
            format!("expected {expected}, found {}", self.found()),
        ))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(self.loc(), msg))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Punct(q)) if *q == p)
    }

    fn is_punct_at(&self, n: usize, p: &str) -> bool {
        matches!(self.peek_at(n), Some(TokKind::Punct(q)) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Keyword(q)) if *q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokKind::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(TokKind::Ident(s)) => Some(s),
            _ => None,
        }
    }

    // ---- name classification ----

    fn is_type_name(&self, name: &str) -> bool {
        if self.scopes.iter().rev().any(|(ts, vs)| vs.contains(name) && !ts.contains(name)) {
            return false;
        }
        self.types.contains(name)
            || self.class_templates.contains(name)
            || self.scopes.iter().any(|(ts, _)| ts.contains(name))
    }

    fn is_template_name(&self, name: &str) -> bool {
        self.class_templates.contains(name) || self.fn_templates.contains(name)
    }

    /// Whether the tokens at the cursor begin a type.
    fn starts_type(&self) -> bool {
        match self.peek() {
            Some(TokKind::Keyword(k)) => matches!(
                *k,
                "int" | "bool" | "void" | "const" | "unsigned" | "signed" | "long" | "short"
                    | "char" | "float" | "double" | "typename"
            ),
            Some(TokKind::Ident(s)) => self.is_type_name(s) && !self.is_punct_at(1, "::"),
            _ => false,
        }
    }

    fn reject_unsupported(&self) -> PResult<()> {
        match self.peek() {
            Some(TokKind::Keyword(k))
                if matches!(*k, "try" | "catch" | "throw") =>
            {
                self.fail("exception handling is not supported")
            }
            Some(TokKind::Keyword(k))
                if matches!(
                    *k,
                    "unsigned" | "signed" | "long" | "short" | "char" | "float" | "double"
                ) =>
            {
                self.fail(format!("type `{k}` is not supported; use `int` or `bool`"))
            }
            Some(TokKind::Keyword(k))
                if matches!(*k, "namespace" | "using" | "operator" | "goto" | "switch" | "static") =>
            {
                self.fail(format!("`{k}` is not supported"))
            }
            _ => Ok(()),
        }
    }

    // ---- declarations ----

    pub fn parse_program(mut self) -> PResult<Ast> {
        let mut decls = Vec::new();
        while self.peek().is_some() {
            if self.eat_punct(";") {
                continue;
            }
            decls.push(self.parse_decl()?);
        }
        Ok(Ast { decls })
    }

    fn parse_decl(&mut self) -> PResult<Decl> {
        self.reject_unsupported()?;
        if self.is_kw("template") {
            return self.parse_template();
        }
        if self.is_kw("class") || self.is_kw("struct") {
            return Ok(Decl::Class(self.parse_class()?));
        }
        if self.is_kw("typedef") {
            return Ok(Decl::Typedef(self.parse_typedef()?));
        }
        self.eat_kw("inline");
        // Out-of-line constructor or destructor: `C::C(...)`, `C::~C()`.
        if let Some(name) = self.peek_ident() {
            let name = name.to_string();
            if self.is_punct_at(1, "::") {
                let is_ctor = matches!(self.peek_at(2), Some(TokKind::Ident(n)) if *n == name);
                let is_dtor = self.is_punct_at(2, "~");
                if is_ctor || is_dtor {
                    let loc = self.loc();
                    self.pos += 2;
                    if is_dtor {
                        self.pos += 1;
                    }
                    let fname = self.ident()?;
                    let fname = if is_dtor { format!("~{fname}") } else { fname };
                    self.class_stack.push(name.clone());
                    let mut f = self.parse_function_rest(TypeExpr::Void, fname, loc)?;
                    self.class_stack.pop();
                    f.qualifier = Some(name);
                    f.flags.is_ctor = is_ctor;
                    f.flags.is_dtor = is_dtor;
                    return Ok(Decl::Function(f));
                }
            }
        }
        let base = self.parse_type_spec()?;
        let first_loc = self.loc();
        let ty = self.parse_ptr_ops(base.clone())?;
        let (qualifier, name) = self.parse_decl_name()?;
        let explicit_spec = self.is_punct("<") && self.fn_templates.contains(&name);
        if self.in_fn_template && qualifier.is_none() && self.is_punct("(") {
            self.fn_templates.insert(name.clone());
        }
        if explicit_spec
            || self.is_punct("(") && (qualifier.is_some() || self.looks_like_params())
        {
            if let Some(q) = &qualifier {
                self.class_stack.push(q.clone());
            }
            let mut f = self.parse_function_rest(ty, name, first_loc)?;
            if qualifier.is_some() {
                self.class_stack.pop();
            }
            f.qualifier = qualifier;
            return Ok(Decl::Function(f));
        }
        if qualifier.is_some() {
            return self.err("`(`");
        }
        let vars = self.parse_var_rest(base, ty, name, first_loc)?;
        Ok(Decl::Vars(vars))
    }

    /// After a declarator name: `(` begins a parameter list when followed
    /// by `)`, `void)` or a type.
    fn looks_like_params(&self) -> bool {
        if !self.is_punct("(") {
            return false;
        }
        if self.is_punct_at(1, ")") {
            return true;
        }
        match self.peek_at(1) {
            Some(TokKind::Keyword(k)) => matches!(
                *k,
                "int" | "bool" | "void" | "const" | "unsigned" | "long" | "char" | "typename"
            ),
            Some(TokKind::Ident(s)) => self.is_type_name(s),
            _ => false,
        }
    }

    fn parse_decl_name(&mut self) -> PResult<(Option<String>, String)> {
        let name = self.ident()?;
        if self.eat_punct("::") {
            let member = self.ident()?;
            return Ok((Some(name), member));
        }
        Ok((None, name))
    }

    fn parse_template(&mut self) -> PResult<Decl> {
        let loc = self.loc();
        self.expect_kw("template")?;
        let params = self.parse_template_params()?;
        let mut type_names = HashSet::new();
        let mut value_names = HashSet::new();
        for p in &params {
            match p.kind {
                TemplateParamKind::Type => type_names.insert(p.name.clone()),
                TemplateParamKind::Int => value_names.insert(p.name.clone()),
            };
        }
        self.scopes.push((type_names, value_names));
        let body = self.parse_template_body(&params);
        self.scopes.pop();
        let body = body?;
        Ok(Decl::Template(TemplateDecl {
            params,
            body: Box::new(body),
            loc,
        }))
    }

    fn parse_template_body(&mut self, params: &[TemplateParam]) -> PResult<Decl> {
        if self.is_kw("class") || self.is_kw("struct") {
            if !params.is_empty() && !self.is_punct_at(2, "<") {
                if let Some(TokKind::Ident(n)) = self.peek_at(1) {
                    self.class_templates.insert(n.clone());
                }
            }
            let c = self.parse_class_head_and_body(true)?;
            if c.spec_args.is_some() && !params.is_empty() {
                return Err(Diagnostic::error(
                    c.loc.clone(),
                    "partial template specialization is not supported",
                ));
            }
            if c.spec_args.is_none() {
                if params.is_empty() {
                    return Err(Diagnostic::error(
                        c.loc.clone(),
                        "explicit specialization must name template arguments",
                    ));
                }
                self.class_templates.insert(c.name.clone());
            }
            return Ok(Decl::Class(c));
        }
        if self.is_kw("template") {
            return self.fail("member and nested templates are not supported");
        }
        let saved = std::mem::replace(&mut self.in_fn_template, !params.is_empty());
        let d = self.parse_decl();
        self.in_fn_template = saved;
        let d = d?;
        match &d {
            Decl::Function(f) => {
                if f.template_args.is_some() && !params.is_empty() {
                    return Err(Diagnostic::error(
                        f.loc.clone(),
                        "partial template specialization is not supported",
                    ));
                }
                if params.is_empty() || f.qualifier.is_some() {
                    if f.qualifier.is_some() {
                        return Err(Diagnostic::error(
                            f.loc.clone(),
                            "out-of-line members of class templates are not supported",
                        ));
                    }
                } else {
                    self.fn_templates.insert(f.name.clone());
                }
                Ok(d)
            }
            other => Err(Diagnostic::error(
                other.loc().clone(),
                "only classes and functions can be templates",
            )),
        }
    }

    fn parse_template_params(&mut self) -> PResult<Vec<TemplateParam>> {
        self.expect_punct("<")?;
        let mut params = Vec::new();
        if self.eat_punct(">") {
            return Ok(params);
        }
        self.scopes.push((HashSet::new(), HashSet::new()));
        let r = self.template_param_list(&mut params);
        self.scopes.pop();
        r.map(|_| params)
    }

    /// Parameters after the `<`; each name is in scope for later defaults.
    fn template_param_list(&mut self, params: &mut Vec<TemplateParam>) -> PResult<()> {
        loop {
            let loc = self.loc();
            let kind = if self.eat_kw("typename") || self.eat_kw("class") {
                TemplateParamKind::Type
            } else if self.eat_kw("int") {
                TemplateParamKind::Int
            } else if self.is_kw("bool") || self.is_kw("unsigned") || self.is_kw("long") {
                return self.fail("non-type template parameters must have type `int`");
            } else {
                return self.err("template parameter");
            };
            let name = self.ident()?;
            let scope = self.scopes.last_mut().unwrap();
            match kind {
                TemplateParamKind::Type => scope.0.insert(name.clone()),
                TemplateParamKind::Int => scope.1.insert(name.clone()),
            };
            let default = if self.eat_punct("=") {
                Some(match kind {
                    TemplateParamKind::Type => TemplateArg::Type(self.parse_type()?),
                    TemplateParamKind::Int => {
                        let saved = std::mem::replace(&mut self.no_gt, true);
                        let e = self.parse_expr_no_assign();
                        self.no_gt = saved;
                        TemplateArg::Value(e?)
                    }
                })
            } else {
                None
            };
            params.push(TemplateParam {
                kind,
                name,
                default,
                loc,
            });
            if self.eat_punct(">") {
                return Ok(());
            }
            self.expect_punct(",")?;
        }
    }

    fn parse_typedef(&mut self) -> PResult<TypedefDecl> {
        let loc = self.loc();
        self.expect_kw("typedef")?;
        let base = self.parse_type_spec()?;
        let ty = self.parse_ptr_ops(base)?;
        let name = self.ident()?;
        let ty = self.parse_array_suffix(ty)?;
        self.expect_punct(";")?;
        self.types.insert(name.clone());
        Ok(TypedefDecl { ty, name, loc })
    }

    fn parse_class(&mut self) -> PResult<ClassDecl> {
        self.parse_class_head_and_body(false)
    }

    fn parse_class_head_and_body(&mut self, in_template: bool) -> PResult<ClassDecl> {
        let loc = self.loc();
        let is_struct = if self.eat_kw("struct") {
            true
        } else {
            self.expect_kw("class")?;
            false
        };
        let name = self.ident()?;
        self.types.insert(name.clone());
        let spec_args = if self.is_punct("<") {
            if !in_template {
                return self.fail("explicit specialization requires `template<>`");
            }
            Some(self.parse_template_args()?)
        } else {
            None
        };
        if self.eat_punct(";") {
            return Ok(ClassDecl {
                name,
                spec_args,
                is_struct,
                is_definition: false,
                bases: vec![],
                members: vec![],
                loc,
            });
        }
        let mut bases = Vec::new();
        if self.eat_punct(":") {
            loop {
                let bloc = self.loc();
                let mut is_virtual = false;
                loop {
                    if self.eat_kw("virtual") {
                        is_virtual = true;
                    } else if !(self.eat_kw("public")
                        || self.eat_kw("private")
                        || self.eat_kw("protected"))
                    {
                        break;
                    }
                }
                let ty = self.parse_named_type()?;
                bases.push(BaseSpec {
                    ty,
                    is_virtual,
                    loc: bloc,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("{")?;
        self.class_stack.push(name.clone());
        let members = self.parse_members(&name);
        self.class_stack.pop();
        let members = members?;
        self.expect_punct("}")?;
        self.expect_punct(";")?;
        Ok(ClassDecl {
            name,
            spec_args,
            is_struct,
            is_definition: true,
            bases,
            members,
            loc,
        })
    }

    fn parse_members(&mut self, class: &str) -> PResult<Vec<Member>> {
        let mut members = Vec::new();
        while !self.is_punct("}") {
            if self.peek().is_none() {
                return self.err("`}`");
            }
            self.reject_unsupported()?;
            if (self.is_kw("public") || self.is_kw("private") || self.is_kw("protected"))
                && self.is_punct_at(1, ":")
            {
                self.pos += 2;
                continue;
            }
            if self.eat_punct(";") {
                continue;
            }
            if self.is_kw("typedef") {
                members.push(Member::Typedef(self.parse_typedef()?));
                continue;
            }
            if self.is_kw("template") {
                let loc = self.loc();
                self.pos += 1;
                let params = self.parse_template_params()?;
                if !self.is_kw("friend") {
                    return Err(Diagnostic::error(loc, "member templates are not supported"));
                }
                self.pos += 1;
                let mut type_names = HashSet::new();
                let mut value_names = HashSet::new();
                for p in &params {
                    match p.kind {
                        TemplateParamKind::Type => type_names.insert(p.name.clone()),
                        TemplateParamKind::Int => value_names.insert(p.name.clone()),
                    };
                }
                self.scopes.push((type_names, value_names));
                let saved = std::mem::replace(&mut self.in_fn_template, true);
                let f = self.parse_friend_function();
                self.in_fn_template = saved;
                self.scopes.pop();
                let f = f?;
                self.fn_templates.insert(f.name.clone());
                members.push(Member::Friend(Box::new(Decl::Template(TemplateDecl {
                    params,
                    body: Box::new(Decl::Function(f)),
                    loc,
                }))));
                continue;
            }
            if self.eat_kw("friend") {
                if self.eat_kw("class") || self.eat_kw("struct") {
                    self.ident()?;
                    self.expect_punct(";")?;
                    continue;
                }
                let f = self.parse_friend_function()?;
                members.push(Member::Friend(Box::new(Decl::Function(f))));
                continue;
            }
            members.extend(self.parse_member(class)?);
        }
        Ok(members)
    }

    fn parse_friend_function(&mut self) -> PResult<FunctionDecl> {
        self.eat_kw("inline");
        let loc = self.loc();
        let base = self.parse_type_spec()?;
        let ty = self.parse_ptr_ops(base)?;
        let name = self.ident()?;
        if self.in_fn_template {
            self.fn_templates.insert(name.clone());
        }
        // A friend is a free function, not a member of the enclosing class.
        let saved = std::mem::take(&mut self.class_stack);
        let f = self.parse_function_rest(ty, name, loc);
        self.class_stack = saved;
        f
    }

    fn parse_member(&mut self, class: &str) -> PResult<Vec<Member>> {
        let loc = self.loc();
        let mut is_virtual = false;
        loop {
            if self.eat_kw("virtual") {
                is_virtual = true;
            } else if !(self.eat_kw("inline") || self.eat_kw("explicit")) {
                break;
            }
        }
        // Destructor.
        if self.eat_punct("~") {
            let n = self.ident()?;
            if n != class {
                return self.fail(format!("destructor name `~{n}` does not match class `{class}`"));
            }
            let mut f = self.parse_function_rest(TypeExpr::Void, format!("~{n}"), loc)?;
            f.flags.is_dtor = true;
            f.flags.is_virtual |= is_virtual;
            return Ok(vec![Member::Method(f)]);
        }
        // Constructor.
        if self.peek_ident() == Some(class) && self.is_punct_at(1, "(") {
            self.pos += 1;
            let mut f = self.parse_function_rest(TypeExpr::Void, class.to_string(), loc)?;
            if is_virtual {
                return Err(Diagnostic::error(f.loc, "constructors cannot be virtual"));
            }
            f.flags.is_ctor = true;
            return Ok(vec![Member::Method(f)]);
        }
        let base = self.parse_type_spec()?;
        let first_loc = self.loc();
        let ty = self.parse_ptr_ops(base.clone())?;
        let name = self.ident()?;
        if self.is_punct("(") {
            let mut f = self.parse_function_rest(ty, name, first_loc)?;
            f.flags.is_virtual |= is_virtual;
            return Ok(vec![Member::Method(f)]);
        }
        if is_virtual {
            return Err(Diagnostic::error(loc, "only member functions can be virtual"));
        }
        let vars = self.parse_var_rest(base, ty, name, first_loc)?;
        Ok(vars.into_iter().map(Member::Field).collect())
    }

    /// Parses `(params) [const] [override] [= 0] [: inits] (body | ;)`.
    fn parse_function_rest(
        &mut self,
        ret: TypeExpr,
        name: String,
        loc: SourceLoc,
    ) -> PResult<FunctionDecl> {
        let mut template_args = None;
        if self.is_punct("<") {
            template_args = Some(self.parse_template_args()?);
        }
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.is_kw("void") && self.is_punct_at(1, ")") {
            self.pos += 1;
        }
        if !self.eat_punct(")") {
            loop {
                let ploc = self.loc();
                let base = self.parse_type_spec()?;
                let ty = self.parse_ptr_ops(base)?;
                let pname = if self.peek_ident().is_some() {
                    Some(self.ident()?)
                } else {
                    None
                };
                let ty = self.parse_array_suffix(ty)?;
                if self.is_punct("=") {
                    return self.fail("default arguments are not supported");
                }
                params.push(Param {
                    ty,
                    name: pname,
                    loc: ploc,
                });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        let mut flags = FnFlags::default();
        loop {
            if self.eat_kw("const") {
                flags.is_const = true;
            } else if self.eat_kw("override") {
                flags.is_override = true;
            } else {
                break;
            }
        }
        if self.is_punct("=") {
            self.pos += 1;
            match self.peek() {
                Some(TokKind::Int(0)) => {
                    self.pos += 1;
                    flags.is_pure = true;
                }
                _ => return self.err("`0`"),
            }
        }
        let mut inits = Vec::new();
        if self.eat_punct(":") {
            loop {
                let iloc = self.loc();
                let target = self.parse_named_type()?;
                self.expect_punct("(")?;
                let args = self.parse_args()?;
                inits.push(MemberInit {
                    target,
                    args,
                    loc: iloc,
                    ctor: None,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        let body = if self.eat_punct(";") {
            None
        } else {
            Some(self.parse_block()?)
        };
        Ok(FunctionDecl {
            name,
            qualifier: None,
            template_args,
            ret,
            params,
            inits,
            body,
            flags,
            loc,
            mangled: None,
        })
    }

    /// Declarator list continuation after the first name.
    fn parse_var_rest(
        &mut self,
        base: TypeExpr,
        first_ty: TypeExpr,
        first_name: String,
        first_loc: SourceLoc,
    ) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        let (mut ty, mut name, mut loc) = (first_ty, first_name, first_loc);
        loop {
            ty = self.parse_array_suffix(ty)?;
            let init = if self.eat_punct("=") {
                if self.eat_punct("{") {
                    let mut items = Vec::new();
                    if !self.eat_punct("}") {
                        loop {
                            items.push(self.parse_expr_no_assign()?);
                            if self.eat_punct("}") {
                                break;
                            }
                            self.expect_punct(",")?;
                        }
                    }
                    Some(Init::List(items))
                } else {
                    Some(Init::Expr(self.parse_expr_no_assign()?))
                }
            } else if self.eat_punct("(") {
                Some(Init::Ctor(self.parse_args()?))
            } else {
                None
            };
            out.push(VarDecl {
                ty,
                name,
                init,
                loc,
                sem_ty: None,
                ctor: None,
            });
            if !self.eat_punct(",") {
                break;
            }
            loc = self.loc();
            ty = self.parse_ptr_ops(base.clone())?;
            name = self.ident()?;
        }
        self.expect_punct(";")?;
        Ok(out)
    }

    // ---- types ----

    /// Base type with `const` before or after it.
    fn parse_type_spec(&mut self) -> PResult<TypeExpr> {
        self.reject_unsupported()?;
        let leading_const = self.eat_kw("const");
        self.reject_unsupported()?;
        self.eat_kw("typename");
        let mut t = if self.eat_kw("int") {
            TypeExpr::Int
        } else if self.eat_kw("bool") {
            TypeExpr::Bool
        } else if self.eat_kw("void") {
            TypeExpr::Void
        } else if matches!(self.peek(), Some(TokKind::Ident(s)) if self.is_type_name(s)) {
            self.parse_named_type()?
        } else {
            return self.err("type");
        };
        let trailing_const = self.eat_kw("const");
        if leading_const || trailing_const {
            t = TypeExpr::Const(Box::new(t));
        }
        Ok(t)
    }

    fn parse_named_type(&mut self) -> PResult<TypeExpr> {
        let name = self.ident()?;
        let args = if self.is_punct("<") && self.class_templates.contains(&name) {
            Some(self.parse_template_args()?)
        } else {
            None
        };
        Ok(TypeExpr::Named { name, args })
    }

    fn parse_ptr_ops(&mut self, mut t: TypeExpr) -> PResult<TypeExpr> {
        loop {
            if self.eat_punct("*") {
                t = TypeExpr::Pointer(Box::new(t));
            } else if self.eat_punct("&") {
                t = TypeExpr::Reference(Box::new(t));
            } else if self.eat_kw("const") {
                t = TypeExpr::Const(Box::new(t));
            } else if self.is_punct("&&") {
                return self.fail("rvalue references are not supported");
            } else {
                return Ok(t);
            }
        }
    }

    fn parse_array_suffix(&mut self, t: TypeExpr) -> PResult<TypeExpr> {
        if self.eat_punct("[") {
            let n = self.parse_expr()?;
            self.expect_punct("]")?;
            if self.is_punct("[") {
                return self.fail("multi-dimensional arrays are not supported");
            }
            return Ok(TypeExpr::Array(Box::new(t), Box::new(n)));
        }
        Ok(t)
    }

    /// A type in abstract-declarator position (casts, template arguments).
    pub fn parse_type(&mut self) -> PResult<TypeExpr> {
        let base = self.parse_type_spec()?;
        self.parse_ptr_ops(base)
    }

    fn parse_template_args(&mut self) -> PResult<Vec<TemplateArg>> {
        self.expect_punct("<")?;
        let mut args = Vec::new();
        if self.eat_punct(">") {
            return Ok(args);
        }
        let saved = std::mem::replace(&mut self.no_gt, true);
        let r = (|| {
            loop {
                if self.starts_type() {
                    args.push(TemplateArg::Type(self.parse_type()?));
                } else {
                    args.push(TemplateArg::Value(self.parse_expr_no_assign()?));
                }
                if self.eat_punct(">") {
                    return Ok(());
                }
                self.expect_punct(",")?;
            }
        })();
        self.no_gt = saved;
        r?;
        Ok(args)
    }

    // ---- statements ----

    fn parse_block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if self.peek().is_none() {
                return self.err("`}`");
            }
            stmts.push(self.parse_stmt()?);
        }
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        self.reject_unsupported()?;
        let loc = self.loc();
        let kind = if self.is_punct("{") {
            StmtKind::Block(self.parse_block()?)
        } else if self.eat_punct(";") {
            StmtKind::Empty
        } else if self.eat_kw("if") {
            self.expect_punct("(")?;
            let c = self.parse_expr()?;
            self.expect_punct(")")?;
            let t = self.parse_stmt()?;
            let e = if self.eat_kw("else") {
                Some(Box::new(self.parse_stmt()?))
            } else {
                None
            };
            StmtKind::If(c, Box::new(t), e)
        } else if self.eat_kw("while") {
            self.expect_punct("(")?;
            let c = self.parse_expr()?;
            self.expect_punct(")")?;
            StmtKind::While(c, Box::new(self.parse_stmt()?))
        } else if self.eat_kw("do") {
            let body = self.parse_stmt()?;
            self.expect_kw("while")?;
            self.expect_punct("(")?;
            let c = self.parse_expr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            StmtKind::DoWhile(Box::new(body), c)
        } else if self.eat_kw("for") {
            self.expect_punct("(")?;
            let init = if self.eat_punct(";") {
                None
            } else {
                Some(Box::new(self.parse_simple_stmt()?))
            };
            let cond = if self.is_punct(";") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(";")?;
            let step = if self.is_punct(")") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(")")?;
            let body = Box::new(self.parse_stmt()?);
            StmtKind::For {
                init,
                cond,
                step,
                body,
            }
        } else if self.eat_kw("return") {
            let e = if self.is_punct(";") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(";")?;
            StmtKind::Return(e)
        } else if self.eat_kw("break") {
            self.expect_punct(";")?;
            StmtKind::Break
        } else if self.eat_kw("continue") {
            self.expect_punct(";")?;
            StmtKind::Continue
        } else if self.eat_kw("assert") {
            self.expect_punct("(")?;
            let start = self.pos;
            let cond = self.parse_expr()?;
            let text = assertion_text(&self.toks[start..self.pos]);
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            StmtKind::Assert {
                cond,
                text: Meta(text),
            }
        } else if matches!(self.peek_ident(), Some("__ESBMC_assume" | "__CPROVER_assume"))
            && self.is_punct_at(1, "(")
        {
            self.pos += 2;
            let c = self.parse_expr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            StmtKind::Assume(c)
        } else {
            return self.parse_simple_stmt();
        };
        Ok(Stmt { kind, loc })
    }

    /// Declaration or expression statement, including the trailing `;`.
    fn parse_simple_stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        if self.starts_type() {
            let base = self.parse_type_spec()?;
            let vloc = self.loc();
            let ty = self.parse_ptr_ops(base.clone())?;
            let name = self.ident()?;
            let vars = self.parse_var_rest(base, ty, name, vloc)?;
            return Ok(Stmt {
                kind: StmtKind::Decl(vars),
                loc,
            });
        }
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(Stmt {
            kind: StmtKind::Expr(e),
            loc,
        })
    }

    // ---- expressions ----

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        let lhs = self.parse_binary(1)?;
        if let Some(TokKind::Punct(p)) = self.peek() {
            if let Some(op) = is_assign_op(p) {
                self.pos += 1;
                let rhs = self.parse_expr()?;
                let loc = lhs.loc.clone();
                return Ok(Expr::new(
                    ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)),
                    loc,
                ));
            }
        }
        Ok(lhs)
    }

    fn parse_expr_no_assign(&mut self) -> PResult<Expr> {
        self.parse_binary(1)
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(TokKind::Punct(p)) => match binop_of(p) {
                    Some(op) => op,
                    None => break,
                },
                _ => break,
            };
            if self.no_gt && matches!(op, BinOp::Gt) {
                break;
            }
            if op.precedence() < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.parse_binary(op.precedence() + 1)?;
            let loc = lhs.loc.clone();
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    /// `(` type `)` in expression position.
    fn at_cast(&self) -> bool {
        if !self.is_punct("(") {
            return false;
        }
        match self.peek_at(1) {
            Some(TokKind::Keyword(k)) => matches!(*k, "int" | "bool" | "void" | "const"),
            Some(TokKind::Ident(s)) => {
                self.is_type_name(s)
                    && !self.is_punct_at(2, "::")
                    && !self.is_punct_at(2, "(")
            }
            _ => false,
        }
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let op = match self.peek() {
            Some(TokKind::Punct("-")) => Some(UnOp::Neg),
            Some(TokKind::Punct("!")) => Some(UnOp::Not),
            Some(TokKind::Punct("*")) => Some(UnOp::Deref),
            Some(TokKind::Punct("&")) => Some(UnOp::AddrOf),
            Some(TokKind::Punct("++")) => Some(UnOp::PreInc),
            Some(TokKind::Punct("--")) => Some(UnOp::PreDec),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), loc));
        }
        if self.eat_punct("+") {
            return self.parse_unary();
        }
        if self.at_cast() {
            self.pos += 1;
            let target = self.parse_type()?;
            self.expect_punct(")")?;
            let e = self.parse_unary()?;
            return Ok(Expr::new(
                ExprKind::Cast {
                    target,
                    expr: Box::new(e),
                    implicit: false,
                },
                loc,
            ));
        }
        if self.eat_kw("new") {
            let base = self.parse_type_spec()?;
            let ty = self.parse_ptr_ops(base)?;
            let (args, array_len) = if self.eat_punct("[") {
                let n = self.parse_expr()?;
                self.expect_punct("]")?;
                (vec![], Some(Box::new(n)))
            } else if self.eat_punct("(") {
                (self.parse_args()?, None)
            } else {
                (vec![], None)
            };
            return Ok(Expr::new(
                ExprKind::New {
                    ty,
                    args,
                    array_len,
                    ctor: None,
                },
                loc,
            ));
        }
        if self.eat_kw("delete") {
            let array = if self.eat_punct("[") {
                self.expect_punct("]")?;
                true
            } else {
                false
            };
            let e = self.parse_unary()?;
            return Ok(Expr::new(
                ExprKind::Delete {
                    expr: Box::new(e),
                    array,
                },
                loc,
            ));
        }
        self.parse_postfix()
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        let saved = std::mem::replace(&mut self.no_gt, false);
        let r = (|| {
            loop {
                args.push(self.parse_expr()?);
                if self.eat_punct(")") {
                    return Ok(());
                }
                self.expect_punct(",")?;
            }
        })();
        self.no_gt = saved;
        r?;
        Ok(args)
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut e = self.parse_primary()?;
        loop {
            let loc = e.loc.clone();
            if self.eat_punct("(") {
                let args = self.parse_args()?;
                e = Expr::new(
                    ExprKind::Call {
                        callee: Box::new(e),
                        args,
                        res: None,
                    },
                    loc,
                );
            } else if self.eat_punct("[") {
                let saved = std::mem::replace(&mut self.no_gt, false);
                let i = self.parse_expr();
                self.no_gt = saved;
                let i = i?;
                self.expect_punct("]")?;
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(i)), loc);
            } else if self.is_punct(".") || self.is_punct("->") {
                let arrow = self.is_punct("->");
                self.pos += 1;
                let name = self.ident()?;
                e = Expr::new(
                    ExprKind::Member {
                        base: Box::new(e),
                        arrow,
                        name,
                        owner: None,
                    },
                    loc,
                );
            } else if self.eat_punct("++") {
                e = Expr::new(ExprKind::Unary(UnOp::PostInc, Box::new(e)), loc);
            } else if self.eat_punct("--") {
                e = Expr::new(ExprKind::Unary(UnOp::PostDec, Box::new(e)), loc);
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek().cloned() {
            Some(TokKind::Int(v)) => {
                self.pos += 1;
                ExprKind::IntLit(v)
            }
            Some(TokKind::Keyword("true")) => {
                self.pos += 1;
                ExprKind::BoolLit(true)
            }
            Some(TokKind::Keyword("false")) => {
                self.pos += 1;
                ExprKind::BoolLit(false)
            }
            Some(TokKind::Keyword("nullptr")) => {
                self.pos += 1;
                ExprKind::Null
            }
            Some(TokKind::Keyword("this")) => {
                self.pos += 1;
                ExprKind::This
            }
            Some(TokKind::Punct("(")) => {
                self.pos += 1;
                let saved = std::mem::replace(&mut self.no_gt, false);
                let e = self.parse_expr();
                self.no_gt = saved;
                let e = e?;
                self.expect_punct(")")?;
                return Ok(e);
            }
            Some(TokKind::Ident(name)) => {
                self.pos += 1;
                if name == "NULL" {
                    ExprKind::Null
                } else if self.is_punct("::") {
                    self.pos += 1;
                    let member = self.ident()?;
                    ExprKind::Scoped {
                        scope: TypeExpr::named(name),
                        name: member,
                    }
                } else if self.is_punct("<") && self.is_template_name(&name) {
                    if self.class_templates.contains(&name) {
                        // `X<args>::f` qualified call on a template instance.
                        let args = self.parse_template_args()?;
                        self.expect_punct("::")?;
                        let member = self.ident()?;
                        ExprKind::Scoped {
                            scope: TypeExpr::Named {
                                name,
                                args: Some(args),
                            },
                            name: member,
                        }
                    } else {
                        let args = self.parse_template_args()?;
                        ExprKind::Ident {
                            name,
                            args: Some(args),
                            res: None,
                        }
                    }
                } else {
                    ExprKind::Ident {
                        name,
                        args: None,
                        res: None,
                    }
                }
            }
            _ => return self.err("expression"),
        };
        Ok(Expr::new(kind, loc))
    }
}

/// Source text of an assertion: tokens joined without spaces except
/// between two word-like tokens.
pub fn assertion_text(toks: &[Token]) -> String {
    let mut s = String::new();
    for (i, t) in toks.iter().enumerate() {
        if i > 0 && t.is_wordlike() && toks[i - 1].is_wordlike() {
            s.push(' ');
        }
        s.push_str(&t.spelling());
    }
    s
}
