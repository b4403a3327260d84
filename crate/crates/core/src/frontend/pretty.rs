//! Printing syntax trees back to MiniC++ source.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(ast: &Ast) -> String {
    let mut p = Printer::default();
    for d in &ast.decls {
        p.decl(d);
    }
    p.out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e);
    s
}

pub fn print_type(t: &TypeExpr) -> String {
    let mut s = String::new();
    type_expr(&mut s, t);
    s
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn decl(&mut self, d: &Decl) {
        match d {
            Decl::Class(c) => self.class(c),
            Decl::Function(f) => self.function(f, None),
            Decl::Vars(vs) => {
                let s = var_list(vs);
                self.line(&format!("{s};"));
            }
            Decl::Typedef(t) => self.line(&format!("typedef {};", declarator(&t.ty, &t.name))),
            Decl::Template(t) => {
                self.line(&template_head(&t.params));
                self.decl(&t.body);
            }
        }
    }

    fn class(&mut self, c: &ClassDecl) {
        let mut head = format!("{} {}", if c.is_struct { "struct" } else { "class" }, c.name);
        if let Some(args) = &c.spec_args {
            head.push_str(&template_args(args));
        }
        if !c.is_definition {
            self.line(&format!("{head};"));
            return;
        }
        if !c.bases.is_empty() {
            head.push_str(" : ");
            let bs: Vec<String> = c
                .bases
                .iter()
                .map(|b| {
                    format!(
                        "{}public {}",
                        if b.is_virtual { "virtual " } else { "" },
                        print_type(&b.ty)
                    )
                })
                .collect();
            head.push_str(&bs.join(", "));
        }
        head.push_str(" {");
        self.line(&head);
        self.indent += 1;
        if !c.is_struct {
            self.line("public:");
        }
        for m in &c.members {
            match m {
                Member::Field(v) => {
                    let s = var_list(std::slice::from_ref(v));
                    self.line(&format!("{s};"));
                }
                Member::Method(f) => self.function(f, Some(&c.name)),
                Member::Typedef(t) => {
                    self.line(&format!("typedef {};", declarator(&t.ty, &t.name)))
                }
                Member::Friend(d) => match d.as_ref() {
                    Decl::Template(t) => {
                        self.line(&template_head(&t.params));
                        if let Decl::Function(f) = t.body.as_ref() {
                            self.function_with_prefix(f, None, "friend ");
                        }
                    }
                    Decl::Function(f) => self.function_with_prefix(f, None, "friend "),
                    other => self.decl(other),
                },
            }
        }
        self.indent -= 1;
        self.line("};");
    }

    fn function(&mut self, f: &FunctionDecl, class: Option<&str>) {
        self.function_with_prefix(f, class, "")
    }

    fn function_with_prefix(&mut self, f: &FunctionDecl, _class: Option<&str>, prefix: &str) {
        let mut head = String::from(prefix);
        if f.flags.is_virtual {
            head.push_str("virtual ");
        }
        let mut name = String::new();
        if let Some(q) = &f.qualifier {
            let _ = write!(name, "{q}::");
        }
        name.push_str(&f.name);
        if let Some(args) = &f.template_args {
            name.push_str(&template_args(args));
        }
        if f.flags.is_ctor || f.flags.is_dtor {
            head.push_str(&name);
        } else {
            head.push_str(&declarator(&f.ret, &name));
        }
        head.push('(');
        let ps: Vec<String> = f
            .params
            .iter()
            .map(|p| match &p.name {
                Some(n) => declarator(&p.ty, n),
                None => print_type(&p.ty),
            })
            .collect();
        head.push_str(&ps.join(", "));
        head.push(')');
        if f.flags.is_const {
            head.push_str(" const");
        }
        if f.flags.is_override {
            head.push_str(" override");
        }
        if f.flags.is_pure {
            head.push_str(" = 0");
        }
        if !f.inits.is_empty() {
            head.push_str(" : ");
            let is: Vec<String> = f
                .inits
                .iter()
                .map(|i| format!("{}({})", print_type(&i.target), args_list(&i.args)))
                .collect();
            head.push_str(&is.join(", "));
        }
        match &f.body {
            None => self.line(&format!("{head};")),
            Some(body) => {
                self.line(&format!("{head} {{"));
                self.indent += 1;
                for s in body {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => {
                self.line("{");
                self.indent += 1;
                for s in b {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::If(c, t, e) => {
                self.line(&format!("if ({})", print_expr(c)));
                self.nested(t);
                if let Some(e) = e {
                    self.line("else");
                    self.nested(e);
                }
            }
            StmtKind::While(c, b) => {
                self.line(&format!("while ({})", print_expr(c)));
                self.nested(b);
            }
            StmtKind::DoWhile(b, c) => {
                self.line("do");
                self.nested(b);
                self.line(&format!("while ({});", print_expr(c)));
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                let i = init.as_ref().map_or(";".to_string(), |s| simple_stmt(s));
                let c = cond.as_ref().map_or(String::new(), print_expr);
                let st = step.as_ref().map_or(String::new(), print_expr);
                self.line(&format!("for ({i} {c}; {st})"));
                self.nested(body);
            }
            _ => {
                let text = simple_stmt(s);
                self.line(&text);
            }
        }
    }

    fn nested(&mut self, s: &Stmt) {
        if matches!(s.kind, StmtKind::Block(_)) {
            self.stmt(s);
        } else {
            self.indent += 1;
            self.stmt(s);
            self.indent -= 1;
        }
    }
}

/// Statements that fit on one line, including the terminating `;`.
fn simple_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Expr(e) => format!("{};", print_expr(e)),
        StmtKind::Decl(vs) => format!("{};", var_list(vs)),
        StmtKind::Return(None) => "return;".into(),
        StmtKind::Return(Some(e)) => format!("return {};", print_expr(e)),
        StmtKind::Break => "break;".into(),
        StmtKind::Continue => "continue;".into(),
        StmtKind::Assert { cond, .. } => format!("assert({});", print_expr(cond)),
        StmtKind::Assume(e) => format!("__ESBMC_assume({});", print_expr(e)),
        StmtKind::Empty => ";".into(),
        _ => {
            let mut p = Printer::default();
            p.stmt(s);
            p.out.trim_end().to_string()
        }
    }
}

fn template_head(params: &[TemplateParam]) -> String {
    let ps: Vec<String> = params
        .iter()
        .map(|p| {
            let mut s = match p.kind {
                TemplateParamKind::Type => format!("typename {}", p.name),
                TemplateParamKind::Int => format!("int {}", p.name),
            };
            if let Some(d) = &p.default {
                s.push_str(" = ");
                s.push_str(&template_arg(d));
            }
            s
        })
        .collect();
    format!("template <{}>", ps.join(", "))
}

fn template_arg(a: &TemplateArg) -> String {
    match a {
        TemplateArg::Type(t) => print_type(t),
        TemplateArg::Value(e) => {
            let s = print_expr(e);
            if is_atomic(e) {
                s
            } else {
                format!("({s})")
            }
        }
    }
}

fn template_args(args: &[TemplateArg]) -> String {
    let parts: Vec<String> = args.iter().map(template_arg).collect();
    format!("<{}>", parts.join(", "))
}

fn args_list(args: &[Expr]) -> String {
    args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

/// Splits a declared type into its specifier and the declarator operators
/// applied on top of it, innermost first.
fn split_declarator(t: &TypeExpr) -> (&TypeExpr, Vec<&'static str>) {
    let mut ops = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            TypeExpr::Pointer(inner) => {
                ops.push("*");
                cur = inner;
            }
            TypeExpr::Reference(inner) => {
                ops.push("&");
                cur = inner;
            }
            TypeExpr::Const(inner)
                if matches!(
                    inner.as_ref(),
                    TypeExpr::Pointer(_) | TypeExpr::Reference(_) | TypeExpr::Const(_)
                ) =>
            {
                ops.push(" const ");
                cur = inner;
            }
            _ => break,
        }
    }
    ops.reverse();
    (cur, ops)
}

fn declarator(t: &TypeExpr, name: &str) -> String {
    let (t, suffix) = match t {
        TypeExpr::Array(inner, n) => (inner.as_ref(), format!("[{}]", print_expr(n))),
        _ => (t, String::new()),
    };
    let (base, ops) = split_declarator(t);
    format!("{} {}{}{}", print_type(base), ops.concat(), name, suffix)
}

fn var_list(vs: &[VarDecl]) -> String {
    let mut s = String::new();
    let (base, _) = split_declarator(match &vs[0].ty {
        TypeExpr::Array(inner, _) => inner,
        t => t,
    });
    s.push_str(&print_type(base));
    s.push(' ');
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let full = declarator(&v.ty, &v.name);
        // Drop the shared specifier from each declarator.
        let own = &full[print_type(base).len() + 1..];
        s.push_str(own);
        match &v.init {
            None => {}
            Some(Init::Expr(e)) => {
                let _ = write!(s, " = {}", print_expr(e));
            }
            Some(Init::Ctor(args)) => {
                let _ = write!(s, "({})", args_list(args));
            }
            Some(Init::List(items)) => {
                let _ = write!(s, " = {{{}}}", args_list(items));
            }
        }
    }
    s
}

fn type_expr(s: &mut String, t: &TypeExpr) {
    match t {
        TypeExpr::Int => s.push_str("int"),
        TypeExpr::Bool => s.push_str("bool"),
        TypeExpr::Void => s.push_str("void"),
        TypeExpr::Named { name, args } => {
            s.push_str(name);
            if let Some(a) = args {
                s.push_str(&template_args(a));
            }
        }
        TypeExpr::Pointer(i) => {
            type_expr(s, i);
            s.push('*');
        }
        TypeExpr::Reference(i) => {
            type_expr(s, i);
            s.push('&');
        }
        TypeExpr::Const(i) => {
            type_expr(s, i);
            s.push_str(" const");
        }
        TypeExpr::Array(i, n) => {
            type_expr(s, i);
            let _ = write!(s, "[{}]", print_expr(n));
        }
    }
}

fn is_atomic(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::IntLit(_)
            | ExprKind::BoolLit(_)
            | ExprKind::Null
            | ExprKind::This
            | ExprKind::Ident { .. }
            | ExprKind::Scoped { .. }
            | ExprKind::Call { .. }
            | ExprKind::Index(..)
            | ExprKind::Member { .. }
    ) || matches!(e.kind, ExprKind::Unary(UnOp::PostInc | UnOp::PostDec, _))
}

fn operand(s: &mut String, e: &Expr) {
    if is_atomic(e) {
        expr(s, e);
    } else {
        s.push('(');
        expr(s, e);
        s.push(')');
    }
}

fn binary_operand(s: &mut String, e: &Expr, parent: u8, right: bool) {
    let wrap = match &e.kind {
        ExprKind::Binary(op, ..) => {
            op.precedence() < parent || (right && op.precedence() == parent)
        }
        ExprKind::Assign(..) => true,
        _ => false,
    };
    if wrap {
        s.push('(');
        expr(s, e);
        s.push(')');
    } else {
        expr(s, e);
    }
}

fn expr(s: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::IntLit(v) => {
            let _ = write!(s, "{v}");
        }
        ExprKind::BoolLit(b) => s.push_str(if *b { "true" } else { "false" }),
        ExprKind::Null => s.push_str("nullptr"),
        ExprKind::This => s.push_str("this"),
        ExprKind::Ident { name, args, .. } => {
            s.push_str(name);
            if let Some(a) = args {
                s.push_str(&template_args(a));
            }
        }
        ExprKind::Scoped { scope, name } => {
            type_expr(s, scope);
            s.push_str("::");
            s.push_str(name);
        }
        ExprKind::Unary(op, inner) => match op {
            UnOp::PostInc | UnOp::PostDec => {
                operand(s, inner);
                s.push_str(if *op == UnOp::PostInc { "++" } else { "--" });
            }
            _ => {
                s.push_str(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                    UnOp::Deref => "*",
                    UnOp::AddrOf => "&",
                    UnOp::PreInc => "++",
                    UnOp::PreDec => "--",
                    _ => unreachable!(),
                });
                // Keep `- -x` from lexing as `--x`, and `& &x` as `&&x`.
                let nested_sign = matches!(
                    (op, &inner.kind),
                    (UnOp::Neg, ExprKind::Unary(UnOp::Neg | UnOp::PreDec, _))
                        | (UnOp::AddrOf, ExprKind::Unary(UnOp::AddrOf, _))
                );
                if nested_sign || !is_atomic(inner) && !matches!(inner.kind, ExprKind::Unary(..)) {
                    s.push('(');
                    expr(s, inner);
                    s.push(')');
                } else {
                    expr(s, inner);
                }
            }
        },
        ExprKind::Binary(op, a, b) => {
            binary_operand(s, a, op.precedence(), false);
            let _ = write!(s, " {} ", op.symbol());
            binary_operand(s, b, op.precedence(), true);
        }
        ExprKind::Assign(op, a, b) => {
            operand(s, a);
            match op {
                None => s.push_str(" = "),
                Some(op) => {
                    let _ = write!(s, " {}= ", op.symbol());
                }
            }
            expr(s, b);
        }
        ExprKind::Index(a, i) => {
            operand(s, a);
            s.push('[');
            expr(s, i);
            s.push(']');
        }
        ExprKind::Member {
            base, arrow, name, ..
        } => {
            operand(s, base);
            s.push_str(if *arrow { "->" } else { "." });
            s.push_str(name);
        }
        ExprKind::Call { callee, args, .. } => {
            operand(s, callee);
            let _ = write!(s, "({})", args_list(args));
        }
        ExprKind::New {
            ty,
            args,
            array_len,
            ..
        } => {
            let _ = write!(s, "new {}", print_type(ty));
            match array_len {
                Some(n) => {
                    let _ = write!(s, "[{}]", print_expr(n));
                }
                None => {
                    let _ = write!(s, "({})", args_list(args));
                }
            }
        }
        ExprKind::Delete { expr: inner, array } => {
            s.push_str(if *array { "delete[] " } else { "delete " });
            operand(s, inner);
        }
        ExprKind::Cast {
            target,
            expr: inner,
            ..
        } => {
            let _ = write!(s, "({})", print_type(target));
            operand(s, inner);
        }
    }
}
