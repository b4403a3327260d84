//! Template arguments, parameter substitution and monomorphization.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::check::Program;
use super::symbols::SymbolTable;
use super::types::Type;
use crate::diag::Diagnostic;
use crate::frontend::ast::*;

/// Instantiation depth limit.
pub const MAX_DEPTH: u32 = 64;

/// A concrete template argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TArg {
    Type(Type),
    Int(i64),
}

impl fmt::Display for TArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TArg::Type(t) => write!(f, "{t}"),
            TArg::Int(v) => write!(f, "{v}"),
        }
    }
}

impl TArg {
    pub fn to_syntax(&self) -> TemplateArg {
        match self {
            TArg::Type(t) => TemplateArg::Type(TypeExpr::from_type(t)),
            TArg::Int(v) => TemplateArg::Value(int_expr(*v, SourceLoc::builtin())),
        }
    }
}

/// `X<1234>`, `pair<int,bool>`.
pub fn instance_name(name: &str, args: &[TArg]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    format!("{name}<{}>", parts.join(","))
}

pub fn int_expr(v: i64, loc: SourceLoc) -> Expr {
    if v < 0 {
        let lit = Expr::new(ExprKind::IntLit(v.unsigned_abs()), loc.clone());
        Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(lit)), loc)
    } else {
        Expr::new(ExprKind::IntLit(v as u64), loc)
    }
}

/// Evaluates an integral constant expression over literals.
pub fn const_eval(e: &Expr) -> Result<i64, Diagnostic> {
    let bad = || Diagnostic::error(e.loc.clone(), "expected an integral constant expression");
    let v: i64 = match &e.kind {
        ExprKind::IntLit(v) => i64::try_from(*v).map_err(|_| bad())?,
        ExprKind::BoolLit(b) => *b as i64,
        ExprKind::Unary(UnOp::Neg, a) => const_eval(a)?.checked_neg().ok_or_else(bad)?,
        ExprKind::Unary(UnOp::Not, a) => (const_eval(a)? == 0) as i64,
        ExprKind::Binary(op, a, b) => {
            let (x, y) = (const_eval(a)?, const_eval(b)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x.checked_mul(y).ok_or_else(bad)?,
                BinOp::Div | BinOp::Rem if y == 0 => {
                    return Err(Diagnostic::error(e.loc.clone(), "division by zero in constant expression"))
                }
                BinOp::Div => x / y,
                BinOp::Rem => x % y,
                BinOp::Eq => (x == y) as i64,
                BinOp::Ne => (x != y) as i64,
                BinOp::Lt => (x < y) as i64,
                BinOp::Le => (x <= y) as i64,
                BinOp::Gt => (x > y) as i64,
                BinOp::Ge => (x >= y) as i64,
                BinOp::And => (x != 0 && y != 0) as i64,
                BinOp::Or => (x != 0 || y != 0) as i64,
            }
        }
        ExprKind::Cast { expr, .. } => const_eval(expr)?,
        _ => return Err(bad()),
    };
    if v < i32::MIN as i64 || v > i32::MAX as i64 {
        return Err(Diagnostic::error(
            e.loc.clone(),
            format!("constant {v} does not fit in `int`"),
        ));
    }
    Ok(v)
}

/// Replacement of template parameters by arguments.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pub types: HashMap<String, Type>,
    pub values: HashMap<String, i64>,
    /// The injected class name of a class template instance: `X` inside
    /// `X<N>` stands for the instance.
    pub injected: Option<(String, Vec<TemplateArg>)>,
}

impl Subst {
    pub fn bind(params: &[TemplateParam], args: &[TArg]) -> Subst {
        let mut s = Subst::default();
        for (p, a) in params.iter().zip(args) {
            match a {
                TArg::Type(t) => {
                    s.types.insert(p.name.clone(), t.clone());
                }
                TArg::Int(v) => {
                    s.values.insert(p.name.clone(), *v);
                }
            }
        }
        s
    }

    fn without(&self, names: &[TemplateParam]) -> Subst {
        let mut s = self.clone();
        for p in names {
            s.types.remove(&p.name);
            s.values.remove(&p.name);
        }
        s
    }

    pub fn ty(&self, t: &mut TypeExpr) {
        match t {
            TypeExpr::Int | TypeExpr::Bool | TypeExpr::Void => {}
            TypeExpr::Named { name, args } => {
                if let Some(a) = args {
                    for x in a.iter_mut() {
                        self.targ(x);
                    }
                } else if let Some(r) = self.types.get(name.as_str()) {
                    *t = TypeExpr::from_type(r);
                } else if let Some((inj, iargs)) = &self.injected {
                    if inj == name {
                        *args = Some(iargs.clone());
                    }
                }
            }
            TypeExpr::Pointer(i) | TypeExpr::Reference(i) | TypeExpr::Const(i) => self.ty(i),
            TypeExpr::Array(i, n) => {
                self.ty(i);
                self.expr(n);
            }
        }
    }

    fn targ(&self, a: &mut TemplateArg) {
        match a {
            TemplateArg::Type(t) => {
                // A bare name parsed as a type may be a value parameter.
                if let TypeExpr::Named { name, args: None } = t {
                    if let Some(v) = self.values.get(name.as_str()) {
                        *a = TemplateArg::Value(int_expr(*v, SourceLoc::builtin()));
                        return;
                    }
                }
                self.ty(t)
            }
            TemplateArg::Value(e) => {
                // A bare identifier may name a type parameter.
                if let ExprKind::Ident { name, args: None, .. } = &e.kind {
                    if let Some(t) = self.types.get(name.as_str()) {
                        *a = TemplateArg::Type(TypeExpr::from_type(t));
                        return;
                    }
                }
                self.expr(e)
            }
        }
    }

    pub fn expr(&self, e: &mut Expr) {
        match &mut e.kind {
            ExprKind::IntLit(_) | ExprKind::BoolLit(_) | ExprKind::Null | ExprKind::This => {}
            ExprKind::Ident { name, args, .. } => {
                if let Some(a) = args {
                    for x in a.iter_mut() {
                        self.targ(x);
                    }
                } else if let Some(v) = self.values.get(name.as_str()) {
                    *e = int_expr(*v, e.loc.clone());
                }
            }
            ExprKind::Scoped { scope, .. } => self.ty(scope),
            ExprKind::Unary(_, a) => self.expr(a),
            ExprKind::Binary(_, a, b) | ExprKind::Assign(_, a, b) | ExprKind::Index(a, b) => {
                self.expr(a);
                self.expr(b);
            }
            ExprKind::Member { base, .. } => self.expr(base),
            ExprKind::Call { callee, args, .. } => {
                self.expr(callee);
                args.iter_mut().for_each(|a| self.expr(a));
            }
            ExprKind::New {
                ty,
                args,
                array_len,
                ..
            } => {
                self.ty(ty);
                args.iter_mut().for_each(|a| self.expr(a));
                if let Some(n) = array_len {
                    self.expr(n);
                }
            }
            ExprKind::Delete { expr, .. } => self.expr(expr),
            ExprKind::Cast { target, expr, .. } => {
                self.ty(target);
                self.expr(expr);
            }
        }
    }

    fn var(&self, v: &mut VarDecl) {
        self.ty(&mut v.ty);
        match &mut v.init {
            None => {}
            Some(Init::Expr(e)) => self.expr(e),
            Some(Init::Ctor(es)) | Some(Init::List(es)) => es.iter_mut().for_each(|e| self.expr(e)),
        }
    }

    pub fn stmt(&self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Expr(e) | StmtKind::Assume(e) => self.expr(e),
            StmtKind::Assert { cond, .. } => self.expr(cond),
            StmtKind::Block(b) => b.iter_mut().for_each(|s| self.stmt(s)),
            StmtKind::Decl(vs) => vs.iter_mut().for_each(|v| self.var(v)),
            StmtKind::If(c, t, e) => {
                self.expr(c);
                self.stmt(t);
                if let Some(e) = e {
                    self.stmt(e);
                }
            }
            StmtKind::While(c, b) | StmtKind::DoWhile(b, c) => {
                self.expr(c);
                self.stmt(b);
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i);
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                if let Some(s) = step {
                    self.expr(s);
                }
                self.stmt(body);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
            }
            StmtKind::Break | StmtKind::Continue | StmtKind::Empty => {}
        }
    }

    pub fn function(&self, f: &mut FunctionDecl) {
        self.ty(&mut f.ret);
        for p in &mut f.params {
            self.ty(&mut p.ty);
        }
        if let Some(a) = &mut f.template_args {
            a.iter_mut().for_each(|x| self.targ(x));
        }
        for i in &mut f.inits {
            self.ty(&mut i.target);
            i.args.iter_mut().for_each(|e| self.expr(e));
        }
        if let Some(b) = &mut f.body {
            b.iter_mut().for_each(|s| self.stmt(s));
        }
    }

    pub fn decl(&self, d: &mut Decl) {
        match d {
            Decl::Class(c) => self.class(c),
            Decl::Function(f) => self.function(f),
            Decl::Vars(vs) => vs.iter_mut().for_each(|v| self.var(v)),
            Decl::Typedef(t) => self.ty(&mut t.ty),
            Decl::Template(t) => {
                let inner = self.without(&t.params);
                for p in &mut t.params {
                    match &mut p.default {
                        Some(TemplateArg::Type(te)) => inner.ty(te),
                        Some(TemplateArg::Value(e)) => inner.expr(e),
                        None => {}
                    }
                }
                inner.decl(&mut t.body);
            }
        }
    }

    pub fn class(&self, c: &mut ClassDecl) {
        for b in &mut c.bases {
            self.ty(&mut b.ty);
        }
        for m in &mut c.members {
            match m {
                Member::Field(v) => self.var(v),
                Member::Method(f) => self.function(f),
                Member::Typedef(t) => self.ty(&mut t.ty),
                Member::Friend(d) => self.decl(d),
            }
        }
    }
}

/// Removes templates and unreferenced template instances, merges
/// out-of-line member definitions into their classes and drops function
/// prototypes that have a definition.
pub fn monomorphize(p: Program) -> Program {
    let Program { ast, symbols } = p;
    let mut decls = Vec::new();
    for d in ast.decls {
        match d {
            Decl::Template(t) if t.params.is_empty() && matches!(*t.body, Decl::Function(_)) => {
                decls.push(*t.body)
            }
            Decl::Template(_) => {}
            other => decls.push(other),
        }
    }
    // Out-of-line bodies move into the class.
    let mut bodies: HashMap<String, FunctionDecl> = HashMap::new();
    decls.retain(|d| match d {
        Decl::Function(f) if f.qualifier.is_some() => {
            bodies.insert(f.mangled.clone().unwrap_or_default(), f.clone());
            false
        }
        _ => true,
    });
    let defined: HashSet<String> = decls
        .iter()
        .filter_map(|d| match d {
            Decl::Function(f) if f.body.is_some() => f.mangled.clone(),
            _ => None,
        })
        .collect();
    decls.retain(|d| match d {
        Decl::Function(f) => f.body.is_some() || !defined.contains(f.mangled.as_deref().unwrap_or("")),
        _ => true,
    });
    for d in &mut decls {
        if let Decl::Class(c) = d {
            c.members.retain(|m| !matches!(m, Member::Friend(_)));
            for m in &mut c.members {
                if let Member::Method(f) = m {
                    if let Some(def) = f.mangled.as_ref().and_then(|n| bodies.remove(n)) {
                        f.body = def.body;
                        f.inits = def.inits;
                        for (p, dp) in f.params.iter_mut().zip(def.params) {
                            p.name = dp.name;
                        }
                    }
                }
            }
        }
    }

    let (fns, classes) = reachable(&decls, &symbols);
    decls.retain(|d| match d {
        Decl::Class(c) => {
            let name = class_decl_name(c);
            let info = symbols.classes.get(&name);
            !info.is_some_and(|i| i.from_template) || classes.contains(&name)
        }
        Decl::Function(f) => {
            let m = f.mangled.clone().unwrap_or_default();
            let info = symbols.functions.get(&m);
            !info.is_some_and(|i| i.from_template) || fns.contains(&m)
        }
        _ => true,
    });
    let mut symbols = symbols;
    let kept_classes: BTreeSet<String> = decls
        .iter()
        .filter_map(|d| match d {
            Decl::Class(c) if c.is_definition => Some(class_decl_name(c)),
            _ => None,
        })
        .collect();
    symbols
        .classes
        .retain(|n, c| !c.from_template || kept_classes.contains(n));
    let kept = symbols.classes.keys().cloned().collect::<BTreeSet<_>>();
    symbols.class_order.retain(|n| kept.contains(n));
    symbols.functions.retain(|m, f| match &f.class {
        Some(c) => kept.contains(c),
        None => !f.from_template || fns.contains(m),
    });
    Program {
        ast: Ast { decls },
        symbols,
    }
}

/// Name of a class declaration in the symbol table: `X` or `X<1234>`.
pub fn class_decl_name(c: &ClassDecl) -> String {
    match &c.spec_args {
        None => c.name.clone(),
        Some(args) => {
            let parts: Vec<String> = args.iter().map(targ_text).collect();
            format!("{}<{}>", c.name, parts.join(","))
        }
    }
}

fn targ_text(a: &TemplateArg) -> String {
    match a {
        TemplateArg::Type(t) => crate::frontend::pretty::print_type(t).replace(' ', ""),
        TemplateArg::Value(e) => match const_eval(e) {
            Ok(v) => v.to_string(),
            Err(_) => crate::frontend::pretty::print_expr(e),
        },
    }
}

/// Functions and classes reachable from `main` and global initializers.
fn reachable(decls: &[Decl], syms: &SymbolTable) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut bodies: HashMap<String, &FunctionDecl> = HashMap::new();
    let mut global_roots: Vec<&VarDecl> = Vec::new();
    for d in decls {
        match d {
            Decl::Function(f) => {
                if let Some(m) = &f.mangled {
                    bodies.insert(m.clone(), f);
                }
            }
            Decl::Class(c) => {
                for m in &c.members {
                    if let Member::Method(f) = m {
                        if let Some(n) = &f.mangled {
                            bodies.insert(n.clone(), f);
                        }
                    }
                }
            }
            Decl::Vars(vs) => global_roots.extend(vs.iter()),
            _ => {}
        }
    }
    let mut r = Reach {
        fns: BTreeSet::new(),
        classes: BTreeSet::new(),
        fn_work: vec!["main".to_string()],
        class_work: vec![],
    };
    for v in global_roots {
        r.var(v);
    }
    loop {
        if let Some(f) = r.fn_work.pop() {
            if !r.fns.insert(f.clone()) {
                continue;
            }
            if let Some(info) = syms.functions.get(&f) {
                for t in info.params.iter().chain(std::iter::once(&info.ret)) {
                    r.ty(t);
                }
                if let Some(c) = &info.class {
                    r.class_work.push(c.clone());
                }
            }
            if let Some(body) = bodies.get(&f) {
                r.function(body);
            }
        } else if let Some(c) = r.class_work.pop() {
            if !r.classes.insert(c.clone()) {
                continue;
            }
            if let Some(info) = syms.classes.get(&c) {
                for b in &info.bases {
                    r.class_work.push(b.name.clone());
                }
                for f in &info.fields {
                    r.ty(&f.ty);
                }
                r.fn_work.extend(info.methods.iter().cloned());
            }
        } else {
            break;
        }
    }
    (r.fns, r.classes)
}

struct Reach {
    fns: BTreeSet<String>,
    classes: BTreeSet<String>,
    fn_work: Vec<String>,
    class_work: Vec<String>,
}

impl Reach {
    fn ty(&mut self, t: &Type) {
        match t {
            Type::Class(c) => self.class_work.push(c.clone()),
            Type::Pointer(i) | Type::Array(i, _) | Type::Reference(i) => self.ty(i),
            _ => {}
        }
    }

    fn var(&mut self, v: &VarDecl) {
        if let Some(t) = &v.sem_ty {
            self.ty(t);
        }
        if let Some(c) = &v.ctor {
            self.fn_work.push(c.clone());
        }
        match &v.init {
            None => {}
            Some(Init::Expr(e)) => self.expr(e),
            Some(Init::Ctor(es)) | Some(Init::List(es)) => es.iter().for_each(|e| self.expr(e)),
        }
    }

    fn function(&mut self, f: &FunctionDecl) {
        for i in &f.inits {
            if let Some(c) = &i.ctor {
                self.fn_work.push(c.clone());
            }
            i.args.iter().for_each(|e| self.expr(e));
        }
        if let Some(b) = &f.body {
            b.iter().for_each(|s| self.stmt(s));
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Expr(e) | StmtKind::Assume(e) => self.expr(e),
            StmtKind::Assert { cond, .. } => self.expr(cond),
            StmtKind::Block(b) => b.iter().for_each(|s| self.stmt(s)),
            StmtKind::Decl(vs) => vs.iter().for_each(|v| self.var(v)),
            StmtKind::If(c, t, e) => {
                self.expr(c);
                self.stmt(t);
                if let Some(e) = e {
                    self.stmt(e);
                }
            }
            StmtKind::While(c, b) | StmtKind::DoWhile(b, c) => {
                self.expr(c);
                self.stmt(b);
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i);
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                if let Some(s) = step {
                    self.expr(s);
                }
                self.stmt(body);
            }
            StmtKind::Return(Some(e)) => self.expr(e),
            _ => {}
        }
    }

    fn expr(&mut self, e: &Expr) {
        if let Some(t) = &e.ty {
            self.ty(t);
        }
        match &e.kind {
            ExprKind::Unary(_, a) => self.expr(a),
            ExprKind::Binary(_, a, b) | ExprKind::Assign(_, a, b) | ExprKind::Index(a, b) => {
                self.expr(a);
                self.expr(b);
            }
            ExprKind::Member { base, .. } => self.expr(base),
            ExprKind::Call { callee, args, res } => {
                match res {
                    Some(CallRes::Function(f)) => self.fn_work.push(f.clone()),
                    Some(CallRes::Method { mangled, .. }) => self.fn_work.push(mangled.clone()),
                    _ => {}
                }
                self.expr(callee);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::New {
                args,
                array_len,
                ctor,
                ..
            } => {
                if let Some(c) = ctor {
                    self.fn_work.push(c.clone());
                }
                args.iter().for_each(|a| self.expr(a));
                if let Some(n) = array_len {
                    self.expr(n);
                }
            }
            ExprKind::Delete { expr, .. } => self.expr(expr),
            ExprKind::Cast { expr, .. } => self.expr(expr),
            _ => {}
        }
    }
}
