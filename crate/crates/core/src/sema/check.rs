//! Name resolution and type checking.
//!
//! Templates are instantiated on demand while checking: each instance is
//! appended to the translation unit as an ordinary declaration and checked
//! in turn. Friend functions defined inside a class are moved to file
//! scope when the class is declared.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::symbols::*;
use super::templates::*;
use super::types::{mangle, Type};
use crate::diag::Diagnostic;
use crate::frontend::ast::*;

type DResult<T> = Result<T, Diagnostic>;

/// A checked translation unit.
#[derive(Clone, Debug)]
pub struct Program {
    pub ast: Ast,
    pub symbols: SymbolTable,
}

const NONDET_INT: &[&str] = &["nondet_int", "__VERIFIER_nondet_int"];
const NONDET_BOOL: &[&str] = &["nondet_bool", "__VERIFIER_nondet_bool"];

pub fn typecheck(ast: Ast) -> DResult<Program> {
    let mut ck = Checker::default();
    let file_loc = ast
        .decls
        .first()
        .map(|d| SourceLoc::new(d.loc().file.clone(), 1, 1))
        .unwrap_or_else(SourceLoc::builtin);
    let mut decls = ast.decls;
    let mut depths = vec![0u32; decls.len()];
    for i in 0..decls.len() {
        let mut d = std::mem::replace(&mut decls[i], placeholder());
        let r = ck.declare_decl(&mut d);
        decls[i] = d;
        r?;
    }
    let mut i = 0;
    loop {
        for (d, depth) in ck.new_decls.drain(..) {
            decls.push(d);
            depths.push(depth);
        }
        if i >= decls.len() {
            break;
        }
        let mut d = std::mem::replace(&mut decls[i], placeholder());
        ck.depth = depths[i];
        let r = ck.check_decl(&mut d);
        decls[i] = d;
        r?;
        i += 1;
    }
    match ck.syms.functions.get("main") {
        Some(f) if f.has_body => {
            if f.ret != Type::Int || !f.params.is_empty() {
                return Err(Diagnostic::error(f.loc.clone(), "`main` must be declared as `int main()`"));
            }
        }
        _ => return Err(Diagnostic::error(file_loc, "no definition of `main`")),
    }
    Ok(Program {
        ast: Ast { decls },
        symbols: ck.syms,
    })
}

fn placeholder() -> Decl {
    Decl::Vars(vec![])
}

struct ClassTemplate {
    params: Vec<TemplateParam>,
    decl: ClassDecl,
    specs: Vec<(Vec<TArg>, ClassDecl)>,
}

#[derive(Clone)]
struct FnTemplate {
    params: Vec<TemplateParam>,
    decl: FunctionDecl,
}

#[derive(Default)]
struct Checker {
    syms: SymbolTable,
    typedefs: HashMap<String, Type>,
    forward: HashSet<String>,
    class_templates: HashMap<String, ClassTemplate>,
    fn_templates: HashMap<String, Vec<FnTemplate>>,
    injected_templates: HashMap<String, Vec<FnTemplate>>,
    fn_specs: HashMap<(String, Vec<TArg>), String>,
    fn_instances: HashMap<(String, usize, bool, Vec<TArg>), String>,
    class_instances: HashMap<String, (String, Vec<TArg>)>,
    in_progress: HashSet<String>,
    free_fns: BTreeMap<String, Vec<String>>,
    new_decls: Vec<(Decl, u32)>,
    depth: u32,
}

struct FnCtx {
    class: Option<String>,
    ret: Type,
    scopes: Vec<HashMap<String, Type>>,
    loops: u32,
}

impl FnCtx {
    fn lookup(&self, name: &str) -> Option<&Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }
}

enum MemberLookup {
    Field { owner: String, ty: Type },
    Methods { owner: String, methods: Vec<String> },
}

fn err<T>(loc: &SourceLoc, msg: impl Into<String>) -> DResult<T> {
    Err(Diagnostic::error(loc.clone(), msg))
}

fn is_lvalue(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Ident { res, .. } => matches!(res, Some(Res::Local) | Some(Res::Global)),
        ExprKind::Unary(UnOp::Deref, _) | ExprKind::Index(..) => true,
        ExprKind::Member { base, arrow, .. } => *arrow || is_lvalue(base),
        ExprKind::Cast { expr, .. } => matches!(e.ty, Some(Type::Class(_))) && is_lvalue(expr),
        _ => false,
    }
}

fn type_list(ts: &[Type]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

impl Checker {
    // ---- declarations ----

    fn push_decl(&mut self, d: Decl) {
        self.new_decls.push((d, self.depth));
    }

    fn declare_decl(&mut self, d: &mut Decl) -> DResult<()> {
        match d {
            Decl::Class(c) => {
                let name = c.name.clone();
                if self.class_templates.contains_key(&name) {
                    return err(&c.loc, format!("`{name}` is already declared as a class template"));
                }
                self.declare_class(c, name, false)
            }
            Decl::Function(f) => self.declare_function(f, None, false).map(|_| ()),
            Decl::Vars(vs) => {
                for v in vs.iter_mut() {
                    let t = self.resolve_type(&v.ty, None, &v.loc)?;
                    self.check_object_type(&t, &v.loc)?;
                    if self.syms.globals.contains_key(&v.name) {
                        return err(&v.loc, format!("redefinition of `{}`", v.name));
                    }
                    self.syms.globals.insert(
                        v.name.clone(),
                        GlobalInfo {
                            name: v.name.clone(),
                            ty: t.clone(),
                            loc: v.loc.clone(),
                        },
                    );
                    v.sem_ty = Some(t);
                }
                Ok(())
            }
            Decl::Typedef(t) => {
                let ty = self.resolve_type(&t.ty, None, &t.loc)?;
                if let Some(prev) = self.typedefs.get(&t.name) {
                    if *prev != ty {
                        return err(&t.loc, format!("conflicting typedef `{}`", t.name));
                    }
                }
                self.typedefs.insert(t.name.clone(), ty);
                Ok(())
            }
            Decl::Template(t) => self.declare_template(t),
        }
    }

    fn declare_template(&mut self, t: &mut TemplateDecl) -> DResult<()> {
        match t.body.as_mut() {
            Decl::Class(c) if !t.params.is_empty() => {
                if self.syms.classes.contains_key(&c.name) || self.class_templates.contains_key(&c.name) {
                    return err(&c.loc, format!("redefinition of `{}`", c.name));
                }
                self.class_templates.insert(
                    c.name.clone(),
                    ClassTemplate {
                        params: t.params.clone(),
                        decl: c.clone(),
                        specs: vec![],
                    },
                );
                Ok(())
            }
            Decl::Class(c) => {
                let Some(args) = c.spec_args.clone() else {
                    return err(&c.loc, "explicit specialization must name template arguments");
                };
                let Some(params) = self.class_templates.get(&c.name).map(|t| t.params.clone()) else {
                    return err(&c.loc, format!("`{}` is not a class template", c.name));
                };
                let vals = self.eval_targs(&c.name, &params, &args, &c.loc, None)?;
                let inst = instance_name(&c.name, &vals);
                if self.syms.classes.contains_key(&inst) {
                    return err(&c.loc, format!("specialization of `{inst}` after instantiation"));
                }
                let tmpl = self.class_templates.get_mut(&c.name).unwrap();
                if tmpl.specs.iter().any(|(a, _)| *a == vals) {
                    return err(&c.loc, format!("redefinition of `{inst}`"));
                }
                tmpl.specs.push((vals, c.clone()));
                Ok(())
            }
            Decl::Function(f) if !t.params.is_empty() => {
                self.fn_templates.entry(f.name.clone()).or_default().push(FnTemplate {
                    params: t.params.clone(),
                    decl: f.clone(),
                });
                Ok(())
            }
            Decl::Function(f) => {
                let Some(args) = f.template_args.clone() else {
                    return err(&f.loc, "explicit specialization must name template arguments");
                };
                let Some(primary) = self.fn_templates.get(&f.name).and_then(|v| v.first()).cloned() else {
                    return err(&f.loc, format!("`{}` is not a function template", f.name));
                };
                let vals = self.eval_targs(&f.name, &primary.params, &args, &f.loc, None)?;
                let m = self.declare_function(f, Some(instance_name(&f.name, &vals)), true)?;
                self.fn_specs.insert((f.name.clone(), vals), m);
                Ok(())
            }
            other => err(other.loc(), "only classes and functions can be templates"),
        }
    }

    /// Registers a class definition under `name` (the instance name for
    /// template instances).
    fn declare_class(&mut self, c: &mut ClassDecl, name: String, from_template: bool) -> DResult<()> {
        if !c.is_definition {
            self.forward.insert(name);
            return Ok(());
        }
        if self.syms.classes.contains_key(&name) {
            return err(&c.loc, format!("redefinition of class `{name}`"));
        }
        self.syms.classes.insert(
            name.clone(),
            ClassInfo {
                name: name.clone(),
                bases: vec![],
                fields: vec![],
                methods: vec![],
                typedefs: BTreeMap::new(),
                complete: false,
                is_abstract: false,
                from_template,
                loc: c.loc.clone(),
            },
        );
        self.forward.insert(name.clone());
        let mut bases = Vec::new();
        for b in &c.bases {
            let t = self.resolve_type(&b.ty, None, &b.loc)?;
            let Type::Class(bn) = t else {
                return err(&b.loc, format!("base `{t}` is not a class"));
            };
            self.require_complete(&bn, &b.loc)?;
            if bases.iter().any(|x: &BaseInfo| x.name == bn) {
                return err(&b.loc, format!("duplicate base class `{bn}`"));
            }
            bases.push(BaseInfo {
                name: bn,
                is_virtual: b.is_virtual,
                loc: b.loc.clone(),
            });
        }
        self.syms.classes.get_mut(&name).unwrap().bases = bases;

        let mut members = std::mem::take(&mut c.members);
        let mut kept = Vec::new();
        let mut method_decls = Vec::new();
        let mut friends = Vec::new();
        for m in members.drain(..) {
            match m {
                Member::Typedef(t) => {
                    let ty = self.resolve_type(&t.ty, Some(&name), &t.loc)?;
                    self.syms.classes.get_mut(&name).unwrap().typedefs.insert(t.name.clone(), ty);
                    kept.push(Member::Typedef(t));
                }
                Member::Field(mut v) => {
                    if v.init.is_some() {
                        return err(&v.loc, "default member initializers are not supported");
                    }
                    let t = self.resolve_type(&v.ty, Some(&name), &v.loc)?;
                    self.check_object_type(&t, &v.loc)?;
                    let info = self.syms.classes.get_mut(&name).unwrap();
                    if info.fields.iter().any(|f| f.name == v.name) {
                        return err(&v.loc, format!("duplicate member `{}`", v.name));
                    }
                    info.fields.push(FieldInfo {
                        name: v.name.clone(),
                        ty: t.clone(),
                        loc: v.loc.clone(),
                    });
                    v.sem_ty = Some(t);
                    kept.push(Member::Field(v));
                }
                Member::Method(f) => {
                    method_decls.push(kept.len());
                    kept.push(Member::Method(f));
                }
                Member::Friend(d) => match *d {
                    Decl::Function(f) if f.body.is_some() => friends.push(f),
                    Decl::Template(t) => {
                        if let Decl::Function(f) = t.body.as_ref() {
                            self.injected_templates.entry(f.name.clone()).or_default().push(FnTemplate {
                                params: t.params.clone(),
                                decl: f.clone(),
                            });
                        }
                        kept.push(Member::Friend(Box::new(Decl::Template(t))));
                    }
                    other => kept.push(Member::Friend(Box::new(other))),
                },
            }
        }
        for &i in &method_decls {
            if let Member::Method(f) = &mut kept[i] {
                self.declare_method(f, &name, from_template)?;
            }
        }
        c.members = kept;
        self.declare_implicit_members(&name, &c.loc, from_template)?;
        self.resolve_overrides(&name, &*c)?;
        let is_abstract = self.compute_abstract(&name);
        let info = self.syms.classes.get_mut(&name).unwrap();
        info.is_abstract = is_abstract;
        info.complete = true;
        self.syms.class_order.push(name);
        for mut f in friends {
            self.declare_function(&mut f, None, from_template)?;
            self.push_decl(Decl::Function(f));
        }
        Ok(())
    }

    fn check_object_type(&self, t: &Type, loc: &SourceLoc) -> DResult<()> {
        match t {
            Type::Void => err(loc, "variable has type `void`"),
            Type::Reference(_) => err(loc, "reference variables are not supported"),
            Type::Class(c) => self.require_complete(c, loc),
            Type::Array(e, _) => self.check_object_type(e, loc),
            _ => Ok(()),
        }
    }

    fn require_complete(&self, class: &str, loc: &SourceLoc) -> DResult<()> {
        if self.syms.classes.get(class).is_some_and(|c| c.complete) {
            return Ok(());
        }
        if self.in_progress.contains(class) {
            return err(
                loc,
                format!("circular dependency: instantiating `{class}` requires its own definition"),
            );
        }
        match self.syms.classes.get(class) {
            Some(c) if c.complete => Ok(()),
            _ => err(loc, format!("incomplete type `{class}`")),
        }
    }

    fn param_types(&mut self, f: &FunctionDecl, class: Option<&str>) -> DResult<Vec<Type>> {
        let mut out = Vec::new();
        for p in &f.params {
            let t = self.resolve_type(&p.ty, class, &p.loc)?;
            let t = match t {
                Type::Void => return err(&p.loc, "parameter has type `void`"),
                Type::Array(e, _) => Type::Pointer(e),
                Type::Reference(inner) => {
                    if let Type::Class(c) = inner.as_ref() {
                        self.require_complete(c, &p.loc)?;
                    }
                    Type::Reference(inner)
                }
                Type::Class(c) => {
                    self.require_complete(&c, &p.loc)?;
                    Type::Class(c)
                }
                t => t,
            };
            out.push(t);
        }
        Ok(out)
    }

    fn return_type(&mut self, f: &FunctionDecl, class: Option<&str>) -> DResult<Type> {
        let t = self.resolve_type(&f.ret, class, &f.loc)?;
        match t {
            Type::Class(_) => err(&f.loc, "returning class objects by value is not supported"),
            Type::Reference(_) => err(&f.loc, "returning references is not supported"),
            Type::Array(..) => err(&f.loc, "functions cannot return arrays"),
            t => Ok(t),
        }
    }

    /// Declares a free function, or attaches an out-of-line member
    /// definition to its class.
    fn declare_function(
        &mut self,
        f: &mut FunctionDecl,
        display: Option<String>,
        from_template: bool,
    ) -> DResult<String> {
        if let Some(q) = f.qualifier.clone() {
            let class = match self.typedefs.get(&q) {
                Some(Type::Class(c)) => c.clone(),
                _ => q.clone(),
            };
            if !self.syms.classes.get(&class).is_some_and(|c| c.complete) {
                return err(&f.loc, format!("`{q}` is not a defined class"));
            }
            let params = self.param_types(f, Some(&class))?;
            let name = if f.flags.is_ctor {
                class.clone()
            } else if f.flags.is_dtor {
                format!("~{class}")
            } else {
                f.name.clone()
            };
            let found = self
                .syms
                .methods_named(&class, &name)
                .into_iter()
                .find(|m| m.params == params && m.synthesized.is_none())
                .map(|m| m.mangled.clone());
            let Some(m) = found else {
                return err(
                    &f.loc,
                    format!("no member function `{name}({})` declared in `{class}`", type_list(&params)),
                );
            };
            if !f.flags.is_ctor && !f.flags.is_dtor {
                let ret = self.return_type(f, Some(&class))?;
                if ret != self.syms.function(&m).ret {
                    return err(&f.loc, format!("return type of `{m}` does not match its declaration"));
                }
            }
            let info = self.syms.functions.get_mut(&m).unwrap();
            if f.body.is_some() {
                if info.has_body {
                    return err(&f.loc, format!("redefinition of `{}`", info.display));
                }
                info.has_body = true;
            }
            f.mangled = Some(m.clone());
            return Ok(m);
        }
        let params = self.param_types(f, None)?;
        let ret = self.return_type(f, None)?;
        let display = display.unwrap_or_else(|| f.name.clone());
        let mangled = if display == "main" {
            "main".to_string()
        } else {
            mangle(&display, &params)
        };
        if let Some(prev) = self.syms.functions.get_mut(&mangled) {
            if prev.ret != ret {
                return err(&f.loc, format!("conflicting declaration of `{display}`"));
            }
            if f.body.is_some() {
                if prev.has_body {
                    return err(&f.loc, format!("redefinition of `{display}`"));
                }
                prev.has_body = true;
                prev.loc = f.loc.clone();
            }
        } else {
            self.syms.functions.insert(
                mangled.clone(),
                FunctionInfo {
                    mangled: mangled.clone(),
                    name: f.name.clone(),
                    display: display.clone(),
                    class: None,
                    kind: FnKind::Free,
                    params,
                    ret,
                    is_virtual: false,
                    is_pure: false,
                    synthesized: None,
                    has_body: f.body.is_some(),
                    overrides: vec![],
                    from_template,
                    loc: f.loc.clone(),
                },
            );
            if f.template_args.is_none() {
                self.free_fns.entry(f.name.clone()).or_default().push(mangled.clone());
            }
        }
        f.mangled = Some(mangled.clone());
        Ok(mangled)
    }

    fn declare_method(&mut self, f: &mut FunctionDecl, class: &str, from_template: bool) -> DResult<()> {
        let params = self.param_types(f, Some(class))?;
        let (kind, name, ret) = if f.flags.is_ctor {
            (FnKind::Ctor, class.to_string(), Type::Void)
        } else if f.flags.is_dtor {
            if !params.is_empty() {
                return err(&f.loc, "destructors take no parameters");
            }
            (FnKind::Dtor, format!("~{class}"), Type::Void)
        } else {
            (FnKind::Method, f.name.clone(), self.return_type(f, Some(class))?)
        };
        if f.flags.is_pure && !f.flags.is_virtual {
            return err(&f.loc, format!("pure specifier on non-virtual method `{name}`"));
        }
        let mut full = vec![Type::ptr(Type::class(class))];
        full.extend(params.iter().cloned());
        let mangled = mangle(&format!("{class}::{name}"), &full);
        if self.syms.functions.contains_key(&mangled) {
            return err(&f.loc, format!("redeclaration of `{class}::{name}`"));
        }
        self.syms.functions.insert(
            mangled.clone(),
            FunctionInfo {
                mangled: mangled.clone(),
                name,
                display: format!("{class}::{}", if f.flags.is_ctor { class.to_string() } else if f.flags.is_dtor { format!("~{class}") } else { f.name.clone() }),
                class: Some(class.to_string()),
                kind,
                params,
                ret,
                is_virtual: f.flags.is_virtual,
                is_pure: f.flags.is_pure,
                synthesized: None,
                has_body: f.body.is_some(),
                overrides: vec![],
                from_template,
                loc: f.loc.clone(),
            },
        );
        self.syms.classes.get_mut(class).unwrap().methods.push(mangled.clone());
        f.mangled = Some(mangled);
        Ok(())
    }

    fn add_synthesized(&mut self, class: &str, synth: Synth, loc: &SourceLoc, from_template: bool) {
        let this = Type::ptr(Type::class(class));
        let (kind, name, params) = match synth {
            Synth::DefaultCtor => (FnKind::Ctor, class.to_string(), vec![]),
            Synth::CopyCtor => (
                FnKind::Ctor,
                class.to_string(),
                vec![Type::Reference(Box::new(Type::class(class)))],
            ),
            Synth::Dtor => (FnKind::Dtor, format!("~{class}"), vec![]),
        };
        let mut full = vec![this];
        full.extend(params.iter().cloned());
        let mangled = mangle(&format!("{class}::{name}"), &full);
        self.syms.functions.insert(
            mangled.clone(),
            FunctionInfo {
                mangled: mangled.clone(),
                display: format!("{class}::{name}"),
                name,
                class: Some(class.to_string()),
                kind,
                params,
                ret: Type::Void,
                is_virtual: false,
                is_pure: false,
                synthesized: Some(synth),
                has_body: false,
                overrides: vec![],
                from_template,
                loc: loc.clone(),
            },
        );
        self.syms.classes.get_mut(class).unwrap().methods.push(mangled);
    }

    /// Subobjects that are constructed and destroyed with the class:
    /// bases and class-typed fields (including array elements).
    fn member_classes(&self, class: &str) -> Vec<String> {
        let info = self.syms.class(class);
        let mut out: Vec<String> = info.bases.iter().map(|b| b.name.clone()).collect();
        for f in &info.fields {
            let mut t = &f.ty;
            while let Type::Array(e, _) = t {
                t = e;
            }
            if let Type::Class(c) = t {
                out.push(c.clone());
            }
        }
        out
    }

    fn declare_implicit_members(&mut self, class: &str, loc: &SourceLoc, from_template: bool) -> DResult<()> {
        let subs = self.member_classes(class);
        // Virtual bases are constructed by the most-derived class.
        let mut needs_default = subs.clone();
        for b in self.syms.all_bases(class) {
            if !needs_default.contains(&b) {
                needs_default.push(b);
            }
        }
        let ctors = self.syms.ctors(class);
        if ctors.is_empty() && needs_default.iter().all(|c| self.syms.default_ctor(c).is_some()) {
            self.add_synthesized(class, Synth::DefaultCtor, loc, from_template);
        }
        if self.syms.copy_ctor(class).is_none() {
            self.add_synthesized(class, Synth::CopyCtor, loc, from_template);
        }
        if self.syms.dtor(class).is_none() {
            let base_virtual = self
                .syms
                .class(class)
                .bases
                .iter()
                .any(|b| self.syms.dtor(&b.name).is_some_and(|d| d.is_virtual));
            if base_virtual || subs.iter().any(|c| self.syms.dtor(c).is_some()) {
                self.add_synthesized(class, Synth::Dtor, loc, from_template);
            }
        }
        Ok(())
    }

    fn resolve_overrides(&mut self, class: &str, decl: &ClassDecl) -> DResult<()> {
        let bases = self.syms.all_bases(class);
        let methods = self.syms.class(class).methods.clone();
        for m in methods {
            let f = self.syms.function(&m).clone();
            if f.kind == FnKind::Ctor {
                continue;
            }
            let key = signature_key(&f);
            let mut overrides = Vec::new();
            for b in &bases {
                for bm in &self.syms.class(b).methods {
                    let bf = self.syms.function(bm);
                    if bf.is_virtual && signature_key(bf) == key {
                        if bf.ret != f.ret {
                            return err(
                                &f.loc,
                                format!("return type of `{}` differs from overridden `{}`", f.display, bf.display),
                            );
                        }
                        overrides.push(bm.clone());
                    }
                }
            }
            let marked_override = decl
                .members
                .iter()
                .any(|mm| matches!(mm, Member::Method(fd) if fd.mangled.as_deref() == Some(m.as_str()) && fd.flags.is_override));
            if marked_override && overrides.is_empty() {
                return err(
                    &f.loc,
                    format!("`{}` marked `override` but does not override any virtual method", f.display),
                );
            }
            let info = self.syms.functions.get_mut(&m).unwrap();
            if !overrides.is_empty() {
                info.is_virtual = true;
            }
            info.overrides = overrides;
        }
        Ok(())
    }

    fn compute_abstract(&self, class: &str) -> bool {
        let mut order = vec![class.to_string()];
        order.extend(self.syms.all_bases(class));
        let mut seen = HashSet::new();
        for c in &order {
            for m in &self.syms.class(c).methods {
                let f = self.syms.function(m);
                if !f.is_virtual {
                    continue;
                }
                if seen.insert(signature_key(f)) && f.is_pure {
                    return true;
                }
            }
        }
        false
    }

    // ---- types and templates ----

    fn resolve_type(&mut self, te: &TypeExpr, class: Option<&str>, loc: &SourceLoc) -> DResult<Type> {
        Ok(match te {
            TypeExpr::Int => Type::Int,
            TypeExpr::Bool => Type::Bool,
            TypeExpr::Void => Type::Void,
            TypeExpr::Const(i) => self.resolve_type(i, class, loc)?,
            TypeExpr::Pointer(i) => match self.resolve_type(i, class, loc)? {
                Type::Reference(_) => return err(loc, "pointers to references are not supported"),
                t => Type::ptr(t),
            },
            TypeExpr::Reference(i) => match self.resolve_type(i, class, loc)? {
                Type::Reference(_) => return err(loc, "references to references are not allowed"),
                Type::Void => return err(loc, "references to `void` are not allowed"),
                t => Type::Reference(Box::new(t)),
            },
            TypeExpr::Array(i, n) => {
                let t = self.resolve_type(i, class, loc)?;
                let n = const_eval(n)?;
                if n < 1 {
                    return err(loc, format!("array length {n} is not positive"));
                }
                Type::Array(Box::new(t), n as u32)
            }
            TypeExpr::Named { name, args: Some(args) } => {
                let inst = self.instantiate_class(name, args, loc, class)?;
                Type::Class(inst)
            }
            TypeExpr::Named { name, args: None } => {
                if let Some(t) = self.class_typedef(class, name) {
                    return Ok(t);
                }
                if let Some(t) = self.typedefs.get(name) {
                    return Ok(t.clone());
                }
                if self.syms.classes.contains_key(name) || self.forward.contains(name) {
                    return Ok(Type::Class(name.clone()));
                }
                if self.class_templates.contains_key(name) {
                    return err(loc, format!("missing template arguments for `{name}`"));
                }
                return err(loc, format!("unknown type `{name}`"));
            }
        })
    }

    fn class_typedef(&self, class: Option<&str>, name: &str) -> Option<Type> {
        let class = class?;
        let info = self.syms.classes.get(class)?;
        if let Some(t) = info.typedefs.get(name) {
            return Some(t.clone());
        }
        for b in &info.bases {
            if let Some(t) = self.class_typedef(Some(&b.name), name) {
                return Some(t);
            }
        }
        None
    }

    fn eval_targs(
        &mut self,
        name: &str,
        params: &[TemplateParam],
        args: &[TemplateArg],
        loc: &SourceLoc,
        class: Option<&str>,
    ) -> DResult<Vec<TArg>> {
        if args.len() > params.len() {
            return err(loc, format!("too many template arguments for `{name}`"));
        }
        let mut vals = Vec::new();
        for (i, p) in params.iter().enumerate() {
            let arg = match args.get(i) {
                Some(a) => a.clone(),
                None => match &p.default {
                    Some(d) => {
                        let mut d = d.clone();
                        let s = Subst::bind(&params[..i], &vals);
                        match &mut d {
                            TemplateArg::Type(t) => s.ty(t),
                            TemplateArg::Value(e) => s.expr(e),
                        }
                        d
                    }
                    None => {
                        return err(loc, format!("missing template argument `{}` for `{name}`", p.name))
                    }
                },
            };
            vals.push(self.eval_targ(p, &arg, loc, class)?);
        }
        Ok(vals)
    }

    fn eval_targ(
        &mut self,
        p: &TemplateParam,
        a: &TemplateArg,
        loc: &SourceLoc,
        class: Option<&str>,
    ) -> DResult<TArg> {
        match (p.kind, a) {
            (TemplateParamKind::Type, TemplateArg::Type(t)) => {
                let t = self.resolve_type(t, class, loc)?;
                if matches!(t, Type::Reference(_) | Type::Void) {
                    return err(loc, format!("`{t}` is not a valid template argument"));
                }
                Ok(TArg::Type(t))
            }
            (TemplateParamKind::Int, TemplateArg::Value(e)) => Ok(TArg::Int(const_eval(e)?)),
            (TemplateParamKind::Type, TemplateArg::Value(_)) => {
                err(loc, format!("template parameter `{}` expects a type", p.name))
            }
            (TemplateParamKind::Int, TemplateArg::Type(_)) => {
                err(loc, format!("template parameter `{}` expects a constant", p.name))
            }
        }
    }

    fn enter_instance(&mut self, inst: &str, loc: &SourceLoc) -> DResult<u32> {
        let d = self.depth + 1;
        if d > MAX_DEPTH {
            return err(
                loc,
                format!("template instantiation depth exceeds {MAX_DEPTH} while instantiating `{inst}`"),
            );
        }
        Ok(std::mem::replace(&mut self.depth, d))
    }

    fn instantiate_class(
        &mut self,
        name: &str,
        args: &[TemplateArg],
        loc: &SourceLoc,
        class: Option<&str>,
    ) -> DResult<String> {
        let Some(params) = self.class_templates.get(name).map(|t| t.params.clone()) else {
            return err(loc, format!("`{name}` is not a class template"));
        };
        let vals = self.eval_targs(name, &params, args, loc, class)?;
        let inst = instance_name(name, &vals);
        if self.syms.classes.contains_key(&inst) || self.in_progress.contains(&inst) {
            return Ok(inst);
        }
        let tmpl = &self.class_templates[name];
        let syntax: Vec<TemplateArg> = vals.iter().map(|v| v.to_syntax()).collect();
        let mut decl = match tmpl.specs.iter().find(|(a, _)| *a == vals) {
            Some((_, spec)) => {
                let mut d = spec.clone();
                let s = Subst {
                    injected: Some((name.to_string(), syntax.clone())),
                    ..Default::default()
                };
                s.class(&mut d);
                d
            }
            None => {
                let mut d = tmpl.decl.clone();
                let mut s = Subst::bind(&params, &vals);
                s.injected = Some((name.to_string(), syntax.clone()));
                s.class(&mut d);
                d
            }
        };
        decl.spec_args = Some(syntax);
        let saved = self.enter_instance(&inst, loc)?;
        self.in_progress.insert(inst.clone());
        let r = self.declare_class(&mut decl, inst.clone(), true);
        self.in_progress.remove(&inst);
        if r.is_ok() {
            self.class_instances.insert(inst.clone(), (name.to_string(), vals));
            self.push_decl(Decl::Class(decl));
        }
        self.depth = saved;
        r.map(|_| inst)
    }

    fn deduce(
        &self,
        pte: &TypeExpr,
        at: &Type,
        params: &[TemplateParam],
        bound: &mut HashMap<String, TArg>,
    ) {
        match (pte, at) {
            (TypeExpr::Const(i) | TypeExpr::Reference(i), _) => self.deduce(i, at, params, bound),
            (TypeExpr::Pointer(i), Type::Pointer(a)) => self.deduce(i, a, params, bound),
            (TypeExpr::Named { name, args: None }, _)
                if params.iter().any(|p| p.name == *name && p.kind == TemplateParamKind::Type) =>
            {
                bound.entry(name.clone()).or_insert(TArg::Type(at.clone()));
            }
            (TypeExpr::Named { name, args: Some(targs) }, Type::Class(c)) => {
                if let Some((tname, vals)) = self.class_instances.get(c) {
                    if tname != name {
                        return;
                    }
                    for (ta, v) in targs.iter().zip(vals) {
                        match (ta, v) {
                            (TemplateArg::Type(te), TArg::Type(t)) => self.deduce(te, t, params, bound),
                            (TemplateArg::Value(e), TArg::Int(n)) => {
                                if let ExprKind::Ident { name, args: None, .. } = &e.kind {
                                    if params.iter().any(|p| p.name == *name) {
                                        bound.entry(name.clone()).or_insert(TArg::Int(*n));
                                    }
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            _ => {}
        }
    }

    /// Instantiates the function template `name` for a call; returns the
    /// mangled instance name, or `None` when no template applies.
    fn instantiate_fn(
        &mut self,
        name: &str,
        explicit: &[TemplateArg],
        args: &[Expr],
        loc: &SourceLoc,
        class: Option<&str>,
    ) -> DResult<Option<String>> {
        for injected in [false, true] {
            let cands = if injected {
                self.injected_templates.get(name).cloned().unwrap_or_default()
            } else {
                self.fn_templates.get(name).cloned().unwrap_or_default()
            };
            let mut viable = Vec::new();
            for (idx, t) in cands.iter().enumerate() {
                if explicit.len() > t.params.len() || t.decl.params.len() != args.len() {
                    continue;
                }
                let mut bound = HashMap::new();
                for (p, a) in t.params.iter().zip(explicit) {
                    bound.insert(p.name.clone(), self.eval_targ(p, a, loc, class)?);
                }
                for (p, a) in t.decl.params.iter().zip(args) {
                    self.deduce(&p.ty, a.ty(), &t.params, &mut bound);
                }
                let mut vals = Vec::new();
                let mut ok = true;
                for (i, p) in t.params.iter().enumerate() {
                    if let Some(v) = bound.get(&p.name) {
                        vals.push(v.clone());
                    } else if let Some(d) = &p.default {
                        let mut d = d.clone();
                        let s = Subst::bind(&t.params[..i], &vals);
                        match &mut d {
                            TemplateArg::Type(te) => s.ty(te),
                            TemplateArg::Value(e) => s.expr(e),
                        }
                        vals.push(self.eval_targ(p, &d, loc, class)?);
                    } else {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    viable.push((idx, vals));
                }
            }
            if viable.is_empty() {
                continue;
            }
            if viable.len() > 1 {
                return err(loc, format!("ambiguous call to function template `{name}`"));
            }
            let (idx, vals) = viable.pop().unwrap();
            if let Some(m) = self.fn_specs.get(&(name.to_string(), vals.clone())) {
                return Ok(Some(m.clone()));
            }
            let key = (name.to_string(), idx, injected, vals.clone());
            if let Some(m) = self.fn_instances.get(&key) {
                return Ok(Some(m.clone()));
            }
            let t = cands[idx].clone();
            let inst = instance_name(name, &vals);
            let mut decl = t.decl.clone();
            Subst::bind(&t.params, &vals).function(&mut decl);
            decl.template_args = Some(vals.iter().map(|v| v.to_syntax()).collect());
            let saved = self.enter_instance(&inst, loc)?;
            let r = self.declare_function(&mut decl, Some(inst), true);
            if r.is_ok() {
                self.push_decl(Decl::Function(decl));
            }
            self.depth = saved;
            let m = r?;
            self.fn_instances.insert(key, m.clone());
            return Ok(Some(m));
        }
        Ok(None)
    }

    // ---- bodies ----

    fn check_decl(&mut self, d: &mut Decl) -> DResult<()> {
        match d {
            Decl::Class(c) => {
                if !c.is_definition {
                    return Ok(());
                }
                let name = class_decl_name(c);
                for m in &mut c.members {
                    if let Member::Method(f) = m {
                        self.check_function(f, Some(&name))?;
                    }
                }
                Ok(())
            }
            Decl::Function(f) => {
                let class = f
                    .mangled
                    .as_ref()
                    .and_then(|m| self.syms.functions.get(m))
                    .and_then(|i| i.class.clone());
                self.check_function(f, class.as_deref())
            }
            Decl::Vars(vs) => {
                let mut cx = FnCtx {
                    class: None,
                    ret: Type::Void,
                    scopes: vec![],
                    loops: 0,
                };
                for v in vs.iter_mut() {
                    let t = v.sem_ty.clone().unwrap();
                    self.check_var_init(v, &t, &mut cx)?;
                }
                Ok(())
            }
            Decl::Typedef(_) => Ok(()),
            Decl::Template(t) => {
                if t.params.is_empty() {
                    if let Decl::Function(f) = t.body.as_mut() {
                        return self.check_function(f, None);
                    }
                }
                Ok(())
            }
        }
    }

    fn check_function(&mut self, f: &mut FunctionDecl, class: Option<&str>) -> DResult<()> {
        let Some(mangled) = f.mangled.clone() else {
            return Ok(());
        };
        if f.body.is_none() {
            if !f.inits.is_empty() {
                return err(&f.loc, "member initializers without a body");
            }
            return Ok(());
        }
        let info = self.syms.function(&mangled).clone();
        let mut scope = HashMap::new();
        for (p, t) in f.params.iter().zip(&info.params) {
            if let Some(n) = &p.name {
                if scope.insert(n.clone(), t.clone()).is_some() {
                    return err(&p.loc, format!("duplicate parameter `{n}`"));
                }
            }
        }
        let mut cx = FnCtx {
            class: class.map(|s| s.to_string()),
            ret: info.ret.clone(),
            scopes: vec![scope],
            loops: 0,
        };
        if !f.inits.is_empty() {
            if info.kind != FnKind::Ctor {
                return err(&f.loc, "only constructors take member initializers");
            }
            let class = class.unwrap().to_string();
            let mut inits = std::mem::take(&mut f.inits);
            let r = self.check_inits(&mut inits, &class, &mut cx);
            f.inits = inits;
            r?;
        }
        let mut body = f.body.take().unwrap();
        let r = (|| {
            for s in body.iter_mut() {
                self.check_stmt(s, &mut cx)?;
            }
            Ok(())
        })();
        f.body = Some(body);
        r
    }

    fn check_inits(&mut self, inits: &mut [MemberInit], class: &str, cx: &mut FnCtx) -> DResult<()> {
        let mut seen = HashSet::new();
        for init in inits.iter_mut() {
            for a in init.args.iter_mut() {
                self.expr(a, cx)?;
            }
            let field = match &init.target {
                TypeExpr::Named { name, args: None } => self
                    .syms
                    .class(class)
                    .fields
                    .iter()
                    .find(|f| f.name == *name)
                    .cloned(),
                _ => None,
            };
            let (key, ty) = match field {
                Some(f) => (f.name.clone(), f.ty.clone()),
                None => {
                    let t = self.resolve_type(&init.target, Some(class), &init.loc)?;
                    let Type::Class(b) = t else {
                        return err(&init.loc, "member initializer names neither a field nor a base");
                    };
                    if !self.syms.all_bases(class).contains(&b) {
                        return err(&init.loc, format!("`{b}` is not a base of `{class}`"));
                    }
                    let direct = self.syms.class(class).bases.iter().any(|x| x.name == b);
                    if !direct && !self.is_virtual_base(class, &b) {
                        return err(&init.loc, format!("`{b}` is not a direct or virtual base of `{class}`"));
                    }
                    init.target = TypeExpr::named(b.clone());
                    (b.clone(), Type::Class(b))
                }
            };
            if !seen.insert(key.clone()) {
                return err(&init.loc, format!("`{key}` initialized twice"));
            }
            match &ty {
                Type::Class(c) => {
                    let ctor = self.pick_ctor(c, &mut init.args, &init.loc)?;
                    init.ctor = Some(ctor);
                }
                Type::Array(..) => return err(&init.loc, "arrays cannot be initialized in member initializers"),
                t => match init.args.len() {
                    0 => {}
                    1 => self.coerce(&mut init.args[0], t, &init.loc)?,
                    _ => return err(&init.loc, format!("too many initializers for `{key}`")),
                },
            }
        }
        Ok(())
    }

    fn is_virtual_base(&self, class: &str, base: &str) -> bool {
        let mut todo = vec![class.to_string()];
        while let Some(c) = todo.pop() {
            for b in &self.syms.class(&c).bases {
                if b.is_virtual && self.syms.derives_from(&b.name, base) && self.syms.derives_from(base, &b.name) {
                    return true;
                }
                todo.push(b.name.clone());
            }
        }
        false
    }

    fn check_var_init(&mut self, v: &mut VarDecl, t: &Type, cx: &mut FnCtx) -> DResult<()> {
        let loc = v.loc.clone();
        match (t, &mut v.init) {
            (Type::Class(c), None) => {
                self.check_instantiable(c, &loc)?;
                let Some(d) = self.syms.default_ctor(c) else {
                    return err(&loc, format!("no default constructor for `{c}`"));
                };
                v.ctor = Some(d.mangled.clone());
            }
            (Type::Class(c), Some(Init::Expr(e))) => {
                self.check_instantiable(c, &loc)?;
                self.expr(e, cx)?;
                let mut args = vec![e.clone()];
                let ctor = self.pick_ctor(c, &mut args, &loc)?;
                v.init = Some(Init::Ctor(args));
                v.ctor = Some(ctor);
            }
            (Type::Class(c), Some(Init::Ctor(args))) => {
                self.check_instantiable(c, &loc)?;
                for a in args.iter_mut() {
                    self.expr(a, cx)?;
                }
                v.ctor = Some(self.pick_ctor(c, args, &loc)?);
            }
            (Type::Array(elem, n), init) => {
                if let Type::Class(c) = elem.as_ref() {
                    if init.is_some() {
                        return err(&loc, "arrays of class type cannot have initializers");
                    }
                    self.check_instantiable(c, &loc)?;
                    let Some(d) = self.syms.default_ctor(c) else {
                        return err(&loc, format!("no default constructor for `{c}`"));
                    };
                    v.ctor = Some(d.mangled.clone());
                    return Ok(());
                }
                match init {
                    None => {}
                    Some(Init::List(items)) => {
                        if items.len() > *n as usize {
                            return err(&loc, "too many initializers for array");
                        }
                        for it in items.iter_mut() {
                            self.expr(it, cx)?;
                            self.coerce(it, elem, &loc)?;
                        }
                    }
                    Some(_) => return err(&loc, "arrays must be initialized with a braced list"),
                }
            }
            (_, None) => {}
            (_, Some(Init::Expr(e))) => {
                self.expr(e, cx)?;
                self.coerce(e, t, &loc)?;
            }
            (_, Some(Init::Ctor(args))) => {
                if args.len() > 1 {
                    return err(&loc, "too many initializers");
                }
                if let Some(a) = args.first_mut() {
                    self.expr(a, cx)?;
                    self.coerce(a, t, &loc)?;
                    v.init = Some(Init::Expr(args[0].clone()));
                } else {
                    v.init = None;
                }
            }
            (_, Some(Init::List(_))) => return err(&loc, "braced initializers are only supported for arrays"),
        }
        Ok(())
    }

    fn check_instantiable(&self, class: &str, loc: &SourceLoc) -> DResult<()> {
        self.require_complete(class, loc)?;
        if self.syms.class(class).is_abstract {
            return err(loc, format!("cannot instantiate abstract class `{class}`"));
        }
        Ok(())
    }

    fn check_stmt(&mut self, s: &mut Stmt, cx: &mut FnCtx) -> DResult<()> {
        let loc = s.loc.clone();
        match &mut s.kind {
            StmtKind::Expr(e) => self.expr(e, cx),
            StmtKind::Block(b) => {
                cx.scopes.push(HashMap::new());
                let r = b.iter_mut().try_for_each(|s| self.check_stmt(s, cx));
                cx.scopes.pop();
                r
            }
            StmtKind::Decl(vs) => {
                for v in vs.iter_mut() {
                    let t = self.resolve_type(&v.ty, cx.class.as_deref(), &v.loc)?;
                    self.check_object_type(&t, &v.loc)?;
                    self.check_var_init(v, &t, cx)?;
                    v.sem_ty = Some(t.clone());
                    let scope = cx.scopes.last_mut().unwrap();
                    if scope.insert(v.name.clone(), t).is_some() {
                        return err(&v.loc, format!("redeclaration of `{}`", v.name));
                    }
                }
                Ok(())
            }
            StmtKind::If(c, t, e) => {
                self.cond(c, cx)?;
                self.nested(t, cx)?;
                if let Some(e) = e {
                    self.nested(e, cx)?;
                }
                Ok(())
            }
            StmtKind::While(c, b) | StmtKind::DoWhile(b, c) => {
                self.cond(c, cx)?;
                cx.loops += 1;
                let r = self.nested(b, cx);
                cx.loops -= 1;
                r
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                cx.scopes.push(HashMap::new());
                let r = (|| {
                    if let Some(i) = init {
                        self.check_stmt(i, cx)?;
                    }
                    if let Some(c) = cond {
                        self.cond(c, cx)?;
                    }
                    if let Some(st) = step {
                        self.expr(st, cx)?;
                    }
                    cx.loops += 1;
                    let r = self.nested(body, cx);
                    cx.loops -= 1;
                    r
                })();
                cx.scopes.pop();
                r
            }
            StmtKind::Return(e) => match (e, cx.ret.clone()) {
                (None, Type::Void) => Ok(()),
                (None, t) => err(&loc, format!("non-void function must return a value of type `{t}`")),
                (Some(e), Type::Void) => {
                    self.expr(e, cx)?;
                    if *e.ty() != Type::Void {
                        return err(&loc, "void function returns a value");
                    }
                    Ok(())
                }
                (Some(e), t) => {
                    self.expr(e, cx)?;
                    self.coerce(e, &t, &loc)
                }
            },
            StmtKind::Break | StmtKind::Continue => {
                if cx.loops == 0 {
                    return err(&loc, "`break`/`continue` outside of a loop");
                }
                Ok(())
            }
            StmtKind::Assert { cond, .. } => self.cond(cond, cx),
            StmtKind::Assume(c) => self.cond(c, cx),
            StmtKind::Empty => Ok(()),
        }
    }

    fn nested(&mut self, s: &mut Stmt, cx: &mut FnCtx) -> DResult<()> {
        cx.scopes.push(HashMap::new());
        let r = self.check_stmt(s, cx);
        cx.scopes.pop();
        r
    }

    fn cond(&mut self, e: &mut Expr, cx: &mut FnCtx) -> DResult<()> {
        self.expr(e, cx)?;
        if !e.ty().is_testable() {
            return err(&e.loc, format!("value of type `{}` used as a condition", e.ty()));
        }
        Ok(())
    }

    // ---- conversions and overloads ----

    /// 2 for an exact match, 1 for an implicit conversion.
    fn conv_rank(&self, e: &Expr, target: &Type) -> Option<u8> {
        let at = e.ty();
        let object_target = match target {
            Type::Reference(t) => Some(t.as_ref()),
            Type::Class(_) => Some(target),
            _ => None,
        };
        if let Some(t) = object_target {
            if !is_lvalue(e) {
                return None;
            }
            if at == t {
                return Some(2);
            }
            return match (at, t) {
                (Type::Class(d), Type::Class(b)) if self.syms.derives_from(d, b) => Some(1),
                _ => None,
            };
        }
        if at == target {
            return Some(2);
        }
        match target {
            Type::Pointer(_) if *at == Type::Null => Some(1),
            Type::Pointer(_) if matches!(e.kind, ExprKind::IntLit(0)) => Some(1),
            Type::Pointer(b) => match (at, b.as_ref()) {
                (Type::Pointer(d), Type::Class(bn)) => match d.as_ref() {
                    Type::Class(dn) if self.syms.derives_from(dn, bn) => Some(1),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    fn coerce(&mut self, e: &mut Expr, target: &Type, loc: &SourceLoc) -> DResult<()> {
        if *e.ty() == Type::Void {
            return err(&e.loc, "void value used in an expression");
        }
        let Some(rank) = self.conv_rank(e, target) else {
            let at = e.ty().clone();
            let why = if matches!(target, Type::Reference(_)) && !is_lvalue(e) {
                " (not an lvalue)"
            } else {
                ""
            };
            return err(loc, format!("cannot convert `{at}` to `{target}`{why}"));
        };
        if rank == 2 || *e.ty() == Type::Null {
            return Ok(());
        }
        if matches!(target, Type::Pointer(_)) && matches!(e.kind, ExprKind::IntLit(0)) {
            *e = Expr::typed(ExprKind::Null, e.loc.clone(), Type::Null);
            return Ok(());
        }
        let cast_ty = match target {
            Type::Reference(t) => (**t).clone(),
            t => t.clone(),
        };
        let inner = std::mem::replace(e, Expr::new(ExprKind::Null, e.loc.clone()));
        let l = inner.loc.clone();
        *e = Expr::typed(
            ExprKind::Cast {
                target: TypeExpr::from_type(&cast_ty),
                expr: Box::new(inner),
                implicit: true,
            },
            l,
            cast_ty,
        );
        Ok(())
    }

    fn pick_overload(&mut self, cands: &[String], args: &mut [Expr], what: &str, loc: &SourceLoc) -> DResult<String> {
        let mut best: Vec<(u32, String)> = Vec::new();
        for m in cands {
            let f = self.syms.function(m);
            if f.params.len() != args.len() {
                continue;
            }
            let mut score = 0u32;
            let mut ok = true;
            for (a, p) in args.iter().zip(&f.params) {
                match self.conv_rank(a, p) {
                    Some(r) => score += r as u32,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                best.push((score, m.clone()));
            }
        }
        let Some(top) = best.iter().map(|b| b.0).max() else {
            let tys: Vec<Type> = args.iter().map(|a| a.ty().clone()).collect();
            return err(loc, format!("no matching function for call to `{what}({})`", type_list(&tys)));
        };
        let winners: Vec<&String> = best.iter().filter(|b| b.0 == top).map(|b| &b.1).collect();
        if winners.len() > 1 {
            return err(loc, format!("ambiguous call to `{what}`"));
        }
        let m = winners[0].clone();
        let params = self.syms.function(&m).params.clone();
        for (a, p) in args.iter_mut().zip(&params) {
            self.coerce(a, p, loc)?;
        }
        Ok(m)
    }

    fn pick_ctor(&mut self, class: &str, args: &mut [Expr], loc: &SourceLoc) -> DResult<String> {
        let cands: Vec<String> = self.syms.ctors(class).iter().map(|f| f.mangled.clone()).collect();
        self.pick_overload(&cands, args, class, loc)
    }

    // ---- member lookup ----

    fn lookup_member(&self, class: &str, name: &str, loc: &SourceLoc) -> DResult<Option<MemberLookup>> {
        let info = self.syms.class(class);
        if let Some(f) = info.fields.iter().find(|f| f.name == name) {
            return Ok(Some(MemberLookup::Field {
                owner: class.to_string(),
                ty: f.ty.clone(),
            }));
        }
        let methods: Vec<String> = info
            .methods
            .iter()
            .filter(|m| {
                let f = self.syms.function(m);
                f.name == name && f.kind == FnKind::Method
            })
            .cloned()
            .collect();
        if !methods.is_empty() {
            return Ok(Some(MemberLookup::Methods {
                owner: class.to_string(),
                methods,
            }));
        }
        let mut found: Option<MemberLookup> = None;
        for b in &info.bases {
            if let Some(r) = self.lookup_member(&b.name, name, loc)? {
                let owner = match &r {
                    MemberLookup::Field { owner, .. } | MemberLookup::Methods { owner, .. } => owner.clone(),
                };
                if let Some(prev) = &found {
                    let prev_owner = match prev {
                        MemberLookup::Field { owner, .. } | MemberLookup::Methods { owner, .. } => owner,
                    };
                    if *prev_owner != owner || !self.is_virtual_base(class, &owner) {
                        return err(loc, format!("member `{name}` is ambiguous in `{class}`"));
                    }
                } else {
                    found = Some(r);
                }
            }
        }
        Ok(found)
    }

    // ---- expressions ----

    fn expr(&mut self, e: &mut Expr, cx: &mut FnCtx) -> DResult<()> {
        let loc = e.loc.clone();
        let ty = match &mut e.kind {
            ExprKind::IntLit(v) => {
                if *v > i32::MAX as u64 {
                    return err(&loc, format!("integer literal {v} does not fit in `int`"));
                }
                Type::Int
            }
            ExprKind::BoolLit(_) => Type::Bool,
            ExprKind::Null => Type::Null,
            ExprKind::This => match &cx.class {
                Some(c) => Type::ptr(Type::class(c.clone())),
                None => return err(&loc, "`this` outside of a member function"),
            },
            ExprKind::Ident { name, args, res } => {
                if args.is_some() {
                    return err(&loc, format!("template `{name}` used as a value"));
                }
                if let Some(t) = cx.lookup(name) {
                    *res = Some(Res::Local);
                    t.deref_ref().clone()
                } else if let Some(m) = match &cx.class {
                    Some(c) => self.lookup_member(c, name, &loc)?,
                    None => None,
                } {
                    match m {
                        MemberLookup::Field { .. } => {
                            let n = name.clone();
                            let this = Expr::new(ExprKind::This, loc.clone());
                            *e = Expr::new(
                                ExprKind::Member {
                                    base: Box::new(this),
                                    arrow: true,
                                    name: n,
                                    owner: None,
                                },
                                loc.clone(),
                            );
                            return self.expr(e, cx);
                        }
                        MemberLookup::Methods { .. } => {
                            return err(&loc, format!("member function `{name}` used as a value"))
                        }
                    }
                } else if let Some(g) = self.syms.globals.get(name.as_str()) {
                    *res = Some(Res::Global);
                    g.ty.clone()
                } else if self.free_fns.contains_key(name.as_str()) {
                    return err(&loc, format!("function `{name}` used as a value"));
                } else {
                    return err(&loc, format!("use of undeclared identifier `{name}`"));
                }
            }
            ExprKind::Scoped { scope, name } => {
                let s = crate::frontend::pretty::print_type(scope);
                return err(&loc, format!("`{s}::{name}` can only be called"));
            }
            ExprKind::Unary(op, a) => {
                let op = *op;
                if op == UnOp::Neg {
                    if let ExprKind::IntLit(v) = a.kind {
                        if v == 1u64 << 31 {
                            a.ty = Some(Type::Int);
                            e.ty = Some(Type::Int);
                            return Ok(());
                        }
                    }
                }
                self.expr(a, cx)?;
                let at = a.ty().clone();
                match op {
                    UnOp::Neg => {
                        if at != Type::Int {
                            return err(&loc, format!("invalid operand of type `{at}` to unary `-`"));
                        }
                        Type::Int
                    }
                    UnOp::Not => {
                        if !at.is_testable() {
                            return err(&loc, format!("invalid operand of type `{at}` to `!`"));
                        }
                        Type::Bool
                    }
                    UnOp::Deref => match at {
                        Type::Pointer(t) if *t != Type::Void => *t,
                        _ => return err(&loc, format!("cannot dereference a value of type `{at}`")),
                    },
                    UnOp::AddrOf => {
                        if !is_lvalue(a) {
                            return err(&loc, "cannot take the address of an rvalue");
                        }
                        Type::ptr(at)
                    }
                    UnOp::PreInc | UnOp::PreDec | UnOp::PostInc | UnOp::PostDec => {
                        if at != Type::Int || !is_lvalue(a) {
                            return err(&loc, "increment and decrement need an `int` lvalue");
                        }
                        Type::Int
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                self.expr(a, cx)?;
                self.expr(b, cx)?;
                let (at, bt) = (a.ty().clone(), b.ty().clone());
                if op.is_arith() {
                    if at != Type::Int || bt != Type::Int {
                        return err(
                            &loc,
                            format!("invalid operands of types `{at}` and `{bt}` to `{}`", op.symbol()),
                        );
                    }
                    Type::Int
                } else if op == BinOp::And || op == BinOp::Or {
                    if !at.is_testable() || !bt.is_testable() {
                        return err(
                            &loc,
                            format!("invalid operands of types `{at}` and `{bt}` to `{}`", op.symbol()),
                        );
                    }
                    Type::Bool
                } else {
                    let ok = match (&at, &bt) {
                        (Type::Int, Type::Int) => true,
                        (Type::Bool, Type::Bool) => matches!(op, BinOp::Eq | BinOp::Ne),
                        _ if at.is_pointer() && bt.is_pointer() && matches!(op, BinOp::Eq | BinOp::Ne) => {
                            if self.conv_rank(b, &at).is_some() {
                                if at != Type::Null {
                                    self.coerce(b, &at, &loc)?;
                                }
                                true
                            } else if self.conv_rank(a, &bt).is_some() {
                                self.coerce(a, &bt, &loc)?;
                                true
                            } else {
                                false
                            }
                        }
                        _ => false,
                    };
                    if !ok {
                        return err(
                            &loc,
                            format!("invalid operands of types `{at}` and `{bt}` to `{}`", op.symbol()),
                        );
                    }
                    Type::Bool
                }
            }
            ExprKind::Assign(op, l, r) => {
                let op = *op;
                self.expr(l, cx)?;
                self.expr(r, cx)?;
                if !is_lvalue(l) {
                    return err(&loc, "assignment to an rvalue");
                }
                let lt = l.ty().clone();
                if matches!(lt, Type::Array(..)) {
                    return err(&loc, "arrays cannot be assigned");
                }
                if op.is_some() && (lt != Type::Int || *r.ty() != Type::Int) {
                    return err(&loc, "compound assignment needs `int` operands");
                }
                if let Type::Class(c) = &lt {
                    if r.ty() != &lt {
                        return err(&loc, format!("cannot assign `{}` to `{c}`", r.ty()));
                    }
                } else {
                    self.coerce(r, &lt, &loc)?;
                }
                lt
            }
            ExprKind::Index(a, i) => {
                self.expr(a, cx)?;
                self.expr(i, cx)?;
                if *i.ty() != Type::Int {
                    return err(&loc, "array index is not an `int`");
                }
                match a.ty().clone() {
                    Type::Array(t, _) => *t,
                    Type::Pointer(t) if *t != Type::Void => *t,
                    t => return err(&loc, format!("subscripted value of type `{t}` is not an array")),
                }
            }
            ExprKind::Member {
                base,
                arrow,
                name,
                owner,
            } => {
                self.expr(base, cx)?;
                let bt = base.ty().clone();
                let class = match (&bt, *arrow) {
                    (Type::Class(c), false) => c.clone(),
                    (Type::Pointer(p), true) => match p.as_ref() {
                        Type::Class(c) => c.clone(),
                        _ => return err(&loc, format!("member access into non-class type `{bt}`")),
                    },
                    _ => return err(&loc, format!("member access into non-class type `{bt}`")),
                };
                self.require_complete(&class, &loc)?;
                match self.lookup_member(&class, name, &loc)? {
                    Some(MemberLookup::Field { owner: o, ty }) => {
                        *owner = Some(o);
                        ty
                    }
                    Some(MemberLookup::Methods { .. }) => {
                        return err(&loc, format!("member function `{name}` must be called"))
                    }
                    None => return err(&loc, format!("no member named `{name}` in `{class}`")),
                }
            }
            ExprKind::Call { .. } => self.call(e, cx)?,
            ExprKind::New {
                ty,
                args,
                array_len,
                ctor,
            } => {
                let t = self.resolve_type(ty, cx.class.as_deref(), &loc)?;
                for a in args.iter_mut() {
                    self.expr(a, cx)?;
                }
                if let Some(n) = array_len {
                    self.expr(n, cx)?;
                    if *n.ty() != Type::Int {
                        return err(&loc, "array size is not an `int`");
                    }
                    if !t.is_scalar() {
                        return err(&loc, format!("`new[]` of type `{t}` is not supported"));
                    }
                    Type::ptr(t)
                } else {
                    match &t {
                        Type::Class(c) => {
                            self.check_instantiable(c, &loc)?;
                            *ctor = Some(self.pick_ctor(c, args, &loc)?);
                        }
                        Type::Void | Type::Array(..) | Type::Reference(_) => {
                            return err(&loc, format!("cannot allocate `{t}`"))
                        }
                        _ => match args.len() {
                            0 => {}
                            1 => self.coerce(&mut args[0], &t, &loc)?,
                            _ => return err(&loc, "too many initializers"),
                        },
                    }
                    Type::ptr(t)
                }
            }
            ExprKind::Delete { expr, .. } => {
                self.expr(expr, cx)?;
                match expr.ty() {
                    Type::Pointer(_) => Type::Void,
                    t => return err(&loc, format!("cannot delete a value of type `{t}`")),
                }
            }
            ExprKind::Cast { target, expr, .. } => {
                let t = self.resolve_type(target, cx.class.as_deref(), &loc)?;
                self.expr(expr, cx)?;
                let from = expr.ty().clone();
                self.check_cast(&from, &t, &loc)?;
                t
            }
        };
        e.ty = Some(ty);
        Ok(())
    }

    fn check_cast(&self, from: &Type, to: &Type, loc: &SourceLoc) -> DResult<()> {
        let ok = match (from, to) {
            _ if from == to => true,
            (Type::Int | Type::Bool, Type::Int | Type::Bool) => true,
            (Type::Null, Type::Pointer(_)) => true,
            (Type::Pointer(a), Type::Pointer(b)) => match (a.as_ref(), b.as_ref()) {
                (Type::Class(x), Type::Class(y)) => {
                    if self.syms.derives_from(x, y) {
                        true
                    } else if self.syms.derives_from(y, x) {
                        let path = self.syms.base_path(y, x).unwrap_or_default();
                        if path.iter().any(|e| e.2) {
                            return err(loc, format!("cannot cast `{from}` to `{to}` via virtual base"));
                        }
                        true
                    } else {
                        false
                    }
                }
                _ => false,
            },
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            err(loc, format!("invalid cast from `{from}` to `{to}`"))
        }
    }

    fn call(&mut self, e: &mut Expr, cx: &mut FnCtx) -> DResult<Type> {
        let loc = e.loc.clone();
        let ExprKind::Call { callee, args, res } = &mut e.kind else {
            unreachable!()
        };
        for a in args.iter_mut() {
            self.expr(a, cx)?;
        }
        // Implicit `this->m(...)`.
        if let ExprKind::Ident { name, args: None, .. } = &callee.kind {
            let is_method = cx.lookup(name).is_none()
                && match &cx.class {
                    Some(c) => matches!(self.lookup_member(c, name, &loc)?, Some(MemberLookup::Methods { .. })),
                    None => false,
                };
            if is_method {
                let n = name.clone();
                let l = callee.loc.clone();
                **callee = Expr::new(
                    ExprKind::Member {
                        base: Box::new(Expr::new(ExprKind::This, l.clone())),
                        arrow: true,
                        name: n,
                        owner: None,
                    },
                    l,
                );
            }
        }
        match &mut callee.kind {
            ExprKind::Ident { name, args: targs, .. } => {
                let name = name.clone();
                if cx.lookup(&name).is_some() || self.syms.globals.contains_key(&name) {
                    return err(&loc, format!("`{name}` is not a function"));
                }
                let non_template: Vec<String> = self.free_fns.get(&name).cloned().unwrap_or_default();
                if targs.is_none() && non_template.is_empty() && !self.has_templates(&name) {
                    if NONDET_INT.contains(&name.as_str()) || NONDET_BOOL.contains(&name.as_str()) {
                        if !args.is_empty() {
                            return err(&loc, format!("`{name}` takes no arguments"));
                        }
                        let int = NONDET_INT.contains(&name.as_str());
                        *res = Some(CallRes::Builtin(if int { Builtin::NondetInt } else { Builtin::NondetBool }));
                        callee.ty = Some(Type::Void);
                        return Ok(if int { Type::Int } else { Type::Bool });
                    }
                    if self.syms.classes.contains_key(&name) || self.typedefs.contains_key(&name) {
                        return err(&loc, "temporary objects are not supported");
                    }
                    return err(&loc, format!("use of undeclared function `{name}`"));
                }
                let explicit = targs.clone();
                let m = match explicit {
                    Some(ta) => match self.instantiate_fn(&name, &ta, args, &loc, cx.class.as_deref())? {
                        Some(m) => m,
                        None => {
                            return err(&loc, format!("no function template `{name}` matches this call"))
                        }
                    },
                    None => {
                        let viable = !non_template.is_empty()
                            && self.pick_overload(&non_template, &mut args.clone(), &name, &loc).is_ok();
                        if viable {
                            self.pick_overload(&non_template, args, &name, &loc)?
                        } else {
                            match self.instantiate_fn(&name, &[], args, &loc, cx.class.as_deref())? {
                                Some(m) => m,
                                None => self.pick_overload(&non_template, args, &name, &loc)?,
                            }
                        }
                    }
                };
                if explicit_needs_coerce(targs) {
                    let cands = vec![m.clone()];
                    self.pick_overload(&cands, args, &name, &loc)?;
                }
                *res = Some(CallRes::Function(m.clone()));
                callee.ty = Some(Type::Void);
                Ok(self.syms.function(&m).ret.clone())
            }
            ExprKind::Member {
                base, arrow, name, ..
            } => {
                self.expr(base, cx)?;
                let bt = base.ty().clone();
                let class = match (&bt, *arrow) {
                    (Type::Class(c), false) => c.clone(),
                    (Type::Pointer(p), true) if p.class_name().is_some() => p.class_name().unwrap().to_string(),
                    _ => return err(&loc, format!("member call on non-class type `{bt}`")),
                };
                self.require_complete(&class, &loc)?;
                let name = name.clone();
                let Some(MemberLookup::Methods { owner, methods }) = self.lookup_member(&class, &name, &loc)? else {
                    return err(&loc, format!("no member function `{name}` in `{class}`"));
                };
                let m = self.pick_overload(&methods, args, &format!("{owner}::{name}"), &loc)?;
                let f = self.syms.function(&m);
                *res = Some(CallRes::Method {
                    mangled: m.clone(),
                    class: owner,
                    virtual_dispatch: f.is_virtual,
                });
                callee.ty = Some(Type::Void);
                Ok(f.ret.clone())
            }
            ExprKind::Scoped { scope, name } => {
                let Some(cur) = cx.class.clone() else {
                    return err(&loc, "qualified calls are only supported inside member functions");
                };
                let t = self.resolve_type(scope, Some(&cur), &loc)?;
                let Type::Class(q) = t else {
                    return err(&loc, format!("`{t}` is not a class"));
                };
                if !self.syms.derives_from(&cur, &q) {
                    return err(&loc, format!("`{q}` is not a base of `{cur}`"));
                }
                let name = name.clone();
                let Some(MemberLookup::Methods { owner, methods }) = self.lookup_member(&q, &name, &loc)? else {
                    return err(&loc, format!("no member function `{name}` in `{q}`"));
                };
                let m = self.pick_overload(&methods, args, &format!("{owner}::{name}"), &loc)?;
                *res = Some(CallRes::Method {
                    mangled: m.clone(),
                    class: owner,
                    virtual_dispatch: false,
                });
                callee.ty = Some(Type::Void);
                Ok(self.syms.function(&m).ret.clone())
            }
            _ => err(&loc, "called object is not a function"),
        }
    }

    fn has_templates(&self, name: &str) -> bool {
        self.fn_templates.contains_key(name) || self.injected_templates.contains_key(name)
    }
}

fn explicit_needs_coerce(targs: &Option<Vec<TemplateArg>>) -> bool {
    targs.is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn check(src: &str) -> DResult<Program> {
        typecheck(parse_source("t.cpp", src)?)
    }

    #[test]
    fn int_plus_bool_is_rejected() {
        let e = check("int main(){ bool b = 1 + true; return 0; }").unwrap_err();
        assert!(e.message.contains("invalid operands"), "{}", e.message);
    }

    #[test]
    fn override_without_virtual_base() {
        let src = "class Bird { public: int doit(void) { return 21; } };\n\
                   class Penguin: public Bird { public: int doit(void) override { return 42; } };\n\
                   int main(){ return 0; }";
        let e = check(src).unwrap_err();
        assert!(e.message.contains("doit"), "{}", e.message);
        assert!(e.message.contains("override"));
    }

    #[test]
    fn missing_main() {
        assert!(check("int f(){return 1;}").unwrap_err().message.contains("main"));
        assert!(check("").is_err());
    }

    #[test]
    fn undeclared_identifier_location() {
        let e = check("int main(){\n  return y;\n}").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (2, 10));
    }
}
