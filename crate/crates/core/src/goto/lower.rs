//! Lowering of checked programs to GOTO functions.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::ir::*;
use crate::diag::Diagnostic;
use crate::frontend::ast::*;
use crate::frontend::pretty::print_expr;
use crate::object_model::layout::virtual_bases;
use crate::object_model::{vtable, ObjectModel, SlotKind};
use crate::sema::check::Program;
use crate::sema::symbols::{FnKind, FunctionInfo, SymbolTable};
use crate::sema::types::Type;

type R<T> = Result<T, Diagnostic>;

/// Optional runtime checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub overflow: bool,
    pub bounds: bool,
    pub memory: bool,
}

pub fn lower(p: &Program, om: &ObjectModel, opts: CheckOptions) -> R<GotoProgram> {
    let mut lw = Lowerer {
        syms: &p.symbols,
        om,
        opts,
        props: Vec::new(),
        functions: BTreeMap::new(),
        globals: BTreeMap::new(),
        global_order: Vec::new(),
        class_ids: p
            .symbols
            .class_order
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect(),
        fn_locs: HashMap::new(),
    };
    lw.declare_globals(&p.ast);
    for d in &p.ast.decls {
        match d {
            Decl::Function(f) if f.body.is_some() => lw.lower_function(f, None)?,
            Decl::Class(c) => {
                let cname = crate::sema::templates::class_decl_name(c);
                for m in &c.members {
                    if let Member::Method(f) = m {
                        if f.body.is_some() {
                            lw.lower_function(f, Some(&cname))?;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    lw.lower_init(&p.ast)?;
    for t in &om.vtables.thunks {
        lw.lower_thunk(t);
    }
    let mut fn_ids = BTreeMap::new();
    let mut vtables = Vec::new();
    for t in &om.vtables.tables {
        let mut entries = Vec::new();
        for e in &t.entries {
            let id = match &e.target {
                None => 0,
                Some(f) => {
                    let next = fn_ids.len() as u32 + 1;
                    *fn_ids.entry(f.clone()).or_insert(next)
                }
            };
            entries.push(id);
        }
        vtables.push((t.name.clone(), entries));
    }
    let mut prog = GotoProgram {
        functions: lw.functions,
        globals: lw.globals,
        global_order: lw.global_order,
        properties: lw.props,
        vtables,
        fn_ids,
        class_ids: lw.class_ids,
    };
    add_recursion_props(&mut prog, &lw.fn_locs);
    Ok(prog)
}

struct Lowerer<'a> {
    syms: &'a SymbolTable,
    om: &'a ObjectModel,
    opts: CheckOptions,
    props: Vec<Property>,
    functions: BTreeMap<String, GFunction>,
    globals: BTreeMap<String, LocalInfo>,
    global_order: Vec<String>,
    class_ids: BTreeMap<String, u32>,
    fn_locs: HashMap<String, SourceLoc>,
}

struct LoopCtx {
    brk: usize,
    cont: usize,
    depth: usize,
}

struct FnState {
    name: String,
    display: String,
    body: Vec<Inst>,
    labels: Vec<Option<usize>>,
    locals: BTreeMap<String, LocalInfo>,
    used: HashSet<String>,
    /// Source name to unique name, per block.
    names: Vec<HashMap<String, String>>,
    /// Variables to destroy and kill at block exit.
    scopes: Vec<Vec<(String, Type)>>,
    loops: Vec<LoopCtx>,
    /// Source names of locals that must live in memory.
    addressed: HashSet<String>,
    /// Unique names of reference parameters (pointer registers).
    refs: HashSet<String>,
    class: Option<String>,
}

impl FnState {
    fn new(name: &str, display: &str, class: Option<&str>) -> Self {
        FnState {
            name: name.into(),
            display: display.into(),
            body: vec![],
            labels: vec![],
            locals: BTreeMap::new(),
            used: HashSet::new(),
            names: vec![HashMap::new()],
            scopes: vec![vec![]],
            loops: vec![],
            addressed: HashSet::new(),
            refs: HashSet::new(),
            class: class.map(|s| s.to_string()),
        }
    }

    fn emit(&mut self, instr: Instr, loc: &SourceLoc) {
        self.body.push(Inst {
            instr,
            loc: loc.clone(),
        });
    }

    fn label(&mut self) -> usize {
        self.labels.push(None);
        self.labels.len() - 1
    }

    fn place(&mut self, l: usize) {
        self.labels[l] = Some(self.body.len());
    }

    fn goto(&mut self, l: usize, cond: Option<GExpr>, loc: &SourceLoc) {
        if cond == Some(GExpr::Bool(false)) {
            return;
        }
        let cond = if cond == Some(GExpr::Bool(true)) { None } else { cond };
        self.emit(
            Instr::Goto {
                target: l,
                cond,
                unwind: None,
            },
            loc,
        );
    }

    fn unique(&mut self, base: &str) -> String {
        if self.used.insert(base.to_string()) {
            return base.to_string();
        }
        let mut k = 1;
        loop {
            let n = format!("{base}${k}");
            if self.used.insert(n.clone()) {
                return n;
            }
            k += 1;
        }
    }

    fn lookup(&self, name: &str) -> Option<&String> {
        self.names.iter().rev().find_map(|m| m.get(name))
    }

    fn temp(&mut self, base: &str, ty: Type, loc: &SourceLoc) -> String {
        let n = self.unique(base);
        self.locals.insert(n.clone(), LocalInfo { ty, memory: None });
        self.emit(Instr::Decl(n.clone()), loc);
        n
    }
}

fn base_variant(mangled: &str) -> String {
    match mangled.find('(') {
        Some(i) => format!("{}$base{}", &mangled[..i], &mangled[i..]),
        None => format!("{mangled}$base"),
    }
}

fn is_memory_type(t: &Type) -> bool {
    matches!(t, Type::Class(_) | Type::Array(..))
}

/// Source names whose address is taken or which are bound to reference
/// parameters.
fn addressed_names(syms: &SymbolTable, f: &FunctionDecl) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut visit = |e: &Expr| collect_addressed(syms, e, &mut out);
    for i in &f.inits {
        i.args.iter().for_each(&mut visit);
    }
    for i in &f.inits {
        let params = i.ctor.as_ref().map(|c| syms.function(c).params.clone()).unwrap_or_default();
        for (a, p) in i.args.iter().zip(params.iter()) {
            if matches!(p, Type::Reference(_)) {
                root_name(a).map(|n| out.insert(n));
            }
        }
    }
    if let Some(b) = &f.body {
        for s in b {
            walk_stmt(s, &mut |e| collect_addressed(syms, e, &mut out));
        }
    }
    out
}

fn root_name(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprKind::Ident { name, res: Some(_), .. } => Some(name.clone()),
        ExprKind::Cast { expr, .. } => root_name(expr),
        _ => None,
    }
}

fn collect_addressed(syms: &SymbolTable, e: &Expr, out: &mut HashSet<String>) {
    walk_expr(e, &mut |x| match &x.kind {
        ExprKind::Unary(UnOp::AddrOf, a) => {
            if let Some(n) = root_name(a) {
                out.insert(n);
            }
        }
        ExprKind::Call { args, res, .. } => {
            let params = match res {
                Some(CallRes::Function(m)) | Some(CallRes::Method { mangled: m, .. }) => {
                    syms.function(m).params.clone()
                }
                _ => vec![],
            };
            for (a, p) in args.iter().zip(&params) {
                if matches!(p, Type::Reference(_)) {
                    if let Some(n) = root_name(a) {
                        out.insert(n);
                    }
                }
            }
        }
        ExprKind::New { args, ctor: Some(c), .. } => {
            for (a, p) in args.iter().zip(&syms.function(c).params) {
                if matches!(p, Type::Reference(_)) {
                    if let Some(n) = root_name(a) {
                        out.insert(n);
                    }
                }
            }
        }
        _ => {}
    });
}

pub fn walk_expr(e: &Expr, f: &mut impl FnMut(&Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Unary(_, a) | ExprKind::Cast { expr: a, .. } | ExprKind::Delete { expr: a, .. } => walk_expr(a, f),
        ExprKind::Member { base, .. } => walk_expr(base, f),
        ExprKind::Binary(_, a, b) | ExprKind::Assign(_, a, b) | ExprKind::Index(a, b) => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        ExprKind::Call { callee, args, .. } => {
            walk_expr(callee, f);
            args.iter().for_each(|a| walk_expr(a, f));
        }
        ExprKind::New { args, array_len, .. } => {
            args.iter().for_each(|a| walk_expr(a, f));
            if let Some(n) = array_len {
                walk_expr(n, f);
            }
        }
        _ => {}
    }
}

pub fn walk_stmt(s: &Stmt, f: &mut impl FnMut(&Expr)) {
    match &s.kind {
        StmtKind::Expr(e) | StmtKind::Assume(e) => walk_expr(e, f),
        StmtKind::Assert { cond, .. } => walk_expr(cond, f),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                walk_expr(e, f)
            }
        }
        StmtKind::Block(b) => b.iter().for_each(|s| walk_stmt(s, f)),
        StmtKind::Decl(vs) => {
            for v in vs {
                match &v.init {
                    Some(Init::Expr(e)) => walk_expr(e, f),
                    Some(Init::Ctor(es)) | Some(Init::List(es)) => es.iter().for_each(|e| walk_expr(e, f)),
                    None => {}
                }
            }
        }
        StmtKind::If(c, t, e) => {
            walk_expr(c, f);
            walk_stmt(t, f);
            if let Some(e) = e {
                walk_stmt(e, f);
            }
        }
        StmtKind::While(c, b) | StmtKind::DoWhile(b, c) => {
            walk_expr(c, f);
            walk_stmt(b, f);
        }
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            if let Some(i) = init {
                walk_stmt(i, f);
            }
            if let Some(c) = cond {
                walk_expr(c, f);
            }
            if let Some(s) = step {
                walk_expr(s, f);
            }
            walk_stmt(body, f);
        }
        _ => {}
    }
}

/// Names bound to reference parameters of constructors in declarations.
fn ctor_ref_args(syms: &SymbolTable, s: &Stmt, out: &mut HashSet<String>) {
    match &s.kind {
        StmtKind::Decl(vs) => {
            for v in vs {
                if let (Some(Init::Ctor(es)), Some(c)) = (&v.init, &v.ctor) {
                    for (a, p) in es.iter().zip(&syms.function(c).params) {
                        if matches!(p, Type::Reference(_)) {
                            if let Some(n) = root_name(a) {
                                out.insert(n);
                            }
                        }
                    }
                }
            }
        }
        StmtKind::Block(b) => b.iter().for_each(|s| ctor_ref_args(syms, s, out)),
        StmtKind::If(_, t, e) => {
            ctor_ref_args(syms, t, out);
            if let Some(e) = e {
                ctor_ref_args(syms, e, out);
            }
        }
        StmtKind::While(_, b) | StmtKind::DoWhile(b, _) => ctor_ref_args(syms, b, out),
        StmtKind::For { init, body, .. } => {
            if let Some(i) = init {
                ctor_ref_args(syms, i, out);
            }
            ctor_ref_args(syms, body, out);
        }
        _ => {}
    }
}

impl<'a> Lowerer<'a> {
    fn layout_size(&self, t: &Type) -> u32 {
        self.om.layouts.size_of(t)
    }

    fn add_prop(&mut self, kind: PropKind, loc: &SourceLoc, function: &str, description: String, claim: &GExpr) -> usize {
        self.props.push(Property {
            kind,
            loc: loc.clone(),
            function: function.to_string(),
            description,
            claim: Printer { compact: true }.expr(claim),
        });
        self.props.len() - 1
    }

    fn check(&mut self, fs: &mut FnState, kind: PropKind, cond: GExpr, description: String, loc: &SourceLoc) {
        if cond == GExpr::Bool(true) {
            return;
        }
        let prop = self.add_prop(kind, loc, &fs.display.clone(), description, &cond);
        fs.emit(Instr::Assert { cond, prop }, loc);
    }

    // ---- globals ----

    fn declare_globals(&mut self, ast: &Ast) {
        let mut addressed = HashSet::new();
        for d in &ast.decls {
            let mut visit_fn = |f: &FunctionDecl| {
                let mut s = addressed_names(self.syms, f);
                if let Some(b) = &f.body {
                    b.iter().for_each(|st| ctor_ref_args(self.syms, st, &mut s));
                }
                addressed.extend(s);
            };
            match d {
                Decl::Function(f) => visit_fn(f),
                Decl::Class(c) => {
                    for m in &c.members {
                        if let Member::Method(f) = m {
                            visit_fn(f);
                        }
                    }
                }
                Decl::Vars(vs) => {
                    for v in vs {
                        if let Some(Init::Expr(e)) = &v.init {
                            collect_addressed(self.syms, e, &mut addressed);
                        }
                    }
                }
                _ => {}
            }
        }
        for (name, g) in &self.syms.globals {
            let memory = if is_memory_type(&g.ty) || addressed.contains(name) {
                Some(self.layout_size(&g.ty))
            } else {
                None
            };
            self.globals.insert(
                name.clone(),
                LocalInfo {
                    ty: g.ty.clone(),
                    memory,
                },
            );
        }
        for d in &ast.decls {
            if let Decl::Vars(vs) = d {
                for v in vs {
                    self.global_order.push(v.name.clone());
                }
            }
        }
    }

    fn lower_init(&mut self, ast: &Ast) -> R<()> {
        let loc = SourceLoc::builtin();
        let mut fs = FnState::new(INIT, INIT, None);
        for d in &ast.decls {
            if let Decl::Vars(vs) = d {
                for v in vs {
                    let info = self.globals[&v.name].clone();
                    let vr = VarRef::Global(v.name.clone());
                    self.init_var(&mut fs, v, &vr, &info)?;
                }
            }
        }
        fs.emit(Instr::EndFunction, &loc);
        self.finish(fs, vec![], None);
        Ok(())
    }

    // ---- functions ----

    fn lower_function(&mut self, f: &FunctionDecl, class: Option<&str>) -> R<()> {
        let mangled = f.mangled.clone().expect("unchecked function");
        let info = self.syms.function(&mangled).clone();
        let has_vbases = class.is_some_and(|c| !self.om.layouts.class(c).vbases.is_empty());
        match info.kind {
            FnKind::Ctor | FnKind::Dtor if has_vbases => {
                self.lower_function_variant(f, class, &info, &mangled, false)?;
                self.lower_function_variant(f, class, &info, &base_variant(&mangled), true)
            }
            _ => self.lower_function_variant(f, class, &info, &mangled, false),
        }
    }

    fn lower_function_variant(
        &mut self,
        f: &FunctionDecl,
        class: Option<&str>,
        info: &FunctionInfo,
        name: &str,
        base_variant: bool,
    ) -> R<()> {
        let display = if base_variant {
            format!("{}$base", info.display)
        } else {
            info.display.clone()
        };
        self.fn_locs.insert(name.to_string(), info.loc.clone());
        let mut fs = FnState::new(name, &display, class);
        fs.addressed = addressed_names(self.syms, f);
        if let Some(b) = &f.body {
            for s in b {
                ctor_ref_args(self.syms, s, &mut fs.addressed);
            }
        }
        let mut params = Vec::new();
        if let Some(c) = class {
            fs.used.insert("this".into());
            fs.locals.insert(
                "this".into(),
                LocalInfo {
                    ty: Type::ptr(Type::class(c)),
                    memory: None,
                },
            );
            params.push("this".to_string());
        }
        let loc = f.loc.clone();
        let mut copies = Vec::new();
        for (i, (p, t)) in f.params.iter().zip(&info.params).enumerate() {
            let src = p.name.clone().unwrap_or_else(|| format!("$p{i}"));
            match t {
                Type::Reference(_) => {
                    let n = fs.unique(&src);
                    fs.locals.insert(n.clone(), LocalInfo { ty: t.clone(), memory: None });
                    fs.refs.insert(n.clone());
                    fs.names[0].insert(src, n.clone());
                    params.push(n);
                }
                Type::Class(_) => {
                    let arg = fs.unique(&format!("{src}$arg"));
                    fs.locals.insert(
                        arg.clone(),
                        LocalInfo {
                            ty: Type::ptr(t.clone()),
                            memory: None,
                        },
                    );
                    params.push(arg.clone());
                    copies.push((src, t.clone(), arg));
                }
                t if fs.addressed.contains(&src) => {
                    let arg = fs.unique(&format!("{src}$arg"));
                    fs.locals.insert(arg.clone(), LocalInfo { ty: t.clone(), memory: None });
                    params.push(arg.clone());
                    copies.push((src, t.clone(), arg));
                }
                t => {
                    let n = fs.unique(&src);
                    fs.locals.insert(n.clone(), LocalInfo { ty: t.clone(), memory: None });
                    fs.names[0].insert(src, n.clone());
                    params.push(n);
                }
            }
        }
        for (src, t, arg) in copies {
            let n = self.declare_local(&mut fs, &src, &t, true, &loc);
            let addr = GExpr::ObjAddr(VarRef::Local(n.clone()));
            match &t {
                Type::Class(c) => {
                    let cc = self
                        .syms
                        .copy_ctor(c)
                        .map(|f| f.mangled.clone())
                        .ok_or_else(|| Diagnostic::error(loc.clone(), format!("`{c}` cannot be copied")))?;
                    let target = self.ctor_name(&cc, false);
                    fs.emit(
                        Instr::Call {
                            lhs: None,
                            target: CallTarget::Direct(target),
                            args: vec![addr, GExpr::Var(VarRef::Local(arg), Sort::Ptr)],
                        },
                        &loc,
                    );
                }
                t => fs.emit(
                    Instr::Assign(LValue::Mem(addr, sort_of(t)), GExpr::Var(VarRef::Local(arg), sort_of(t))),
                    &loc,
                ),
            }
        }
        let this = GExpr::Var(VarRef::Local("this".into()), Sort::Ptr);
        match info.kind {
            FnKind::Ctor => {
                let c = class.unwrap();
                self.ctor_prologue(&mut fs, c, f, this.clone(), base_variant)?;
            }
            FnKind::Dtor => {
                self.set_vptrs(&mut fs, class.unwrap(), &this, &loc);
            }
            _ => {}
        }
        let end = fs.label();
        for s in f.body.as_ref().unwrap() {
            self.stmt(&mut fs, s, end)?;
        }
        fs.place(end);
        let pc = fs.body.len();
        let falls_off = !matches!(fs.body.last().map(|i| &i.instr), Some(Instr::Return(_)))
            || fs
                .body
                .iter()
                .any(|i| matches!(i.instr, Instr::Goto { target, .. } if fs.labels[target] == Some(pc)));
        if info.kind == FnKind::Dtor {
            self.dtor_epilogue(&mut fs, class.unwrap(), this, base_variant, &loc);
        }
        if falls_off || info.kind == FnKind::Dtor {
            self.cleanup_scope(&mut fs, 0, &loc);
            if name == MAIN {
                fs.emit(Instr::Return(Some(GExpr::Int(0))), &loc);
            }
        }
        fs.emit(Instr::EndFunction, &loc);
        let ret = if info.ret == Type::Void { None } else { Some(sort_of(&info.ret)) };
        self.finish(fs, params, ret);
        Ok(())
    }

    fn finish(&mut self, mut fs: FnState, params: Vec<String>, ret: Option<Sort>) {
        let labels = fs.labels.clone();
        let mut loop_props: BTreeMap<usize, usize> = BTreeMap::new();
        let display = fs.display.clone();
        for pc in 0..fs.body.len() {
            let loc = fs.body[pc].loc.clone();
            if let Instr::Goto { target, cond, unwind } = &mut fs.body[pc].instr {
                *target = labels[*target].expect("unplaced label");
                if *target <= pc {
                    let n = loop_props.len();
                    let prop = match loop_props.get(target) {
                        Some(p) => *p,
                        None => {
                            let claim = match cond {
                                Some(c) => GExpr::not(c.clone()),
                                None => GExpr::Bool(false),
                            };
                            self.props.push(Property {
                                kind: PropKind::Unwinding,
                                loc: loc.clone(),
                                function: display.clone(),
                                description: format!("unwinding assertion loop {n}"),
                                claim: Printer { compact: true }.expr(&claim),
                            });
                            let p = self.props.len() - 1;
                            loop_props.insert(*target, p);
                            p
                        }
                    };
                    *unwind = Some(prop);
                }
            }
        }
        self.functions.insert(
            fs.name.clone(),
            GFunction {
                name: fs.name,
                display: fs.display,
                params,
                ret,
                locals: fs.locals,
                body: fs.body,
                recursion_prop: None,
            },
        );
    }

    fn lower_thunk(&mut self, t: &crate::object_model::Thunk) {
        let loc = self.syms.function(&t.target).loc.clone();
        self.fn_locs.insert(t.name.clone(), loc.clone());
        let mut fs = FnState::new(&t.name, &t.display, Some(&t.root));
        fs.used.insert("this".into());
        fs.locals.insert(
            "this".into(),
            LocalInfo {
                ty: Type::ptr(Type::class(t.root.clone())),
                memory: None,
            },
        );
        let mut params = vec!["this".to_string()];
        let target_class = self.syms.function(&t.target).class.clone().unwrap();
        let this = GExpr::Var(VarRef::Local("this".into()), Sort::Ptr);
        let mut args = vec![GExpr::offset(this, GExpr::Word(t.delta), Hint::Cast(format!("{target_class}*")))];
        for (i, p) in t.params.iter().enumerate() {
            let n = fs.unique(&format!("$p{i}"));
            let ty = match p {
                Type::Class(_) => Type::ptr(p.clone()),
                p => p.clone(),
            };
            let s = sort_of(&ty);
            fs.locals.insert(n.clone(), LocalInfo { ty, memory: None });
            args.push(GExpr::Var(VarRef::Local(n.clone()), s));
            params.push(n);
        }
        let target = CallTarget::Direct(t.target.clone());
        let ret = if t.ret == Type::Void { None } else { Some(sort_of(&t.ret)) };
        match ret {
            Some(s) => {
                let rv = fs.temp("return_value", t.ret.clone(), &loc);
                let lhs = LValue::Var(VarRef::Local(rv.clone()), s);
                fs.emit(
                    Instr::Call {
                        lhs: Some(lhs),
                        target,
                        args,
                    },
                    &loc,
                );
                fs.emit(Instr::Return(Some(GExpr::Var(VarRef::Local(rv), s))), &loc);
            }
            None => fs.emit(
                Instr::Call {
                    lhs: None,
                    target,
                    args,
                },
                &loc,
            ),
        }
        fs.emit(Instr::EndFunction, &loc);
        self.finish(fs, params, ret);
    }

    // ---- constructors and destructors ----

    /// Name of the constructor or destructor variant to call for a
    /// subobject (`base_variant`) or a complete object.
    fn ctor_name(&self, mangled: &str, base_variant_wanted: bool) -> String {
        let class = self.syms.function(mangled).class.clone().unwrap();
        if base_variant_wanted && !self.om.layouts.class(&class).vbases.is_empty() {
            base_variant(mangled)
        } else {
            mangled.to_string()
        }
    }

    fn call_ctor(
        &mut self,
        fs: &mut FnState,
        ctor: &str,
        this: GExpr,
        args: &[Expr],
        as_base: bool,
        loc: &SourceLoc,
    ) -> R<()> {
        let params = self.syms.function(ctor).params.clone();
        let mut a = vec![this];
        a.extend(self.args(fs, &params, args)?);
        let target = CallTarget::Direct(self.ctor_name(ctor, as_base));
        fs.emit(
            Instr::Call {
                lhs: None,
                target,
                args: a,
            },
            loc,
        );
        Ok(())
    }

    fn default_construct(&mut self, fs: &mut FnState, ty: &Type, addr: GExpr, as_base: bool, loc: &SourceLoc) -> R<()> {
        match ty {
            Type::Class(c) => {
                let Some(d) = self.syms.default_ctor(c).map(|f| f.mangled.clone()) else {
                    return Err(Diagnostic::error(
                        loc.clone(),
                        format!("no default constructor for `{c}`"),
                    ));
                };
                self.call_ctor(fs, &d, addr, &[], as_base, loc)
            }
            Type::Array(e, n) => {
                if matches!(e.as_ref(), Type::Class(_) | Type::Array(..)) {
                    let sz = self.layout_size(e) as i64;
                    for i in 0..*n {
                        let a = GExpr::offset(addr.clone(), GExpr::Word(i as i64 * sz), Hint::Index(Box::new(GExpr::Int(i as i64))));
                        self.default_construct(fs, e, a, false, loc)?;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn destroy(&mut self, fs: &mut FnState, ty: &Type, addr: GExpr, as_base: bool, loc: &SourceLoc) {
        match ty {
            Type::Class(c) => {
                if let Some(d) = self.syms.dtor(c).map(|f| f.mangled.clone()) {
                    let target = CallTarget::Direct(self.ctor_name(&d, as_base));
                    fs.emit(
                        Instr::Call {
                            lhs: None,
                            target,
                            args: vec![addr],
                        },
                        loc,
                    );
                }
            }
            Type::Array(e, n)
                if self.needs_dtor(e) => {
                    let sz = self.layout_size(e) as i64;
                    for i in (0..*n).rev() {
                        let a = GExpr::offset(addr.clone(), GExpr::Word(i as i64 * sz), Hint::Index(Box::new(GExpr::Int(i as i64))));
                        self.destroy(fs, e, a, false, loc);
                    }
                }
            _ => {}
        }
    }

    fn needs_dtor(&self, t: &Type) -> bool {
        match t {
            Type::Class(c) => self.syms.dtor(c).is_some(),
            Type::Array(e, _) => self.needs_dtor(e),
            _ => false,
        }
    }

    /// Address of the vbase pointer slot for `v` inside the non-virtual
    /// part of `class`.
    fn vbase_slot(&self, class: &str, v: &str) -> Option<u32> {
        let l = self.om.layouts.class(class);
        l.slots[..l.nv_size as usize]
            .iter()
            .position(|s| s.kind == SlotKind::VbasePtr(v.to_string()))
            .map(|i| i as u32)
    }

    /// Address of the virtual base `v` of the `class` object at `this`,
    /// following vbase pointers through other virtual bases when `class`
    /// holds none for `v` itself.
    fn vbase_addr(&self, class: &str, this: &GExpr, v: &str) -> GExpr {
        let load = |base: GExpr, slot: u32| {
            GExpr::load(
                GExpr::offset(base, GExpr::Word(slot as i64), Hint::Field(format!("{v}@vbase"))),
                Sort::Ptr,
            )
        };
        if let Some(slot) = self.vbase_slot(class, v) {
            return load(this.clone(), slot);
        }
        for w in virtual_bases(self.syms, class) {
            if w == v {
                continue;
            }
            if let Some(slot) = self.vbase_slot(&w, v) {
                return load(self.vbase_addr(class, this, &w), slot);
            }
        }
        panic!("virtual base `{v}` of `{class}` without pointer")
    }

    fn set_vptrs(&mut self, fs: &mut FnState, class: &str, this: &GExpr, loc: &SourceLoc) {
        for (root, off) in self.om.layouts.nv_vptrs(class) {
            let addr = GExpr::offset(this.clone(), GExpr::Word(off as i64), Hint::Field(format!("{root}@vptr")));
            fs.emit(
                Instr::Assign(LValue::Mem(addr, Sort::Ptr), GExpr::VtableAddr(format!("{root}@{class}"))),
                loc,
            );
        }
        for v in virtual_bases(self.syms, class) {
            let vptrs = self.om.layouts.nv_vptrs(&v);
            if vptrs.is_empty() {
                continue;
            }
            let vaddr = self.vbase_addr(class, this, &v);
            for (root, off) in vptrs {
                let addr = GExpr::offset(vaddr.clone(), GExpr::Word(off as i64), Hint::Field(format!("{root}@vptr")));
                fs.emit(
                    Instr::Assign(LValue::Mem(addr, Sort::Ptr), GExpr::VtableAddr(format!("{root}@{class}"))),
                    loc,
                );
            }
        }
    }

    fn ctor_prologue(&mut self, fs: &mut FnState, class: &str, f: &FunctionDecl, this: GExpr, base_variant: bool) -> R<()> {
        let loc = f.loc.clone();
        let layout = self.om.layouts.class(class).clone();
        let info = self.syms.class(class).clone();
        let find_init = |name: &str| f.inits.iter().find(|i| matches!(&i.target, TypeExpr::Named { name: n, .. } if n == name));
        if !base_variant && !layout.vbases.is_empty() {
            for (i, s) in layout.slots.iter().enumerate() {
                if let SlotKind::VbasePtr(v) = &s.kind {
                    let vo = layout.vbase_offset(v).unwrap();
                    let addr = GExpr::offset(this.clone(), GExpr::Word(i as i64), Hint::Field(format!("{v}@vbase")));
                    let val = GExpr::offset(this.clone(), GExpr::Word(vo as i64), Hint::Cast(format!("{v}*")));
                    fs.emit(Instr::Assign(LValue::Mem(addr, Sort::Ptr), val), &loc);
                }
            }
            for (v, vo) in &layout.vbases {
                let addr = GExpr::offset(this.clone(), GExpr::Word(*vo as i64), Hint::Cast(format!("{v}*")));
                match find_init(v) {
                    Some(init) => {
                        let ctor = init.ctor.clone().unwrap();
                        self.call_ctor(fs, &ctor, addr, &init.args, true, &init.loc)?
                    }
                    None => self.default_construct(fs, &Type::class(v.clone()), addr, true, &loc)?,
                }
            }
        }
        for b in info.bases.iter().filter(|b| !b.is_virtual) {
            let off = layout.nv_bases[&b.name];
            let addr = GExpr::offset(this.clone(), GExpr::Word(off as i64), Hint::Cast(format!("{}*", b.name)));
            match find_init(&b.name).filter(|_| !info.fields.iter().any(|fl| fl.name == b.name)) {
                Some(init) => {
                    let ctor = init.ctor.clone().unwrap();
                    self.call_ctor(fs, &ctor, addr, &init.args, true, &init.loc)?
                }
                None => self.default_construct(fs, &Type::class(b.name.clone()), addr, true, &loc)?,
            }
        }
        self.set_vptrs(fs, class, &this, &loc);
        for fl in &info.fields {
            let off = layout.fields[&fl.name];
            let addr = GExpr::offset(this.clone(), GExpr::Word(off as i64), Hint::Field(fl.name.clone()));
            match find_init(&fl.name) {
                Some(init) => match &fl.ty {
                    Type::Class(_) => {
                        let ctor = init.ctor.clone().unwrap();
                        self.call_ctor(fs, &ctor, addr, &init.args, false, &init.loc)?
                    }
                    t => {
                        let v = match init.args.first() {
                            Some(a) => self.rv(fs, a)?,
                            None => zero(sort_of(t)),
                        };
                        fs.emit(Instr::Assign(LValue::Mem(addr, sort_of(t)), v), &init.loc);
                    }
                },
                None => self.default_construct(fs, &fl.ty, addr, false, &loc)?,
            }
        }
        Ok(())
    }

    fn dtor_epilogue(&mut self, fs: &mut FnState, class: &str, this: GExpr, base_variant: bool, loc: &SourceLoc) {
        let layout = self.om.layouts.class(class).clone();
        let info = self.syms.class(class).clone();
        for fl in info.fields.iter().rev() {
            let off = layout.fields[&fl.name];
            let addr = GExpr::offset(this.clone(), GExpr::Word(off as i64), Hint::Field(fl.name.clone()));
            self.destroy(fs, &fl.ty, addr, false, loc);
        }
        for b in info.bases.iter().rev().filter(|b| !b.is_virtual) {
            let off = layout.nv_bases[&b.name];
            let addr = GExpr::offset(this.clone(), GExpr::Word(off as i64), Hint::Cast(format!("{}*", b.name)));
            self.destroy(fs, &Type::class(b.name.clone()), addr, true, loc);
        }
        if !base_variant {
            for (v, vo) in layout.vbases.iter().rev() {
                let addr = GExpr::offset(this.clone(), GExpr::Word(*vo as i64), Hint::Cast(format!("{v}*")));
                self.destroy(fs, &Type::class(v.clone()), addr, true, loc);
            }
        }
    }

    // ---- statements ----

    fn declare_local(&mut self, fs: &mut FnState, src: &str, ty: &Type, memory: bool, loc: &SourceLoc) -> String {
        let n = fs.unique(src);
        let memory = if memory || is_memory_type(ty) {
            Some(self.layout_size(ty))
        } else {
            None
        };
        fs.locals.insert(n.clone(), LocalInfo { ty: ty.clone(), memory });
        fs.names.last_mut().unwrap().insert(src.to_string(), n.clone());
        fs.scopes.last_mut().unwrap().push((n.clone(), ty.clone()));
        fs.emit(Instr::Decl(n.clone()), loc);
        n
    }

    fn init_var(&mut self, fs: &mut FnState, v: &VarDecl, vr: &VarRef, info: &LocalInfo) -> R<()> {
        let loc = &v.loc;
        let ty = &info.ty;
        let place = |s: Sort| match info.memory {
            Some(_) => LValue::Mem(GExpr::ObjAddr(vr.clone()), s),
            None => LValue::Var(vr.clone(), s),
        };
        match ty {
            Type::Class(_) => {
                let addr = GExpr::ObjAddr(vr.clone());
                let ctor = v.ctor.clone().expect("class variable without constructor");
                let args = match &v.init {
                    Some(Init::Ctor(a)) => a.clone(),
                    _ => vec![],
                };
                self.call_ctor(fs, &ctor, addr, &args, false, loc)?;
            }
            Type::Array(e, _) => {
                let addr = GExpr::ObjAddr(vr.clone());
                if let Type::Class(_) = e.as_ref() {
                    self.default_construct(fs, ty, addr, false, loc)?;
                } else if let Some(Init::List(items)) = &v.init {
                    let sz = self.layout_size(e) as i64;
                    for (i, it) in items.iter().enumerate() {
                        let val = self.rv(fs, it)?;
                        let a = GExpr::offset(addr.clone(), GExpr::Word(i as i64 * sz), Hint::Index(Box::new(GExpr::Int(i as i64))));
                        fs.emit(Instr::Assign(LValue::Mem(a, sort_of(e)), val), &it.loc);
                    }
                    if let VarRef::Local(_) = vr {
                        let n = if let Type::Array(_, n) = ty { *n as usize } else { 0 };
                        for i in items.len()..n {
                            let a = GExpr::offset(addr.clone(), GExpr::Word(i as i64 * sz), Hint::Index(Box::new(GExpr::Int(i as i64))));
                            fs.emit(Instr::Assign(LValue::Mem(a, sort_of(e)), zero(sort_of(e))), loc);
                        }
                    }
                }
            }
            t => match &v.init {
                Some(Init::Expr(e)) => {
                    let val = self.rv(fs, e)?;
                    fs.emit(Instr::Assign(place(sort_of(t)), val), loc);
                }
                _ if matches!(vr, VarRef::Local(_)) => fs.emit(
                    Instr::Call {
                        lhs: Some(place(sort_of(t))),
                        target: CallTarget::Nondet(sort_of(t)),
                        args: vec![],
                    },
                    loc,
                ),
                _ => {}
            },
        }
        Ok(())
    }

    fn cleanup_scope(&mut self, fs: &mut FnState, depth: usize, loc: &SourceLoc) {
        let vars = fs.scopes[depth].clone();
        for (n, t) in vars.iter().rev() {
            if fs.locals[n].memory.is_some() && self.needs_dtor(t) {
                self.destroy(fs, t, GExpr::ObjAddr(VarRef::Local(n.clone())), false, loc);
            }
            fs.emit(Instr::Dead(n.clone()), loc);
        }
    }

    /// Cleans up all blocks deeper than `depth` without leaving them.
    fn cleanup_to(&mut self, fs: &mut FnState, depth: usize, loc: &SourceLoc) {
        for d in (depth..fs.scopes.len()).rev() {
            self.cleanup_scope(fs, d, loc);
        }
    }

    fn block(&mut self, fs: &mut FnState, stmts: &[Stmt], end: usize, loc: &SourceLoc) -> R<()> {
        fs.scopes.push(vec![]);
        fs.names.push(HashMap::new());
        let r = stmts.iter().try_for_each(|s| self.stmt(fs, s, end));
        if r.is_ok() {
            let d = fs.scopes.len() - 1;
            self.cleanup_scope(fs, d, loc);
        }
        fs.scopes.pop();
        fs.names.pop();
        r
    }

    fn nested(&mut self, fs: &mut FnState, s: &Stmt, end: usize) -> R<()> {
        match &s.kind {
            StmtKind::Block(b) => self.block(fs, b, end, &s.loc),
            _ => self.block(fs, std::slice::from_ref(s), end, &s.loc),
        }
    }

    fn stmt(&mut self, fs: &mut FnState, s: &Stmt, end: usize) -> R<()> {
        let loc = &s.loc;
        match &s.kind {
            StmtKind::Empty => {}
            StmtKind::Expr(e) => {
                self.effect(fs, e)?;
            }
            StmtKind::Block(b) => self.block(fs, b, end, loc)?,
            StmtKind::Decl(vs) => {
                for v in vs {
                    let ty = v.sem_ty.clone().unwrap();
                    let memory = fs.addressed.contains(&v.name);
                    let n2 = self.declare_local(fs, &v.name, &ty, memory, &v.loc);
                    let info = fs.locals[&n2].clone();
                    self.init_var(fs, v, &VarRef::Local(n2), &info)?;
                }
            }
            StmtKind::If(c, t, e) => {
                let cv = self.cond(fs, c)?;
                let else_l = fs.label();
                let end_l = fs.label();
                fs.goto(else_l, Some(GExpr::not(cv)), loc);
                self.nested(fs, t, end)?;
                if let Some(e) = e {
                    fs.goto(end_l, None, loc);
                    fs.place(else_l);
                    self.nested(fs, e, end)?;
                } else {
                    fs.place(else_l);
                }
                fs.place(end_l);
            }
            StmtKind::While(c, b) => {
                let head = fs.label();
                let exit = fs.label();
                fs.place(head);
                let cv = self.cond(fs, c)?;
                fs.goto(exit, Some(GExpr::not(cv)), &c.loc);
                fs.loops.push(LoopCtx {
                    brk: exit,
                    cont: head,
                    depth: fs.scopes.len(),
                });
                let r = self.nested(fs, b, end);
                fs.loops.pop();
                r?;
                fs.goto(head, None, loc);
                fs.place(exit);
            }
            StmtKind::DoWhile(b, c) => {
                let head = fs.label();
                let check = fs.label();
                let exit = fs.label();
                fs.place(head);
                fs.loops.push(LoopCtx {
                    brk: exit,
                    cont: check,
                    depth: fs.scopes.len(),
                });
                let r = self.nested(fs, b, end);
                fs.loops.pop();
                r?;
                fs.place(check);
                let cv = self.cond(fs, c)?;
                fs.goto(head, Some(cv), &c.loc);
                fs.place(exit);
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                fs.scopes.push(vec![]);
                fs.names.push(HashMap::new());
                let r = (|| {
                    if let Some(i) = init {
                        self.stmt(fs, i, end)?;
                    }
                    let head = fs.label();
                    let cont = fs.label();
                    let exit = fs.label();
                    fs.place(head);
                    if let Some(c) = cond {
                        let cv = self.cond(fs, c)?;
                        fs.goto(exit, Some(GExpr::not(cv)), &c.loc);
                    }
                    fs.loops.push(LoopCtx {
                        brk: exit,
                        cont,
                        depth: fs.scopes.len(),
                    });
                    let r = self.nested(fs, body, end);
                    fs.loops.pop();
                    r?;
                    fs.place(cont);
                    if let Some(st) = step {
                        self.effect(fs, st)?;
                    }
                    fs.goto(head, None, loc);
                    fs.place(exit);
                    let d = fs.scopes.len() - 1;
                    self.cleanup_scope(fs, d, loc);
                    Ok(())
                })();
                fs.scopes.pop();
                fs.names.pop();
                r?;
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) if *e.ty() != Type::Void => {
                        let v = self.rv(fs, e)?;
                        let needs_tmp = !matches!(v, GExpr::Int(_) | GExpr::Bool(_) | GExpr::Null)
                            && fs.scopes.iter().flatten().next().is_some();
                        if needs_tmp {
                            let t = fs.temp("tmp", e.ty().clone(), loc);
                            let s = v.sort();
                            fs.emit(Instr::Assign(LValue::Var(VarRef::Local(t.clone()), s), v), loc);
                            Some(GExpr::Var(VarRef::Local(t), s))
                        } else {
                            Some(v)
                        }
                    }
                    Some(e) => {
                        self.effect(fs, e)?;
                        None
                    }
                    None => None,
                };
                self.cleanup_to(fs, 0, loc);
                fs.emit(Instr::Return(v), loc);
            }
            StmtKind::Break | StmtKind::Continue => {
                let l = fs.loops.last().unwrap();
                let (target, depth) = if matches!(s.kind, StmtKind::Break) {
                    (l.brk, l.depth)
                } else {
                    (l.cont, l.depth)
                };
                self.cleanup_to(fs, depth, loc);
                fs.goto(target, None, loc);
            }
            StmtKind::Assert { cond, text } => {
                let cv = self.cond(fs, cond)?;
                let prop = self.add_prop(PropKind::Assertion, loc, &fs.display.clone(), format!("assertion {}", text.0), &cv);
                fs.emit(Instr::Assert { cond: cv, prop }, loc);
            }
            StmtKind::Assume(c) => {
                let cv = self.cond(fs, c)?;
                fs.emit(Instr::Assume(cv), loc);
            }
        }
        Ok(())
    }

    // ---- expressions ----

    fn cond(&mut self, fs: &mut FnState, e: &Expr) -> R<GExpr> {
        Ok(self.rv(fs, e)?.truth())
    }

    /// Evaluates `e` for its side effects.
    fn effect(&mut self, fs: &mut FnState, e: &Expr) -> R<()> {
        match &e.kind {
            ExprKind::Unary(UnOp::PostInc, a) => self.incdec(fs, a, BinOp::Add, false, &e.loc).map(|_| ()),
            ExprKind::Unary(UnOp::PostDec, a) => self.incdec(fs, a, BinOp::Sub, false, &e.loc).map(|_| ()),
            ExprKind::Assign(..) => self.assign(fs, e, false).map(|_| ()),
            _ => self.rv(fs, e).map(|_| ()),
        }
    }

    fn src(e: &Expr) -> String {
        print_expr(e)
    }

    fn check_ptr(&mut self, fs: &mut FnState, p: &GExpr, what: &Expr) {
        if !self.opts.memory || matches!(p, GExpr::ObjAddr(_)) {
            return;
        }
        let text = Self::src(what);
        let loc = what.loc.clone();
        self.check(
            fs,
            PropKind::Pointer,
            GExpr::bin(BinOp::Ne, p.clone(), GExpr::Null),
            format!("dereference failure: pointer NULL in {text}"),
            &loc,
        );
        self.check(
            fs,
            PropKind::Pointer,
            GExpr::un(GUnOp::IsAlive, p.clone()),
            format!("dereference failure: dead object in {text}"),
            &loc,
        );
    }

    /// Address of an lvalue expression of any type.
    fn addr(&mut self, fs: &mut FnState, e: &Expr) -> R<GExpr> {
        match self.place(fs, e)? {
            LValue::Mem(a, _) => Ok(a),
            LValue::Var(v, _) => Err(Diagnostic::error(
                e.loc.clone(),
                format!("internal: `{}` is not stored in memory", v.name()),
            )),
        }
    }

    fn var_place(&self, fs: &FnState, name: &str, res: &Option<Res>, ty: &Type) -> LValue {
        let s = sort_of(ty);
        match res {
            Some(Res::Local) => {
                let n = fs.lookup(name).cloned().unwrap_or_else(|| name.to_string());
                let vr = VarRef::Local(n.clone());
                if fs.refs.contains(&n) {
                    LValue::Mem(GExpr::Var(vr, Sort::Ptr), s)
                } else if fs.locals.get(&n).is_some_and(|l| l.memory.is_some()) {
                    LValue::Mem(GExpr::ObjAddr(vr), s)
                } else {
                    LValue::Var(vr, s)
                }
            }
            _ => {
                let vr = VarRef::Global(name.to_string());
                if self.globals.get(name).is_some_and(|g| g.memory.is_some()) {
                    LValue::Mem(GExpr::ObjAddr(vr), s)
                } else {
                    LValue::Var(vr, s)
                }
            }
        }
    }

    fn place(&mut self, fs: &mut FnState, e: &Expr) -> R<LValue> {
        let s = sort_of(e.ty());
        match &e.kind {
            ExprKind::Ident { name, res, .. } => Ok(self.var_place(fs, name, res, e.ty())),
            ExprKind::Unary(UnOp::Deref, p) => {
                let pv = self.rv(fs, p)?;
                self.check_ptr(fs, &pv, e);
                Ok(LValue::Mem(pv, s))
            }
            ExprKind::Member {
                base,
                arrow,
                name,
                owner,
            } => {
                let (bp, static_class) = if *arrow {
                    let bp = self.rv(fs, base)?;
                    self.check_ptr(fs, &bp, e);
                    (bp, base.ty().pointee().and_then(|t| t.class_name()).unwrap().to_string())
                } else {
                    (self.addr(fs, base)?, base.ty().class_name().unwrap().to_string())
                };
                let owner = owner.clone().unwrap();
                let bp = self.upcast(bp, &static_class, &owner, false);
                let off = self.om.layouts.class(&owner).fields[name];
                Ok(LValue::Mem(
                    GExpr::offset(bp, GExpr::Word(off as i64), Hint::Field(name.clone())),
                    s,
                ))
            }
            ExprKind::Index(a, i) => {
                let iv = self.rv(fs, i)?;
                let elem = e.ty().clone();
                let stride = self.layout_size(&elem) as i64;
                let (base, bound) = match a.ty() {
                    Type::Array(_, n) => (self.addr(fs, a)?, Some(*n)),
                    _ => {
                        let p = self.rv(fs, a)?;
                        self.check_ptr(fs, &p, e);
                        (p, None)
                    }
                };
                let word_i = GExpr::un(GUnOp::IntToWord, iv.clone());
                if self.opts.bounds {
                    let text = Self::src(e);
                    let (lower, upper, what) = match bound {
                        Some(n) => (
                            GExpr::bin(BinOp::Ge, iv.clone(), GExpr::Int(0)),
                            GExpr::bin(BinOp::Lt, word_i.clone(), GExpr::Word(n as i64)),
                            format!("array '{}'", Self::src(a)),
                        ),
                        None => {
                            let pos = GExpr::bin(
                                BinOp::Add,
                                GExpr::un(GUnOp::OffsetOf, base.clone()),
                                GExpr::bin(BinOp::Mul, word_i.clone(), GExpr::Word(stride)),
                            );
                            (
                                GExpr::bin(BinOp::Ge, pos.clone(), GExpr::Word(0)),
                                GExpr::bin(
                                    BinOp::Le,
                                    GExpr::bin(BinOp::Add, pos, GExpr::Word(stride)),
                                    GExpr::un(GUnOp::ObjectSize, base.clone()),
                                ),
                                "dynamic object".to_string(),
                            )
                        }
                    };
                    self.check(fs, PropKind::Bounds, lower, format!("{what} lower bound in {text}"), &e.loc);
                    self.check(fs, PropKind::Bounds, upper, format!("{what} upper bound in {text}"), &e.loc);
                }
                let delta = if stride == 1 {
                    word_i
                } else {
                    GExpr::bin(BinOp::Mul, word_i, GExpr::Word(stride))
                };
                Ok(LValue::Mem(GExpr::offset(base, delta, Hint::Index(Box::new(iv))), s))
            }
            ExprKind::Cast { expr, .. } if matches!(e.ty(), Type::Class(_)) => {
                let from = expr.ty().class_name().unwrap().to_string();
                let to = e.ty().class_name().unwrap().to_string();
                let a = self.addr(fs, expr)?;
                Ok(LValue::Mem(self.upcast(a, &from, &to, false), s))
            }
            _ => Err(Diagnostic::error(e.loc.clone(), "internal: expression is not an lvalue")),
        }
    }

    /// Converts a pointer to `from` into a pointer to its `to` base.
    fn upcast(&self, p: GExpr, from: &str, to: &str, nullable: bool) -> GExpr {
        if from == to {
            return p;
        }
        let path = self.syms.base_path(from, to).expect("upcast to a non-base");
        let mut cur = p.clone();
        let mut trivial = true;
        for (x, y, is_virtual) in path {
            if is_virtual {
                let slot = self.om.layouts.class(&x).vbase_ptrs[&y];
                cur = GExpr::load(
                    GExpr::offset(cur, GExpr::Word(slot as i64), Hint::Field(format!("{y}@vbase"))),
                    Sort::Ptr,
                );
                trivial = false;
            } else {
                let off = self.om.layouts.class(&x).nv_bases[&y];
                trivial &= off == 0;
                cur = GExpr::offset(cur, GExpr::Word(off as i64), Hint::Cast(format!("{y}*")));
            }
        }
        if nullable && !trivial {
            GExpr::ite(GExpr::bin(BinOp::Eq, p, GExpr::Null), GExpr::Null, cur)
        } else {
            cur
        }
    }

    fn ptr_cast(&self, p: GExpr, from: &Type, to: &Type) -> GExpr {
        let (Some(fc), Some(tc)) = (
            from.pointee().and_then(|t| t.class_name()),
            to.pointee().and_then(|t| t.class_name()),
        ) else {
            return p;
        };
        if self.syms.derives_from(fc, tc) {
            return self.upcast(p, fc, tc, true);
        }
        // Downcast along non-virtual edges.
        let off = self.om.layouts.nv_offset(tc, fc).unwrap_or(0) as i64;
        let adjusted = GExpr::offset(p.clone(), GExpr::Word(-off), Hint::Cast(format!("{tc}*")));
        if off == 0 {
            adjusted
        } else {
            GExpr::ite(GExpr::bin(BinOp::Eq, p, GExpr::Null), GExpr::Null, adjusted)
        }
    }

    fn convert(&self, v: GExpr, from: &Type, to: &Type) -> GExpr {
        match (from, to) {
            _ if from == to => v,
            (Type::Int, Type::Bool) | (Type::Pointer(_), Type::Bool) => v.truth(),
            (Type::Bool, Type::Int) => GExpr::un(GUnOp::BoolToInt, v),
            (Type::Null, _) => GExpr::Null,
            (Type::Pointer(_), Type::Pointer(_)) => self.ptr_cast(v, from, to),
            _ => v,
        }
    }

    fn args(&mut self, fs: &mut FnState, params: &[Type], args: &[Expr]) -> R<Vec<GExpr>> {
        let mut out = Vec::new();
        for (a, p) in args.iter().zip(params) {
            out.push(match p {
                Type::Reference(_) | Type::Class(_) => self.addr(fs, a)?,
                _ => self.rv(fs, a)?,
            });
        }
        Ok(out)
    }

    fn overflow_check(&mut self, fs: &mut FnState, op: BinOp, a: &GExpr, b: &GExpr, e: &Expr) {
        if !self.opts.overflow {
            return;
        }
        let text = Self::src(e);
        if matches!(op, BinOp::Div | BinOp::Rem) {
            self.check(
                fs,
                PropKind::DivByZero,
                GExpr::bin(BinOp::Ne, b.clone(), GExpr::Int(0)),
                format!("division by zero in {text}"),
                &e.loc,
            );
        }
        let cond = GExpr::not(GExpr::Overflow(op, Box::new(a.clone()), Box::new(b.clone())));
        let opname = if op == BinOp::Sub && matches!(a, GExpr::Int(0)) && matches!(e.kind, ExprKind::Unary(..)) {
            "unary -"
        } else {
            op.symbol()
        };
        self.check(
            fs,
            PropKind::Overflow,
            cond,
            format!("arithmetic overflow on signed {opname} in {text}"),
            &e.loc,
        );
    }

    fn incdec(&mut self, fs: &mut FnState, a: &Expr, op: BinOp, pre: bool, loc: &SourceLoc) -> R<GExpr> {
        let pl = self.place(fs, a)?;
        let old = pl.read();
        let whole = Expr::typed(
            ExprKind::Unary(if op == BinOp::Add { UnOp::PostInc } else { UnOp::PostDec }, Box::new(a.clone())),
            loc.clone(),
            Type::Int,
        );
        self.overflow_check(fs, op, &old, &GExpr::Int(1), &whole);
        let result = if pre {
            None
        } else {
            let t = fs.temp("tmp", Type::Int, loc);
            fs.emit(Instr::Assign(LValue::Var(VarRef::Local(t.clone()), Sort::Int), old.clone()), loc);
            Some(GExpr::Var(VarRef::Local(t), Sort::Int))
        };
        fs.emit(Instr::Assign(pl.clone(), GExpr::bin(op, old, GExpr::Int(1))), loc);
        Ok(result.unwrap_or_else(|| pl.read()))
    }

    fn assign(&mut self, fs: &mut FnState, e: &Expr, want: bool) -> R<GExpr> {
        let ExprKind::Assign(op, l, r) = &e.kind else { unreachable!() };
        if let Type::Class(c) = l.ty() {
            let src = self.addr(fs, r)?;
            let dst = self.addr(fs, l)?;
            let layout = self.om.layouts.class(c).clone();
            for (i, s) in layout.slots.iter().enumerate() {
                let sort = match s.kind {
                    SlotKind::Int => Sort::Int,
                    SlotKind::Bool => Sort::Bool,
                    SlotKind::Ptr => Sort::Ptr,
                    SlotKind::Vptr(_) | SlotKind::VbasePtr(_) => continue,
                };
                let d = GExpr::offset(dst.clone(), GExpr::Word(i as i64), Hint::Plain);
                let sv = GExpr::load(GExpr::offset(src.clone(), GExpr::Word(i as i64), Hint::Plain), sort);
                fs.emit(Instr::Assign(LValue::Mem(d, sort), sv), &e.loc);
            }
            return Ok(dst);
        }
        let v = self.rv(fs, r)?;
        let pl = self.place(fs, l)?;
        let v = match op {
            None => v,
            Some(op) => {
                let old = pl.read();
                self.overflow_check(fs, *op, &old, &v, e);
                GExpr::bin(*op, old, v)
            }
        };
        fs.emit(Instr::Assign(pl.clone(), v), &e.loc);
        Ok(if want { pl.read() } else { GExpr::Int(0) })
    }

    fn rv(&mut self, fs: &mut FnState, e: &Expr) -> R<GExpr> {
        let loc = &e.loc;
        Ok(match &e.kind {
            ExprKind::IntLit(v) => GExpr::Int(*v as i64),
            ExprKind::BoolLit(b) => GExpr::Bool(*b),
            ExprKind::Null => GExpr::Null,
            ExprKind::This => GExpr::Var(VarRef::Local("this".into()), Sort::Ptr),
            ExprKind::Ident { .. } | ExprKind::Member { .. } | ExprKind::Index(..) | ExprKind::Unary(UnOp::Deref, _) => {
                let pl = self.place(fs, e)?;
                match e.ty() {
                    Type::Class(_) | Type::Array(..) => match pl {
                        LValue::Mem(a, _) => a,
                        LValue::Var(v, s) => GExpr::Var(v, s),
                    },
                    _ => pl.read(),
                }
            }
            ExprKind::Scoped { .. } => return Err(Diagnostic::error(loc.clone(), "internal: scoped name as value")),
            ExprKind::Unary(op, a) => match op {
                UnOp::Neg => {
                    if let ExprKind::IntLit(v) = a.kind {
                        return Ok(GExpr::Int(-(v as i64)));
                    }
                    let av = self.rv(fs, a)?;
                    self.overflow_check(fs, BinOp::Sub, &GExpr::Int(0), &av, e);
                    GExpr::un(GUnOp::Neg, av)
                }
                UnOp::Not => GExpr::not(self.rv(fs, a)?.truth()),
                UnOp::AddrOf => self.addr(fs, a)?,
                UnOp::PreInc => self.incdec(fs, a, BinOp::Add, true, loc)?,
                UnOp::PreDec => self.incdec(fs, a, BinOp::Sub, true, loc)?,
                UnOp::PostInc => self.incdec(fs, a, BinOp::Add, false, loc)?,
                UnOp::PostDec => self.incdec(fs, a, BinOp::Sub, false, loc)?,
                UnOp::Deref => unreachable!(),
            },
            ExprKind::Binary(op, a, b) if matches!(op, BinOp::And | BinOp::Or) => {
                let av = self.rv(fs, a)?.truth();
                let mark = fs.body.len();
                let first_label = fs.labels.len();
                let bv = self.rv(fs, b)?.truth();
                if fs.body.len() == mark {
                    GExpr::bin(*op, av, bv)
                } else {
                    // The right operand has effects: evaluate it only when needed.
                    let tail: Vec<Inst> = fs.body.drain(mark..).collect();
                    let t = fs.temp("tmp", Type::Bool, loc);
                    let tv = LValue::Var(VarRef::Local(t.clone()), Sort::Bool);
                    fs.emit(Instr::Assign(tv.clone(), av), loc);
                    let skip = fs.label();
                    let c = if *op == BinOp::And { GExpr::not(tv.read()) } else { tv.read() };
                    fs.goto(skip, Some(c), loc);
                    let shift = fs.body.len() - mark;
                    for l in fs.labels[first_label..].iter_mut().flatten() {
                        {
                            *l += shift;
                        }
                    }
                    fs.body.extend(tail);
                    fs.emit(Instr::Assign(tv.clone(), bv), loc);
                    fs.place(skip);
                    tv.read()
                }
            }
            ExprKind::Binary(op, a, b) => {
                let av = self.rv(fs, a)?;
                let bv = self.rv(fs, b)?;
                if op.is_arith() {
                    self.overflow_check(fs, *op, &av, &bv, e);
                }
                GExpr::bin(*op, av, bv)
            }
            ExprKind::Assign(..) => self.assign(fs, e, true)?,
            ExprKind::Call { .. } => self.call(fs, e)?,
            ExprKind::New {
                args,
                array_len,
                ctor,
                ..
            } => {
                let elem = e.ty().pointee().unwrap().clone();
                let (size, tag, what) = match array_len {
                    Some(n) => {
                        let nv = self.rv(fs, n)?;
                        if self.opts.memory {
                            self.check(
                                fs,
                                PropKind::Memory,
                                GExpr::bin(BinOp::Ge, nv.clone(), GExpr::Int(0)),
                                format!("array size is negative in {}", Self::src(e)),
                                loc,
                            );
                        }
                        (GExpr::un(GUnOp::IntToWord, nv), 2, format!("{elem}[]"))
                    }
                    None => match &elem {
                        Type::Class(c) => (
                            GExpr::Word(self.layout_size(&elem) as i64),
                            3 + self.class_ids[c],
                            c.clone(),
                        ),
                        _ => (GExpr::Word(1), 1, elem.to_string()),
                    },
                };
                let t = fs.temp("new_object", e.ty().clone(), loc);
                let lhs = LValue::Var(VarRef::Local(t.clone()), Sort::Ptr);
                fs.emit(
                    Instr::Call {
                        lhs: Some(lhs.clone()),
                        target: CallTarget::Alloc { size, tag, what },
                        args: vec![],
                    },
                    loc,
                );
                let obj = lhs.read();
                match (&elem, ctor) {
                    (Type::Class(_), Some(c)) => self.call_ctor(fs, c, obj.clone(), args, false, loc)?,
                    (_, _) if array_len.is_none() => {
                        let v = match args.first() {
                            Some(a) => self.rv(fs, a)?,
                            None => zero(sort_of(&elem)),
                        };
                        fs.emit(Instr::Assign(LValue::Mem(obj.clone(), sort_of(&elem)), v), loc);
                    }
                    _ => {}
                }
                obj
            }
            ExprKind::Delete { expr, array } => {
                self.delete(fs, expr, *array, e)?;
                GExpr::Int(0)
            }
            ExprKind::Cast { expr, .. } => {
                if let Type::Class(_) = e.ty() {
                    return self.addr(fs, e);
                }
                let v = self.rv(fs, expr)?;
                self.convert(v, expr.ty(), e.ty())
            }
        })
    }

    fn delete(&mut self, fs: &mut FnState, p: &Expr, array: bool, whole: &Expr) -> R<()> {
        let loc = &whole.loc;
        let pv0 = self.rv(fs, p)?;
        let t = fs.temp("tmp", p.ty().clone(), loc);
        let tl = LValue::Var(VarRef::Local(t), Sort::Ptr);
        fs.emit(Instr::Assign(tl.clone(), pv0), loc);
        let pv = tl.read();
        let done = fs.label();
        fs.goto(done, Some(GExpr::bin(BinOp::Eq, pv.clone(), GExpr::Null)), loc);
        let pointee = p.ty().pointee().unwrap().clone();
        let text = Self::src(whole);
        let virtual_dtor = match &pointee {
            Type::Class(c) => self.syms.dtor(c).is_some_and(|d| d.is_virtual),
            _ => false,
        };
        let start = GExpr::offset(
            pv.clone(),
            GExpr::un(GUnOp::Neg, GExpr::un(GUnOp::OffsetOf, pv.clone())),
            Hint::Plain,
        );
        let freed = if virtual_dtor { start } else { pv.clone() };
        if self.opts.memory {
            let tag = GExpr::un(GUnOp::DynTag, pv.clone());
            self.check(
                fs,
                PropKind::Memory,
                GExpr::bin(BinOp::Ne, tag.clone(), GExpr::Word(0)),
                format!("delete argument must be a dynamic object in {text}"),
                loc,
            );
            self.check(
                fs,
                PropKind::Memory,
                GExpr::un(GUnOp::IsAlive, pv.clone()),
                format!("double free in {text}"),
                loc,
            );
            if !virtual_dtor {
                self.check(
                    fs,
                    PropKind::Memory,
                    GExpr::bin(BinOp::Eq, GExpr::un(GUnOp::OffsetOf, pv.clone()), GExpr::Word(0)),
                    format!("delete argument has offset zero in {text}"),
                    loc,
                );
            }
            let is_array = GExpr::bin(BinOp::Eq, tag.clone(), GExpr::Word(2));
            let (cond, what) = if array {
                (is_array, "delete[] of an object not allocated by new[]")
            } else {
                (GExpr::not(is_array), "delete of an object allocated by new[]")
            };
            self.check(fs, PropKind::Memory, cond, format!("{what} in {text}"), loc);
            if let (Type::Class(c), false) = (&pointee, virtual_dtor) {
                let want = 3 + self.class_ids[c] as i64;
                self.check(
                    fs,
                    PropKind::Memory,
                    GExpr::bin(BinOp::Eq, tag, GExpr::Word(want)),
                    format!("delete through pointer to base without virtual destructor in {text}"),
                    loc,
                );
            }
        }
        if let Type::Class(c) = &pointee {
            if let Some(d) = self.syms.dtor(c).map(|f| f.mangled.clone()) {
                if virtual_dtor {
                    self.virtual_call(fs, &d, pv.clone(), c, vec![], None, loc);
                } else {
                    fs.emit(
                        Instr::Call {
                            lhs: None,
                            target: CallTarget::Direct(d),
                            args: vec![pv.clone()],
                        },
                        loc,
                    );
                }
            }
        }
        fs.emit(
            Instr::Call {
                lhs: None,
                target: CallTarget::Free(freed),
                args: vec![],
            },
            loc,
        );
        fs.place(done);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn virtual_call(
        &mut self,
        fs: &mut FnState,
        m: &str,
        recv: GExpr,
        static_class: &str,
        args: Vec<GExpr>,
        lhs: Option<LValue>,
        loc: &SourceLoc,
    ) {
        let (_, root, index) = vtable::dispatch_slot(self.syms, &self.om.layouts, m);
        let r = self.upcast(recv, static_class, &root, false);
        let vptr = GExpr::offset(r.clone(), GExpr::Word(0), Hint::Field(format!("{root}@vptr")));
        let mut a = vec![r];
        a.extend(args);
        let method = self.syms.function(m).name.clone();
        fs.emit(
            Instr::Call {
                lhs,
                target: CallTarget::Virtual {
                    vptr,
                    root,
                    index,
                    method,
                },
                args: a,
            },
            loc,
        );
    }

    fn ret_temp(&mut self, fs: &mut FnState, ty: &Type, loc: &SourceLoc) -> Option<LValue> {
        if *ty == Type::Void {
            return None;
        }
        let t = fs.temp("return_value", ty.clone(), loc);
        Some(LValue::Var(VarRef::Local(t), sort_of(ty)))
    }

    fn call(&mut self, fs: &mut FnState, e: &Expr) -> R<GExpr> {
        let ExprKind::Call { callee, args, res } = &e.kind else { unreachable!() };
        let loc = &e.loc;
        let res = res.clone().expect("unresolved call");
        let out = |l: &Option<LValue>| l.as_ref().map(|l| l.read()).unwrap_or(GExpr::Int(0));
        match res {
            CallRes::Builtin(b) => {
                let ty = if b == Builtin::NondetInt { Type::Int } else { Type::Bool };
                let lhs = self.ret_temp(fs, &ty, loc);
                let target = CallTarget::Nondet(sort_of(&ty));
                fs.emit(
                    Instr::Call {
                        lhs: lhs.clone(),
                        target,
                        args: vec![],
                    },
                    loc,
                );
                Ok(out(&lhs))
            }
            CallRes::Function(m) => {
                let info = self.syms.function(&m).clone();
                let a = self.args(fs, &info.params, args)?;
                let lhs = self.ret_temp(fs, &info.ret, loc);
                fs.emit(
                    Instr::Call {
                        lhs: lhs.clone(),
                        target: CallTarget::Direct(m),
                        args: a,
                    },
                    loc,
                );
                Ok(out(&lhs))
            }
            CallRes::Method {
                mangled,
                class: owner,
                virtual_dispatch,
            } => {
                let info = self.syms.function(&mangled).clone();
                let (recv, static_class) = match &callee.kind {
                    ExprKind::Member { base, arrow, .. } => {
                        if *arrow {
                            let p = self.rv(fs, base)?;
                            let sc = base.ty().pointee().and_then(|t| t.class_name()).unwrap().to_string();
                            (p, sc)
                        } else {
                            let sc = base.ty().class_name().unwrap().to_string();
                            (self.addr(fs, base)?, sc)
                        }
                    }
                    _ => (
                        GExpr::Var(VarRef::Local("this".into()), Sort::Ptr),
                        fs.class.clone().unwrap(),
                    ),
                };
                let a = self.args(fs, &info.params, args)?;
                let lhs = self.ret_temp(fs, &info.ret, loc);
                if virtual_dispatch {
                    self.check_ptr(fs, &recv, callee);
                    self.virtual_call(fs, &mangled, recv, &static_class, a, lhs.clone(), loc);
                } else {
                    let this = self.upcast(recv, &static_class, &owner, false);
                    let mut all = vec![this];
                    all.extend(a);
                    fs.emit(
                        Instr::Call {
                            lhs: lhs.clone(),
                            target: CallTarget::Direct(mangled),
                            args: all,
                        },
                        loc,
                    );
                }
                Ok(out(&lhs))
            }
        }
    }
}

fn zero(s: Sort) -> GExpr {
    match s {
        Sort::Int => GExpr::Int(0),
        Sort::Bool => GExpr::Bool(false),
        Sort::Ptr => GExpr::Null,
        Sort::Word => GExpr::Word(0),
    }
}

/// Gives every function that can call itself a recursion-bound property.
fn add_recursion_props(p: &mut GotoProgram, locs: &HashMap<String, SourceLoc>) {
    let names: Vec<String> = p.functions.keys().cloned().collect();
    let mut edges: HashMap<String, Vec<String>> = HashMap::new();
    for (n, f) in &p.functions {
        let mut out = Vec::new();
        for inst in &f.body {
            if let Instr::Call { target, .. } = &inst.instr {
                match target {
                    CallTarget::Direct(g) => out.push(g.clone()),
                    CallTarget::Virtual { root, index, .. } => {
                        for id in p.slot_candidates(root, *index) {
                            if let Some(g) = p.fn_by_id(id) {
                                out.push(g.to_string());
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        edges.insert(n.clone(), out);
    }
    for n in names {
        // Reachability from each callee back to `n`.
        let mut seen = HashSet::new();
        let mut work: Vec<String> = edges[&n].clone();
        let mut cyclic = false;
        while let Some(g) = work.pop() {
            if g == n {
                cyclic = true;
                break;
            }
            if seen.insert(g.clone()) {
                if let Some(next) = edges.get(&g) {
                    work.extend(next.iter().cloned());
                }
            }
        }
        if cyclic {
            let f = p.functions.get_mut(&n).unwrap();
            let loc = locs.get(&n).cloned().unwrap_or_else(SourceLoc::builtin);
            p.properties.push(Property {
                kind: PropKind::Recursion,
                loc,
                function: f.display.clone(),
                description: format!("recursion unwinding assertion {}", f.display),
                claim: "false".into(),
            });
            f.recursion_prop = Some(p.properties.len() - 1);
        }
    }
}
