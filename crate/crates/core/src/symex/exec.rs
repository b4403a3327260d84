//! Guarded single-pass symbolic execution with path merging.
//!
//! Every GOTO function is executed once per call site. Forward jumps
//! create pending states that are merged when execution reaches their
//! target; backward jumps are followed up to the unwinding bound. Memory is
//! one array from pointers to words plus per-object arrays for liveness,
//! size and allocation tag.

use std::collections::{BTreeMap, HashMap, HashSet};

use cxxbmc_solver::{Node, Sort as TSort, Term, TermStore};
use thiserror::Error;

use super::system::*;
use crate::frontend::ast::{BinOp, SourceLoc};
use crate::goto::*;

pub const OBJ_SHIFT: u32 = 24;
pub const MAX_OBJECTS: u32 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymexConfig {
    pub unwind: u32,
    pub unwinding_assertions: bool,
    /// Width of `int`; at most 32.
    pub int_width: u32,
    /// Substitute constant right-hand sides instead of their SSA symbols.
    pub propagate: bool,
}

impl Default for SymexConfig {
    fn default() -> Self {
        SymexConfig {
            unwind: 10,
            unwinding_assertions: false,
            int_width: 32,
            propagate: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymexError {
    #[error("missing entry function `{0}`")]
    MissingEntry(String),
    #[error("more than {MAX_OBJECTS} objects would be needed")]
    TooManyObjects,
}

type R<T> = Result<T, SymexError>;

#[derive(Clone)]
struct State {
    guard: Vec<Term>,
    regs: HashMap<String, Term>,
    mem: Term,
    alive: Term,
    size: Term,
    tag: Term,
    ret: Option<Term>,
}

struct Frame<'p> {
    id: u32,
    func: &'p GFunction,
    /// Activation depth of this function, used to reuse local objects.
    depth: usize,
}

pub struct Symex<'p> {
    prog: &'p GotoProgram,
    cfg: SymexConfig,
    st: TermStore,
    equations: Vec<Equation>,
    properties: Vec<PropInstance>,
    nondets: Vec<NondetInput>,
    next_obj: u32,
    local_objs: HashMap<(String, String, usize), u32>,
    global_objs: HashMap<String, u32>,
    counters: HashMap<String, u32>,
    next_frame: u32,
    main_frame: u32,
    stack: Vec<String>,
    globals: HashSet<String>,
    reg_sorts: HashMap<String, Sort>,
}

pub fn symex(prog: &GotoProgram, cfg: SymexConfig) -> R<SsaSystem> {
    assert!(cfg.int_width >= 2 && cfg.int_width <= 32);
    let mut sx = Symex {
        prog,
        cfg,
        st: TermStore::new(),
        equations: vec![],
        properties: vec![],
        nondets: vec![],
        next_obj: 1,
        local_objs: HashMap::new(),
        global_objs: HashMap::new(),
        counters: HashMap::new(),
        next_frame: 0,
        main_frame: 1,
        stack: vec![],
        globals: prog.globals.keys().cloned().collect(),
        reg_sorts: HashMap::new(),
    };
    let main = prog
        .functions
        .get(MAIN)
        .ok_or_else(|| SymexError::MissingEntry(MAIN.into()))?;
    let mut s = sx.initial_state()?;
    if let Some(init) = prog.functions.get(INIT) {
        let loc = init.body[0].loc.clone();
        match sx.call(s, INIT, vec![], None, &loc)? {
            Some(next) => s = next,
            None => return Ok(sx.finish()),
        }
    }
    let loc = main.body[0].loc.clone();
    sx.main_frame = sx.next_frame;
    sx.call(s, MAIN, vec![], None, &loc)?;
    Ok(sx.finish())
}

fn is_propagable(st: &TermStore, t: Term, depth: u32) -> bool {
    if st.is_const(t) {
        return true;
    }
    match st.node(t) {
        Node::Ite(_, a, b) if depth > 0 => is_propagable(st, *a, depth - 1) && is_propagable(st, *b, depth - 1),
        _ => false,
    }
}

impl<'p> Symex<'p> {
    fn finish(self) -> SsaSystem {
        SsaSystem {
            store: self.st,
            equations: self.equations,
            properties: self.properties,
            nondets: self.nondets,
            int_width: self.cfg.int_width,
        }
    }

    fn word(&mut self, v: i64) -> Term {
        self.st.bv_signed(32, v)
    }

    fn obj_ptr(&mut self, obj: u32) -> Term {
        self.st.bv(32, (obj as u64) << OBJ_SHIFT)
    }

    fn new_object(&mut self) -> R<u32> {
        if self.next_obj > MAX_OBJECTS {
            return Err(SymexError::TooManyObjects);
        }
        self.next_obj += 1;
        Ok(self.next_obj - 1)
    }

    fn initial_state(&mut self) -> R<State> {
        let z32 = self.st.bv(32, 0);
        let z1 = self.st.bv(1, 0);
        let mut s = State {
            guard: vec![],
            regs: HashMap::new(),
            mem: self.st.const_array(32, z32),
            alive: self.st.const_array(8, z1),
            size: self.st.const_array(8, z32),
            tag: self.st.const_array(8, z32),
            ret: None,
        };
        for (_, entries) in &self.prog.vtables {
            let obj = self.new_object()?;
            let n = self.word(entries.len() as i64);
            self.define_object(&mut s, obj, n, 0);
            for (k, id) in entries.iter().enumerate() {
                let a = self.st.bv(32, ((obj as u64) << OBJ_SHIFT) | k as u64);
                let v = self.st.bv(32, *id as u64);
                s.mem = self.st.store(s.mem, a, v);
            }
        }
        for g in &self.prog.global_order {
            let info = &self.prog.globals[g];
            match info.memory {
                Some(n) => {
                    let obj = self.new_object()?;
                    let n = self.word(n as i64);
                    self.define_object(&mut s, obj, n, 0);
                    self.global_objs.insert(g.clone(), obj);
                }
                None => {
                    let z = self.zero(info.sort());
                    s.regs.insert(g.clone(), z);
                }
            }
        }
        Ok(s)
    }

    fn define_object(&mut self, s: &mut State, obj: u32, size: Term, tag: u32) {
        let o = self.st.bv(8, obj as u64);
        let one = self.st.bv(1, 1);
        let t = self.st.bv(32, tag as u64);
        s.alive = self.st.store(s.alive, o, one);
        s.size = self.st.store(s.size, o, size);
        s.tag = self.st.store(s.tag, o, t);
    }

    fn zero(&mut self, s: Sort) -> Term {
        match s {
            Sort::Int => self.st.bv(self.cfg.int_width, 0),
            Sort::Bool => self.st.ff(),
            Sort::Ptr | Sort::Word => self.st.bv(32, 0),
        }
    }

    fn term_sort(&self, s: Sort) -> TSort {
        match s {
            Sort::Int => TSort::BitVec(self.cfg.int_width),
            Sort::Bool => TSort::Bool,
            Sort::Ptr | Sort::Word => TSort::BitVec(32),
        }
    }

    fn guard_term(&mut self, s: &State) -> Term {
        self.st.and(&s.guard)
    }

    fn add_guard(&mut self, s: &mut State, c: Term) {
        match self.st.as_bool(c) {
            Some(true) => {}
            Some(false) => s.guard = vec![self.st.ff()],
            None => s.guard.push(c),
        }
    }

    fn is_live(&self, s: &State) -> bool {
        !s.guard.iter().any(|&g| self.st.as_bool(g) == Some(false))
    }

    fn reg_key(&self, fr: &Frame, v: &VarRef) -> String {
        match v {
            VarRef::Global(n) => n.clone(),
            VarRef::Local(n) if fr.id == self.main_frame && !self.globals.contains(n) => n.clone(),
            VarRef::Local(n) => format!("{n}@{}", fr.id),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn define(&mut self, s: &mut State, kind: EqKind, key: &str, var: &str, sort: Sort, value: Term, loc: &SourceLoc, function: &str) {
        self.reg_sorts.insert(key.to_string(), sort);
        let n = self.counters.entry(key.to_string()).or_insert(0);
        *n += 1;
        let n = *n;
        let sym = self.st.symbol(&format!("{key}!{n}"), self.st.sort(value));
        let guard = self.guard_term(s);
        self.equations.push(Equation {
            kind,
            sort,
            guard,
            lhs: Some(sym),
            name: format!("{key}#{n}"),
            var: var.to_string(),
            rhs: value,
            loc: loc.clone(),
            function: function.to_string(),
        });
        let v = if self.cfg.propagate && is_propagable(&self.st, value, 16) { value } else { sym };
        s.regs.insert(key.to_string(), v);
    }

    fn nondet(&mut self, s: &State, sort: Sort, loc: &SourceLoc) -> Term {
        let k = self.nondets.len() + 1;
        let sym = self.st.symbol(&format!("nondet!{k}"), self.term_sort(sort));
        let guard = self.st.and(&s.guard);
        self.nondets.push(NondetInput {
            symbol: sym,
            guard,
            loc: loc.clone(),
        });
        sym
    }

    // ---- merging ----

    fn merge(&mut self, a: State, b: State) -> State {
        if !self.is_live(&a) {
            return b;
        }
        if !self.is_live(&b) {
            return a;
        }
        let n = a.guard.iter().zip(&b.guard).take_while(|(x, y)| x == y).count();
        let ra = self.st.and(&a.guard[n..]);
        let rb = self.st.and(&b.guard[n..]);
        let mut guard = a.guard[..n].to_vec();
        let nra = self.st.not(ra);
        if nra != rb {
            let d = self.st.or2(ra, rb);
            if self.st.as_bool(d) != Some(true) {
                guard.push(d);
            }
        }
        let mut out = State {
            guard,
            regs: HashMap::new(),
            mem: self.st.ite(ra, a.mem, b.mem),
            alive: self.st.ite(ra, a.alive, b.alive),
            size: self.st.ite(ra, a.size, b.size),
            tag: self.st.ite(ra, a.tag, b.tag),
            ret: match (a.ret, b.ret) {
                (Some(x), Some(y)) => Some(self.st.ite(ra, x, y)),
                (x, y) => x.or(y),
            },
        };
        let mut keys: Vec<&String> = a.regs.keys().chain(b.regs.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut phis = Vec::new();
        for k in keys {
            match (a.regs.get(k), b.regs.get(k)) {
                (Some(&x), Some(&y)) if x != y => phis.push((k.clone(), x, y)),
                (Some(&x), _) | (None, Some(&x)) => {
                    out.regs.insert(k.clone(), x);
                }
                (None, None) => unreachable!(),
            }
        }
        for (k, x, y) in phis {
            let v = self.st.ite(ra, x, y);
            let var = k.split('@').next().unwrap().to_string();
            let sort = self.reg_sorts[&k];
            self.define(&mut out, EqKind::Phi, &k, &var, sort, v, &SourceLoc::builtin(), "");
        }
        out
    }

    // ---- memory ----

    fn ptr_add(&mut self, p: Term, d: Term) -> Term {
        if let Node::Ite(c, a, b) = self.st.node(p).clone() {
            if self.st.is_const(a) || self.st.is_const(b) || matches!(self.st.node(a), Node::Ite(..)) {
                let x = self.ptr_add(a, d);
                let y = self.ptr_add(b, d);
                return self.st.ite(c, x, y);
            }
        }
        let hi = self.st.extract(31, OBJ_SHIFT, p);
        let sum = self.st.bv_add(p, d);
        let lo = self.st.extract(OBJ_SHIFT - 1, 0, sum);
        self.st.concat(hi, lo)
    }

    fn obj_of(&mut self, p: Term) -> Term {
        self.st.extract(31, OBJ_SHIFT, p)
    }

    fn offset_of(&mut self, p: Term) -> Term {
        let lo = self.st.extract(OBJ_SHIFT - 1, 0, p);
        self.st.sign_ext(32 - OBJ_SHIFT, lo)
    }

    fn read(&mut self, arr: Term, idx: Term) -> Term {
        if let Node::Ite(c, a, b) = self.st.node(idx).clone() {
            let x = self.read(arr, a);
            let y = self.read(arr, b);
            return self.st.ite(c, x, y);
        }
        self.st.select(arr, idx)
    }

    fn write(&mut self, arr: Term, idx: Term, v: Term) -> Term {
        if let Node::Ite(c, a, b) = self.st.node(idx).clone() {
            let x = self.write(arr, a, v);
            let y = self.write(arr, b, v);
            return self.st.ite(c, x, y);
        }
        self.st.store(arr, idx, v)
    }

    fn to_mem(&mut self, v: Term, s: Sort) -> Term {
        match s {
            Sort::Int => self.st.resize_signed(v, 32),
            Sort::Bool => {
                let one = self.st.bv(32, 1);
                let z = self.st.bv(32, 0);
                self.st.ite(v, one, z)
            }
            Sort::Ptr | Sort::Word => v,
        }
    }

    fn from_mem(&mut self, v: Term, s: Sort) -> Term {
        match s {
            Sort::Int => self.st.resize_signed(v, self.cfg.int_width),
            Sort::Bool => {
                let z = self.st.bv(32, 0);
                self.st.neq(v, z)
            }
            Sort::Ptr | Sort::Word => v,
        }
    }

    fn local_object(&mut self, fr: &Frame, name: &str) -> R<u32> {
        let key = (fr.func.name.clone(), name.to_string(), fr.depth);
        if let Some(o) = self.local_objs.get(&key) {
            return Ok(*o);
        }
        let o = self.new_object()?;
        self.local_objs.insert(key, o);
        Ok(o)
    }

    // ---- expressions ----

    fn eval(&mut self, s: &State, fr: &Frame, e: &GExpr) -> R<Term> {
        let w = self.cfg.int_width;
        Ok(match e {
            GExpr::Int(v) => self.st.bv_signed(w, *v),
            GExpr::Bool(b) => self.st.bool_const(*b),
            GExpr::Word(v) => self.word(*v),
            GExpr::Null => self.st.bv(32, 0),
            GExpr::Var(v, sort) => {
                let k = self.reg_key(fr, v);
                match s.regs.get(&k) {
                    Some(t) => *t,
                    None => self.zero(*sort),
                }
            }
            GExpr::ObjAddr(v) => {
                let obj = match v {
                    VarRef::Global(n) => self.global_objs[n],
                    VarRef::Local(n) => self.local_object(fr, n)?,
                };
                self.obj_ptr(obj)
            }
            GExpr::Load(a, sort) => {
                let addr = self.eval(s, fr, a)?;
                let raw = self.read(s.mem, addr);
                self.from_mem(raw, *sort)
            }
            GExpr::Offset { base, delta, .. } => {
                let b = self.eval(s, fr, base)?;
                let d = self.eval(s, fr, delta)?;
                self.ptr_add(b, d)
            }
            GExpr::VtableAddr(name) => {
                let i = self.prog.vtable_index(name).expect("unknown vtable");
                self.obj_ptr(i as u32 + 1)
            }
            GExpr::Unary(op, a) => {
                let x = self.eval(s, fr, a)?;
                match op {
                    GUnOp::Neg => self.st.bv_neg(x),
                    GUnOp::Not => self.st.not(x),
                    GUnOp::BoolToInt => {
                        let one = self.st.bv(w, 1);
                        let z = self.st.bv(w, 0);
                        self.st.ite(x, one, z)
                    }
                    GUnOp::IntToWord => self.st.resize_signed(x, 32),
                    GUnOp::ObjectOf => {
                        let o = self.obj_of(x);
                        self.st.zero_ext(32 - 8, o)
                    }
                    GUnOp::OffsetOf => self.offset_of(x),
                    GUnOp::IsAlive => {
                        let o = self.obj_of(x);
                        let a = self.read(s.alive, o);
                        let one = self.st.bv(1, 1);
                        self.st.eq(a, one)
                    }
                    GUnOp::ObjectSize => {
                        let o = self.obj_of(x);
                        self.read(s.size, o)
                    }
                    GUnOp::DynTag => {
                        let o = self.obj_of(x);
                        self.read(s.tag, o)
                    }
                }
            }
            GExpr::Binary(op, a, b) => {
                let sort = a.sort();
                let x = self.eval(s, fr, a)?;
                let y = self.eval(s, fr, b)?;
                binary(&mut self.st, *op, sort, x, y)
            }
            GExpr::Overflow(op, a, b) => {
                let x = self.eval(s, fr, a)?;
                let y = self.eval(s, fr, b)?;
                overflow(&mut self.st, *op, x, y)
            }
            GExpr::Ite(c, a, b) => {
                let c = self.eval(s, fr, c)?;
                let x = self.eval(s, fr, a)?;
                let y = self.eval(s, fr, b)?;
                self.st.ite(c, x, y)
            }
        })
    }

    fn assign(&mut self, s: &mut State, fr: &Frame, lv: &LValue, v: Term, loc: &SourceLoc) -> R<()> {
        let printer = Printer { compact: true };
        match lv {
            LValue::Var(var, sort) => {
                let key = self.reg_key(fr, var);
                self.define(s, EqKind::Assign, &key, var.name(), *sort, v, loc, &fr.func.display);
            }
            LValue::Mem(a, sort) => {
                let addr = self.eval(s, fr, a)?;
                let mv = self.to_mem(v, *sort);
                s.mem = self.write(s.mem, addr, mv);
                let guard = self.guard_term(s);
                let text = printer.expr(&GExpr::load(a.clone(), *sort));
                self.equations.push(Equation {
                    kind: EqKind::Store,
                    sort: *sort,
                    guard,
                    lhs: None,
                    name: text.clone(),
                    var: text,
                    rhs: v,
                    loc: loc.clone(),
                    function: fr.func.display.clone(),
                });
            }
        }
        Ok(())
    }

    // ---- calls ----

    fn call(&mut self, mut s: State, name: &str, args: Vec<Term>, lhs: Option<(&Frame, &LValue)>, loc: &SourceLoc) -> R<Option<State>> {
        let Some(f) = self.prog.functions.get(name) else {
            // Functions without a body return an arbitrary value.
            if let Some((fr, lv)) = lhs {
                let v = self.nondet(&s, lv.sort(), loc);
                self.assign(&mut s, fr, lv, v, loc)?;
            }
            return Ok(Some(s));
        };
        let depth = self.stack.iter().filter(|n| *n == name).count();
        if depth > self.cfg.unwind as usize {
            if let (true, Some(p)) = (self.cfg.unwinding_assertions, f.recursion_prop) {
                let guard = self.guard_term(&s);
                let claim = self.st.ff();
                self.properties.push(PropInstance { prop: p, guard, claim });
            }
            return Ok(None);
        }
        let fr = Frame {
            id: self.next_frame,
            func: f,
            depth,
        };
        self.next_frame += 1;
        s.ret = None;
        for (p, a) in f.params.iter().zip(args) {
            let key = self.reg_key(&fr, &VarRef::Local(p.clone()));
            let sort = f.locals.get(p).map_or(Sort::Int, |l| l.sort());
            self.define(&mut s, EqKind::Param, &key, p, sort, a, loc, &f.display);
        }
        self.stack.push(name.to_string());
        let out = self.run_body(&fr, s);
        self.stack.pop();
        let Some(mut s) = out? else { return Ok(None) };
        if let (Some((cf, lv)), Some(r)) = (lhs, s.ret.take()) {
            self.assign(&mut s, cf, lv, r, loc)?;
        }
        Ok(Some(s))
    }

    fn run_body(&mut self, fr: &Frame, st: State) -> R<Option<State>> {
        let f = fr.func;
        let end = f.body.len() - 1;
        let mut pending: BTreeMap<usize, Vec<State>> = BTreeMap::new();
        let mut loops: HashMap<usize, u32> = HashMap::new();
        let mut cur = Some(st);
        let mut pc = 0;
        let mut back = false;
        loop {
            if let Some(list) = pending.remove(&pc) {
                for s in list {
                    cur = Some(match cur.take() {
                        None => s,
                        Some(c) => self.merge(c, s),
                    });
                }
            }
            let Some(mut s) = cur.take().filter(|s| self.is_live(s)) else {
                match pending.keys().next() {
                    Some(&p) => {
                        pc = p;
                        back = false;
                        continue;
                    }
                    None => return Ok(None),
                }
            };
            if !back {
                loops.remove(&pc);
            }
            back = false;
            let inst = &f.body[pc];
            let loc = &inst.loc;
            let mut next = pc + 1;
            match &inst.instr {
                Instr::EndFunction => return Ok(Some(s)),
                Instr::Skip => {}
                Instr::Decl(x) => {
                    if let Some(n) = f.locals.get(x).and_then(|l| l.memory) {
                        let obj = self.local_object(fr, x)?;
                        let n = self.word(n as i64);
                        self.define_object(&mut s, obj, n, 0);
                    }
                }
                Instr::Dead(x) => {
                    if f.locals.get(x).is_some_and(|l| l.memory.is_some()) {
                        let obj = self.local_object(fr, x)?;
                        let o = self.st.bv(8, obj as u64);
                        let z = self.st.bv(1, 0);
                        s.alive = self.st.store(s.alive, o, z);
                    }
                }
                Instr::Assign(lv, e) => {
                    let v = self.eval(&s, fr, e)?;
                    self.assign(&mut s, fr, lv, v, loc)?;
                }
                Instr::Assert { cond, prop } => {
                    let claim = self.eval(&s, fr, cond)?;
                    let guard = self.guard_term(&s);
                    self.properties.push(PropInstance { prop: *prop, guard, claim });
                }
                Instr::Assume(c) => {
                    let c = self.eval(&s, fr, c)?;
                    self.add_guard(&mut s, c);
                }
                Instr::Goto { target, cond, unwind } => {
                    let c = match cond {
                        Some(c) => self.eval(&s, fr, c)?,
                        None => self.st.tt(),
                    };
                    let nc = self.st.not(c);
                    if *target > pc {
                        let mut taken = s.clone();
                        self.add_guard(&mut taken, c);
                        if self.is_live(&taken) {
                            pending.entry(*target).or_default().push(taken);
                        }
                        self.add_guard(&mut s, nc);
                    } else {
                        let n = loops.entry(*target).or_insert(0);
                        *n += 1;
                        if *n <= self.cfg.unwind {
                            let mut stay = s.clone();
                            self.add_guard(&mut stay, nc);
                            if self.is_live(&stay) {
                                pending.entry(pc + 1).or_default().push(stay);
                            }
                            self.add_guard(&mut s, c);
                            next = *target;
                            back = true;
                        } else {
                            loops.remove(target);
                            if let (true, Some(p)) = (self.cfg.unwinding_assertions, unwind) {
                                let guard = self.guard_term(&s);
                                self.properties.push(PropInstance {
                                    prop: *p,
                                    guard,
                                    claim: nc,
                                });
                            }
                            self.add_guard(&mut s, nc);
                        }
                    }
                }
                Instr::Return(e) => {
                    s.ret = match e {
                        Some(e) => Some(self.eval(&s, fr, e)?),
                        None => None,
                    };
                    pending.entry(end).or_default().push(s);
                    pc = next;
                    continue;
                }
                Instr::Call { lhs, target, args } => {
                    let mut argv = Vec::new();
                    for a in args {
                        argv.push(self.eval(&s, fr, a)?);
                    }
                    let lhs = lhs.as_ref().map(|l| (fr, l));
                    match target {
                        CallTarget::Direct(g) => {
                            cur = self.call(s, g, argv, lhs, loc)?;
                            pc = next;
                            continue;
                        }
                        CallTarget::Virtual { vptr, root, index, .. } => {
                            let slot = self.eval(&s, fr, vptr)?;
                            let vp = self.read(s.mem, slot);
                            let i = self.word(*index as i64);
                            let entry = self.ptr_add(vp, i);
                            let fid = self.read(s.mem, entry);
                            let mut merged: Option<State> = None;
                            for id in self.prog.slot_candidates(root, *index) {
                                if id == 0 {
                                    continue;
                                }
                                let want = self.st.bv(32, id as u64);
                                let hit = self.st.eq(fid, want);
                                let mut branch = s.clone();
                                self.add_guard(&mut branch, hit);
                                if !self.is_live(&branch) {
                                    continue;
                                }
                                let g = self.prog.fn_by_id(id).unwrap().to_string();
                                if let Some(out) = self.call(branch, &g, argv.clone(), lhs, loc)? {
                                    merged = Some(match merged {
                                        None => out,
                                        Some(m) => self.merge(m, out),
                                    });
                                }
                            }
                            cur = merged;
                            pc = next;
                            continue;
                        }
                        CallTarget::Alloc { size, tag, .. } => {
                            let obj = self.new_object()?;
                            let n = self.eval(&s, fr, size)?;
                            self.define_object(&mut s, obj, n, *tag);
                            let p = self.obj_ptr(obj);
                            if let Some((fr, lv)) = lhs {
                                self.assign(&mut s, fr, lv, p, loc)?;
                            }
                        }
                        CallTarget::Free(p) => {
                            let p = self.eval(&s, fr, p)?;
                            let o = self.obj_of(p);
                            let z = self.st.bv(1, 0);
                            s.alive = self.write(s.alive, o, z);
                        }
                        CallTarget::Nondet(sort) => {
                            let v = self.nondet(&s, *sort, loc);
                            if let Some((fr, lv)) = lhs {
                                self.assign(&mut s, fr, lv, v, loc)?;
                            }
                        }
                    }
                }
            }
            cur = Some(s);
            pc = next;
        }
    }
}

/// Term for a binary GOTO operator over operands of sort `sort`.
pub fn binary(st: &mut TermStore, op: BinOp, sort: Sort, x: Term, y: Term) -> Term {
    match op {
        BinOp::Add => st.bv_add(x, y),
        BinOp::Sub => st.bv_sub(x, y),
        BinOp::Mul => st.bv_mul(x, y),
        BinOp::Div => st.bv_sdiv(x, y),
        BinOp::Rem => st.bv_srem(x, y),
        BinOp::Eq => st.eq(x, y),
        BinOp::Ne => st.neq(x, y),
        BinOp::Lt => st.bv_slt(x, y),
        BinOp::Le => st.bv_sle(x, y),
        BinOp::Gt => st.bv_slt(y, x),
        BinOp::Ge => st.bv_sle(y, x),
        BinOp::And => {
            debug_assert_eq!(sort, Sort::Bool);
            st.and2(x, y)
        }
        BinOp::Or => st.or2(x, y),
    }
}

/// True when `x op y` leaves the signed range of the operand width.
pub fn overflow(st: &mut TermStore, op: BinOp, x: Term, y: Term) -> Term {
    let w = st.width(x);
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => {
            let ext = if op == BinOp::Mul { w } else { 1 };
            let xe = st.sign_ext(ext, x);
            let ye = st.sign_ext(ext, y);
            let r = match op {
                BinOp::Add => st.bv_add(xe, ye),
                BinOp::Sub => st.bv_sub(xe, ye),
                _ => st.bv_mul(xe, ye),
            };
            let low = st.extract(w - 1, 0, r);
            let back = st.sign_ext(ext, low);
            st.neq(back, r)
        }
        BinOp::Div | BinOp::Rem => {
            let min = st.bv(w, 1u64 << (w - 1));
            let m1 = st.bv_signed(w, -1);
            let a = st.eq(x, min);
            let b = st.eq(y, m1);
            st.and2(a, b)
        }
        _ => st.ff(),
    }
}
