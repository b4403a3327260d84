//! Concrete execution of GOTO programs.
//!
//! Uses the same memory model, unwinding cut and recursion cut as symbolic
//! execution. Nondeterministic values come from a caller-supplied sequence.
//! Failed properties are recorded and execution continues.

use std::collections::HashMap;

use cxxbmc_solver::term::{bv_sdiv, bv_srem, mask, to_signed};
use thiserror::Error;

use super::exec::{SymexConfig, MAX_OBJECTS, OBJ_SHIFT};
use crate::frontend::ast::BinOp;
use crate::goto::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("ran out of nondeterministic inputs")]
    NondetExhausted,
    #[error("more than {MAX_OBJECTS} objects")]
    TooManyObjects,
    #[error("step limit exceeded")]
    StepLimit,
    #[error("missing entry function `{0}`")]
    MissingEntry(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Failed property indices in the order they failed.
    pub violations: Vec<usize>,
    /// Value returned by `main`, if it returned.
    pub ret: Option<i64>,
    /// The run stopped at an assumption, a loop cut or a recursion cut.
    pub blocked: bool,
    /// Number of nondet values consumed.
    pub consumed: usize,
}

const STEP_LIMIT: u64 = 5_000_000;

struct Stop;

struct Interp<'p> {
    prog: &'p GotoProgram,
    cfg: SymexConfig,
    inputs: &'p [i64],
    next_input: usize,
    mem: HashMap<u32, u32>,
    alive: Vec<bool>,
    size: Vec<u32>,
    tag: Vec<u32>,
    local_objs: HashMap<(String, String, usize), u32>,
    global_objs: HashMap<String, u32>,
    globals: HashMap<String, u64>,
    stack: Vec<String>,
    out: Outcome,
    steps: u64,
    err: Option<InterpError>,
}

struct Frame<'p> {
    func: &'p GFunction,
    depth: usize,
    regs: HashMap<String, u64>,
}

/// Runs `__initialize` and `main` on the given nondet inputs.
pub fn run(prog: &GotoProgram, cfg: SymexConfig, inputs: &[i64]) -> Result<Outcome, InterpError> {
    if !prog.functions.contains_key(MAIN) {
        return Err(InterpError::MissingEntry(MAIN.into()));
    }
    let mut it = Interp {
        prog,
        cfg,
        inputs,
        next_input: 0,
        mem: HashMap::new(),
        alive: vec![false],
        size: vec![0],
        tag: vec![0],
        local_objs: HashMap::new(),
        global_objs: HashMap::new(),
        globals: HashMap::new(),
        stack: vec![],
        out: Outcome::default(),
        steps: 0,
        err: None,
    };
    let r = it.start();
    if let Some(e) = it.err.take() {
        return Err(e);
    }
    if r.is_err() {
        it.out.blocked = true;
    }
    it.out.consumed = it.next_input;
    Ok(it.out)
}

impl<'p> Interp<'p> {
    fn fail(&mut self, e: InterpError) -> Stop {
        self.err.get_or_insert(e);
        Stop
    }

    fn start(&mut self) -> Result<(), Stop> {
        for (_, entries) in &self.prog.vtables {
            let obj = self.new_object(entries.len() as u32, 0)?;
            for (k, id) in entries.iter().enumerate() {
                self.mem.insert((obj << OBJ_SHIFT) | k as u32, *id);
            }
        }
        for g in &self.prog.global_order {
            let info = &self.prog.globals[g];
            match info.memory {
                Some(n) => {
                    let obj = self.new_object(n, 0)?;
                    self.global_objs.insert(g.clone(), obj);
                }
                None => {
                    self.globals.insert(g.clone(), 0);
                }
            }
        }
        if self.prog.functions.contains_key(INIT) {
            self.call(INIT, vec![])?;
        }
        let r = self.call(MAIN, vec![])?;
        let w = self.cfg.int_width;
        self.out.ret = r.map(|v| to_signed(w, v));
        Ok(())
    }

    fn new_object(&mut self, size: u32, tag: u32) -> Result<u32, Stop> {
        let obj = self.alive.len() as u32;
        if obj > MAX_OBJECTS {
            return Err(self.fail(InterpError::TooManyObjects));
        }
        self.alive.push(true);
        self.size.push(size);
        self.tag.push(tag);
        Ok(obj)
    }

    fn width(&self, s: Sort) -> u32 {
        match s {
            Sort::Int => self.cfg.int_width,
            Sort::Bool => 1,
            Sort::Ptr | Sort::Word => 32,
        }
    }

    fn nondet(&mut self, s: Sort) -> Result<u64, Stop> {
        let Some(&v) = self.inputs.get(self.next_input) else {
            return Err(self.fail(InterpError::NondetExhausted));
        };
        self.next_input += 1;
        Ok(v as u64 & mask(self.width(s)))
    }

    fn local_object(&mut self, fr: &Frame, name: &str) -> Result<u32, Stop> {
        let key = (fr.func.name.clone(), name.to_string(), fr.depth);
        if let Some(o) = self.local_objs.get(&key) {
            return Ok(*o);
        }
        let o = self.new_object(0, 0)?;
        self.alive[o as usize] = false;
        self.local_objs.insert(key, o);
        Ok(o)
    }

    fn to_mem(&self, v: u64, s: Sort) -> u32 {
        match s {
            Sort::Int => to_signed(self.cfg.int_width, v) as u32,
            _ => v as u32,
        }
    }

    fn from_mem(&self, v: u32, s: Sort) -> u64 {
        match s {
            Sort::Int => v as i32 as i64 as u64 & mask(self.cfg.int_width),
            Sort::Bool => (v != 0) as u64,
            _ => v as u64,
        }
    }

    fn obj_of(p: u64) -> usize {
        (p as u32 >> OBJ_SHIFT) as usize
    }

    fn eval(&mut self, fr: &mut Frame, e: &GExpr) -> Result<u64, Stop> {
        let w = self.cfg.int_width;
        Ok(match e {
            GExpr::Int(v) => *v as u64 & mask(w),
            GExpr::Bool(b) => *b as u64,
            GExpr::Word(v) => *v as u64 & mask(32),
            GExpr::Null => 0,
            GExpr::Var(VarRef::Global(n), _) => self.globals.get(n).copied().unwrap_or(0),
            GExpr::Var(VarRef::Local(n), _) => fr.regs.get(n).copied().unwrap_or(0),
            GExpr::ObjAddr(v) => {
                let obj = match v {
                    VarRef::Global(n) => self.global_objs[n],
                    VarRef::Local(n) => self.local_object(fr, n)?,
                };
                (obj as u64) << OBJ_SHIFT
            }
            GExpr::Load(a, s) => {
                let addr = self.eval(fr, a)? as u32;
                let raw = self.mem.get(&addr).copied().unwrap_or(0);
                self.from_mem(raw, *s)
            }
            GExpr::Offset { base, delta, .. } => {
                let b = self.eval(fr, base)? as u32;
                let d = self.eval(fr, delta)? as u32;
                let lo_mask = (1u32 << OBJ_SHIFT) - 1;
                ((b & !lo_mask) | (b.wrapping_add(d) & lo_mask)) as u64
            }
            GExpr::VtableAddr(name) => {
                let i = self.prog.vtable_index(name).expect("unknown vtable");
                ((i as u64) + 1) << OBJ_SHIFT
            }
            GExpr::Unary(op, a) => {
                let sw = self.width(a.sort());
                let x = self.eval(fr, a)?;
                match op {
                    GUnOp::Neg => x.wrapping_neg() & mask(sw),
                    GUnOp::Not => x ^ 1,
                    GUnOp::BoolToInt => x,
                    GUnOp::IntToWord => to_signed(w, x) as u64 & mask(32),
                    GUnOp::ObjectOf => Self::obj_of(x) as u64,
                    GUnOp::OffsetOf => {
                        let lo = x & mask(OBJ_SHIFT);
                        to_signed(OBJ_SHIFT, lo) as u64 & mask(32)
                    }
                    GUnOp::IsAlive => self.alive.get(Self::obj_of(x)).copied().unwrap_or(false) as u64,
                    GUnOp::ObjectSize => self.size.get(Self::obj_of(x)).copied().unwrap_or(0) as u64,
                    GUnOp::DynTag => self.tag.get(Self::obj_of(x)).copied().unwrap_or(0) as u64,
                }
            }
            GExpr::Binary(op, a, b) => {
                let sw = self.width(a.sort());
                let x = self.eval(fr, a)?;
                let y = self.eval(fr, b)?;
                binary(*op, sw, x, y)
            }
            GExpr::Overflow(op, a, b) => {
                let sw = self.width(a.sort());
                let x = to_signed(sw, self.eval(fr, a)?) as i128;
                let y = to_signed(sw, self.eval(fr, b)?) as i128;
                let r = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div | BinOp::Rem if y == -1 => -x,
                    _ => 0,
                };
                let lim = 1i128 << (sw - 1);
                (r < -lim || r >= lim) as u64
            }
            GExpr::Ite(c, a, b) => {
                if self.eval(fr, c)? == 1 {
                    self.eval(fr, a)?
                } else {
                    self.eval(fr, b)?
                }
            }
        })
    }

    fn assign(&mut self, fr: &mut Frame, lv: &LValue, v: u64) -> Result<(), Stop> {
        match lv {
            LValue::Var(VarRef::Global(n), _) => {
                self.globals.insert(n.clone(), v);
            }
            LValue::Var(VarRef::Local(n), _) => {
                fr.regs.insert(n.clone(), v);
            }
            LValue::Mem(a, s) => {
                let addr = self.eval(fr, a)? as u32;
                let m = self.to_mem(v, *s);
                self.mem.insert(addr, m);
            }
        }
        Ok(())
    }

    fn call(&mut self, name: &str, args: Vec<u64>) -> Result<Option<u64>, Stop> {
        let prog = self.prog;
        let Some(f) = prog.functions.get(name) else {
            return Ok(None);
        };
        let depth = self.stack.iter().filter(|n| *n == name).count();
        if depth > self.cfg.unwind as usize {
            if let (true, Some(p)) = (self.cfg.unwinding_assertions, f.recursion_prop) {
                self.out.violations.push(p);
            }
            return Err(Stop);
        }
        let mut fr = Frame {
            func: f,
            depth,
            regs: HashMap::new(),
        };
        for (p, a) in f.params.iter().zip(args) {
            fr.regs.insert(p.clone(), a);
        }
        self.stack.push(name.to_string());
        let r = self.run_body(&mut fr);
        self.stack.pop();
        r
    }

    fn run_body(&mut self, fr: &mut Frame<'p>) -> Result<Option<u64>, Stop> {
        let f = fr.func;
        let mut loops: HashMap<usize, u32> = HashMap::new();
        let mut pc = 0;
        let mut back = false;
        let mut ret = None;
        loop {
            self.steps += 1;
            if self.steps > STEP_LIMIT {
                return Err(self.fail(InterpError::StepLimit));
            }
            if !back {
                loops.remove(&pc);
            }
            back = false;
            let mut next = pc + 1;
            match &f.body[pc].instr {
                Instr::EndFunction => return Ok(ret),
                Instr::Skip => {}
                Instr::Decl(x) => {
                    if let Some(n) = f.locals.get(x).and_then(|l| l.memory) {
                        let o = self.local_object(fr, x)? as usize;
                        self.alive[o] = true;
                        self.size[o] = n;
                        self.tag[o] = 0;
                    }
                }
                Instr::Dead(x) => {
                    if f.locals.get(x).is_some_and(|l| l.memory.is_some()) {
                        let o = self.local_object(fr, x)? as usize;
                        self.alive[o] = false;
                    }
                }
                Instr::Assign(lv, e) => {
                    let v = self.eval(fr, e)?;
                    self.assign(fr, lv, v)?;
                }
                Instr::Assert { cond, prop } => {
                    if self.eval(fr, cond)? == 0 {
                        self.out.violations.push(*prop);
                    }
                }
                Instr::Assume(c) => {
                    if self.eval(fr, c)? == 0 {
                        return Err(Stop);
                    }
                }
                Instr::Goto { target, cond, unwind } => {
                    let c = match cond {
                        Some(c) => self.eval(fr, c)? == 1,
                        None => true,
                    };
                    if *target > pc {
                        if c {
                            next = *target;
                        }
                    } else {
                        let n = loops.entry(*target).or_insert(0);
                        *n += 1;
                        if *n <= self.cfg.unwind {
                            if c {
                                next = *target;
                                back = true;
                            }
                        } else {
                            loops.remove(target);
                            if c {
                                if let (true, Some(p)) = (self.cfg.unwinding_assertions, unwind) {
                                    self.out.violations.push(*p);
                                }
                                return Err(Stop);
                            }
                        }
                    }
                }
                Instr::Return(e) => {
                    ret = match e {
                        Some(e) => Some(self.eval(fr, e)?),
                        None => None,
                    };
                    next = f.body.len() - 1;
                }
                Instr::Call { lhs, target, args } => {
                    let mut argv = Vec::new();
                    for a in args {
                        argv.push(self.eval(fr, a)?);
                    }
                    let v = match target {
                        CallTarget::Direct(g) => {
                            if self.prog.functions.contains_key(g) {
                                self.call(g, argv)?
                            } else {
                                match lhs {
                                    Some(lv) => Some(self.nondet(lv.sort())?),
                                    None => None,
                                }
                            }
                        }
                        CallTarget::Virtual { vptr, .. } => {
                            let slot = self.eval(fr, vptr)? as u32;
                            let vp = self.mem.get(&slot).copied().unwrap_or(0);
                            let idx = match target {
                                CallTarget::Virtual { index, .. } => *index as u32,
                                _ => unreachable!(),
                            };
                            let lo_mask = (1u32 << OBJ_SHIFT) - 1;
                            let entry = (vp & !lo_mask) | (vp.wrapping_add(idx) & lo_mask);
                            let fid = self.mem.get(&entry).copied().unwrap_or(0);
                            match self.prog.fn_by_id(fid) {
                                Some(g) if fid != 0 => {
                                    let g = g.to_string();
                                    self.call(&g, argv)?
                                }
                                // Symbolic execution drops these paths too.
                                _ => return Err(Stop),
                            }
                        }
                        CallTarget::Alloc { size, tag, .. } => {
                            let n = self.eval(fr, size)? as u32;
                            let o = self.new_object(n, *tag)?;
                            Some((o as u64) << OBJ_SHIFT)
                        }
                        CallTarget::Free(p) => {
                            let p = self.eval(fr, p)?;
                            if let Some(a) = self.alive.get_mut(Self::obj_of(p)) {
                                *a = false;
                            }
                            None
                        }
                        CallTarget::Nondet(s) => Some(self.nondet(*s)?),
                    };
                    if let (Some(lv), Some(v)) = (lhs, v) {
                        self.assign(fr, lv, v)?;
                    }
                }
            }
            pc = next;
        }
    }
}

/// Concrete counterpart of the symbolic binary operators.
pub fn binary(op: BinOp, w: u32, x: u64, y: u64) -> u64 {
    let m = mask(w);
    let (sx, sy) = (to_signed(w, x), to_signed(w, y));
    match op {
        BinOp::Add => x.wrapping_add(y) & m,
        BinOp::Sub => x.wrapping_sub(y) & m,
        BinOp::Mul => x.wrapping_mul(y) & m,
        BinOp::Div => bv_sdiv(w, x, y),
        BinOp::Rem => bv_srem(w, x, y),
        BinOp::Eq => (x == y) as u64,
        BinOp::Ne => (x != y) as u64,
        BinOp::Lt => (sx < sy) as u64,
        BinOp::Le => (sx <= sy) as u64,
        BinOp::Gt => (sx > sy) as u64,
        BinOp::Ge => (sx >= sy) as u64,
        BinOp::And => x & y,
        BinOp::Or => x | y,
    }
}
