//! GOTO programs: per-function instruction lists over scalar expressions.

use std::collections::BTreeMap;
use std::fmt;

use crate::frontend::ast::{BinOp, SourceLoc};
use crate::sema::types::Type;

/// Value sorts. `Word` is the 32-bit machine word used for object sizes
/// and offsets; `Int` has the configured width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
    Ptr,
    Word,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::Ptr => "pointer",
            Sort::Word => "word",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    Local(String),
    Global(String),
}

impl VarRef {
    pub fn name(&self) -> &str {
        match self {
            VarRef::Local(n) | VarRef::Global(n) => n,
        }
    }
}

/// How an address computation is shown in dumps.
#[derive(Clone, Debug, PartialEq)]
pub enum Hint {
    Field(String),
    Index(Box<GExpr>),
    Cast(String),
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GUnOp {
    Neg,
    Not,
    BoolToInt,
    IntToWord,
    /// Object number of a pointer.
    ObjectOf,
    /// Slot offset of a pointer, as a word.
    OffsetOf,
    IsAlive,
    ObjectSize,
    /// Allocation tag: 0 for variables, 1 heap scalar, 2 heap array,
    /// 3 + class id for heap objects.
    DynTag,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GExpr {
    Int(i64),
    Bool(bool),
    Word(i64),
    Null,
    Var(VarRef, Sort),
    /// Address of a variable stored in memory.
    ObjAddr(VarRef),
    Load(Box<GExpr>, Sort),
    /// Pointer plus a word offset in slots.
    Offset {
        base: Box<GExpr>,
        delta: Box<GExpr>,
        hint: Hint,
    },
    VtableAddr(String),
    Unary(GUnOp, Box<GExpr>),
    Binary(BinOp, Box<GExpr>, Box<GExpr>),
    /// True when `a op b` overflows the signed int range.
    Overflow(BinOp, Box<GExpr>, Box<GExpr>),
    Ite(Box<GExpr>, Box<GExpr>, Box<GExpr>),
}

impl GExpr {
    pub fn sort(&self) -> Sort {
        match self {
            GExpr::Int(_) => Sort::Int,
            GExpr::Bool(_) => Sort::Bool,
            GExpr::Word(_) => Sort::Word,
            GExpr::Null | GExpr::ObjAddr(_) | GExpr::Offset { .. } | GExpr::VtableAddr(_) => Sort::Ptr,
            GExpr::Var(_, s) | GExpr::Load(_, s) => *s,
            GExpr::Unary(op, e) => match op {
                GUnOp::Neg => e.sort(),
                GUnOp::Not | GUnOp::IsAlive => Sort::Bool,
                GUnOp::BoolToInt => Sort::Int,
                GUnOp::IntToWord | GUnOp::ObjectOf | GUnOp::OffsetOf | GUnOp::ObjectSize | GUnOp::DynTag => {
                    Sort::Word
                }
            },
            GExpr::Binary(op, a, _) => {
                if op.is_arith() {
                    a.sort()
                } else {
                    Sort::Bool
                }
            }
            GExpr::Overflow(..) => Sort::Bool,
            GExpr::Ite(_, a, _) => a.sort(),
        }
    }

    pub fn bin(op: BinOp, a: GExpr, b: GExpr) -> GExpr {
        GExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn un(op: GUnOp, a: GExpr) -> GExpr {
        GExpr::Unary(op, Box::new(a))
    }

    pub fn not(a: GExpr) -> GExpr {
        match a {
            GExpr::Bool(b) => GExpr::Bool(!b),
            GExpr::Unary(GUnOp::Not, inner) => *inner,
            a => GExpr::un(GUnOp::Not, a),
        }
    }

    pub fn and(a: GExpr, b: GExpr) -> GExpr {
        match (&a, &b) {
            (GExpr::Bool(true), _) => b,
            (_, GExpr::Bool(true)) => a,
            _ => GExpr::bin(BinOp::And, a, b),
        }
    }

    pub fn ite(c: GExpr, a: GExpr, b: GExpr) -> GExpr {
        GExpr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn load(addr: GExpr, s: Sort) -> GExpr {
        GExpr::Load(Box::new(addr), s)
    }

    pub fn offset(base: GExpr, delta: GExpr, hint: Hint) -> GExpr {
        GExpr::Offset {
            base: Box::new(base),
            delta: Box::new(delta),
            hint,
        }
    }

    /// Converts a condition operand to `Bool`.
    pub fn truth(self) -> GExpr {
        match self.sort() {
            Sort::Bool => self,
            Sort::Int => GExpr::bin(BinOp::Ne, self, GExpr::Int(0)),
            Sort::Word => GExpr::bin(BinOp::Ne, self, GExpr::Word(0)),
            Sort::Ptr => GExpr::bin(BinOp::Ne, self, GExpr::Null),
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&GExpr)) {
        f(self);
        match self {
            GExpr::Load(a, _) | GExpr::Unary(_, a) => a.visit(f),
            GExpr::Offset { base, delta, hint } => {
                base.visit(f);
                delta.visit(f);
                if let Hint::Index(i) = hint {
                    i.visit(f);
                }
            }
            GExpr::Binary(_, a, b) | GExpr::Overflow(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            GExpr::Ite(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LValue {
    Var(VarRef, Sort),
    Mem(GExpr, Sort),
}

impl LValue {
    pub fn sort(&self) -> Sort {
        match self {
            LValue::Var(_, s) | LValue::Mem(_, s) => *s,
        }
    }

    pub fn read(&self) -> GExpr {
        match self {
            LValue::Var(v, s) => GExpr::Var(v.clone(), *s),
            LValue::Mem(a, s) => GExpr::load(a.clone(), *s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CallTarget {
    Direct(String),
    Virtual {
        /// Address of the vptr slot of the receiver's root subobject.
        vptr: GExpr,
        root: String,
        index: usize,
        /// Method name shown in dumps.
        method: String,
    },
    Alloc {
        size: GExpr,
        tag: u32,
        what: String,
    },
    Free(GExpr),
    Nondet(Sort),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Decl(String),
    Dead(String),
    Assign(LValue, GExpr),
    Assert { cond: GExpr, prop: usize },
    Assume(GExpr),
    Goto {
        target: usize,
        cond: Option<GExpr>,
        /// Unwinding property for backward jumps.
        unwind: Option<usize>,
    },
    Call {
        lhs: Option<LValue>,
        target: CallTarget,
        args: Vec<GExpr>,
    },
    Return(Option<GExpr>),
    Skip,
    EndFunction,
}

#[derive(Clone, Debug)]
pub struct Inst {
    pub instr: Instr,
    pub loc: SourceLoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropKind {
    Assertion,
    Unwinding,
    Recursion,
    Overflow,
    DivByZero,
    Bounds,
    Pointer,
    Memory,
}

impl PropKind {
    pub fn name(self) -> &'static str {
        match self {
            PropKind::Assertion => "assertion",
            PropKind::Unwinding => "unwind",
            PropKind::Recursion => "recursion",
            PropKind::Overflow => "overflow",
            PropKind::DivByZero => "division-by-zero",
            PropKind::Bounds => "array-bounds",
            PropKind::Pointer => "pointer-dereference",
            PropKind::Memory => "memory",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Property {
    pub kind: PropKind,
    pub loc: SourceLoc,
    /// Display name of the enclosing function.
    pub function: String,
    pub description: String,
    /// The checked condition as shown in reports.
    pub claim: String,
}

impl Property {
    /// Identity used to compare results across back ends.
    pub fn key(&self) -> (PropKind, (String, u32, u32), String) {
        (
            self.kind,
            (self.loc.file.to_string(), self.loc.line, self.loc.column),
            self.description.clone(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct LocalInfo {
    pub ty: Type,
    /// Size in slots for variables stored in memory.
    pub memory: Option<u32>,
}

impl LocalInfo {
    pub fn sort(&self) -> Sort {
        sort_of(&self.ty)
    }
}

pub fn sort_of(t: &Type) -> Sort {
    match t {
        Type::Bool => Sort::Bool,
        Type::Pointer(_) | Type::Null | Type::Reference(_) | Type::Class(_) | Type::Array(..) => Sort::Ptr,
        _ => Sort::Int,
    }
}

#[derive(Clone, Debug)]
pub struct GFunction {
    pub name: String,
    pub display: String,
    pub params: Vec<String>,
    pub ret: Option<Sort>,
    pub locals: BTreeMap<String, LocalInfo>,
    pub body: Vec<Inst>,
    /// Property checked when the recursion bound cuts a call.
    pub recursion_prop: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GotoProgram {
    pub functions: BTreeMap<String, GFunction>,
    pub globals: BTreeMap<String, LocalInfo>,
    pub global_order: Vec<String>,
    pub properties: Vec<Property>,
    /// Tables in object order; entries are function ids, 0 for pure slots.
    pub vtables: Vec<(String, Vec<u32>)>,
    /// Function ids used in tables, from 1.
    pub fn_ids: BTreeMap<String, u32>,
    pub class_ids: BTreeMap<String, u32>,
}

pub const INIT: &str = "__initialize";
pub const MAIN: &str = "main";

impl GotoProgram {
    pub fn function(&self, name: &str) -> &GFunction {
        self.functions
            .get(name)
            .unwrap_or_else(|| panic!("no GOTO function `{name}`"))
    }

    pub fn fn_by_id(&self, id: u32) -> Option<&str> {
        self.fn_ids.iter().find(|(_, i)| **i == id).map(|(n, _)| n.as_str())
    }

    pub fn vtable_index(&self, name: &str) -> Option<usize> {
        self.vtables.iter().position(|(n, _)| n == name)
    }

    /// Possible function ids of slot `index` in tables rooted at `root`.
    pub fn slot_candidates(&self, root: &str, index: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for (n, entries) in &self.vtables {
            if n.split('@').next() == Some(root) {
                if let Some(&id) = entries.get(index) {
                    if !out.contains(&id) {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}

// ---- printing ----

fn prec(e: &GExpr) -> u8 {
    match e {
        GExpr::Binary(op, ..) => op.precedence(),
        GExpr::Ite(..) => 0,
        _ => 10,
    }
}

pub struct Printer {
    pub compact: bool,
}

impl Printer {
    pub fn expr(&self, e: &GExpr) -> String {
        match e {
            GExpr::Int(v) | GExpr::Word(v) => v.to_string(),
            GExpr::Bool(b) => b.to_string(),
            GExpr::Null => "NULL".into(),
            GExpr::Var(v, _) => v.name().to_string(),
            GExpr::ObjAddr(v) => format!("&{}", v.name()),
            GExpr::VtableAddr(t) => format!("&{t}"),
            GExpr::Load(a, _) => self.load(a),
            GExpr::Offset { base, delta, hint } => match hint {
                Hint::Cast(t) => {
                    let d = self.expr(delta);
                    if d == "0" {
                        format!("({t}){}", self.atom(base))
                    } else {
                        format!("({t})({} + {d})", self.expr(base))
                    }
                }
                Hint::Field(_) | Hint::Index(_) => format!("&{}", self.load(e)),
                Hint::Plain => self.binary_text(&self.atom(base), "+", &self.atom(delta)),
            },
            GExpr::Unary(op, a) => match op {
                GUnOp::Neg => format!("-{}", self.atom(a)),
                GUnOp::Not => format!("!{}", self.atom(a)),
                GUnOp::BoolToInt => format!("(int){}", self.atom(a)),
                GUnOp::IntToWord => self.expr(a),
                GUnOp::ObjectOf => format!("POINTER_OBJECT({})", self.expr(a)),
                GUnOp::OffsetOf => format!("POINTER_OFFSET({})", self.expr(a)),
                GUnOp::IsAlive => format!("IS_ALIVE({})", self.expr(a)),
                GUnOp::ObjectSize => format!("OBJECT_SIZE({})", self.expr(a)),
                GUnOp::DynTag => format!("DYNAMIC_TYPE({})", self.expr(a)),
            },
            GExpr::Binary(op, a, b) => {
                let p = op.precedence();
                let l = if prec(a) < p { format!("({})", self.expr(a)) } else { self.expr(a) };
                let r = if prec(b) <= p { format!("({})", self.expr(b)) } else { self.expr(b) };
                self.binary_text(&l, op.symbol(), &r)
            }
            GExpr::Overflow(op, a, b) => {
                let sep = if self.compact { "," } else { ", " };
                format!("OVERFLOW({}{sep}{}{sep}{})", op.symbol(), self.expr(a), self.expr(b))
            }
            GExpr::Ite(c, a, b) => {
                if self.compact {
                    format!("{}?{}:{}", self.atom(c), self.atom(a), self.atom(b))
                } else {
                    format!("{} ? {} : {}", self.atom(c), self.atom(a), self.atom(b))
                }
            }
        }
    }

    fn binary_text(&self, l: &str, op: &str, r: &str) -> String {
        if self.compact {
            format!("{l}{op}{r}")
        } else {
            format!("{l} {op} {r}")
        }
    }

    fn atom(&self, e: &GExpr) -> String {
        if prec(e) < 10 || matches!(e, GExpr::Offset { hint: Hint::Plain, .. }) {
            format!("({})", self.expr(e))
        } else {
            self.expr(e)
        }
    }

    /// Shows a read of the slot at `addr`.
    fn load(&self, addr: &GExpr) -> String {
        match addr {
            GExpr::ObjAddr(v) => v.name().to_string(),
            GExpr::Offset { base, hint: Hint::Field(f), .. } => match base.as_ref() {
                GExpr::ObjAddr(v) => format!("{}.{f}", v.name()),
                GExpr::Offset { hint: Hint::Field(_) | Hint::Index(_), .. } => format!("{}.{f}", self.load(base)),
                b => format!("{}->{f}", self.atom(b)),
            },
            GExpr::Offset { base, hint: Hint::Index(i), .. } => {
                let b = match base.as_ref() {
                    GExpr::ObjAddr(v) => v.name().to_string(),
                    GExpr::Offset { hint: Hint::Field(_) | Hint::Index(_), .. } => self.load(base),
                    b => self.atom(b),
                };
                format!("{b}[{}]", self.expr(i))
            }
            a => format!("*{}", self.atom(a)),
        }
    }

    fn lvalue(&self, l: &LValue) -> String {
        match l {
            LValue::Var(v, _) => v.name().to_string(),
            LValue::Mem(a, _) => self.load(a),
        }
    }

    pub fn call(&self, target: &CallTarget, args: &[GExpr], prog: Option<&GotoProgram>) -> String {
        let args_s: Vec<String> = args.iter().map(|a| self.expr(a)).collect();
        let args_s = args_s.join(", ");
        match target {
            CallTarget::Direct(f) => {
                let name = prog
                    .and_then(|p| p.functions.get(f))
                    .map(|g| g.display.clone())
                    .unwrap_or_else(|| f.clone());
                format!("{name}({args_s})")
            }
            CallTarget::Virtual { vptr, method, root, index } => {
                let mut out = format!("*{}->{method}({args_s})", self.load(vptr));
                if let Some(p) = prog {
                    let tables: Vec<&str> = p
                        .vtables
                        .iter()
                        .filter(|(n, e)| n.split('@').next() == Some(root) && e.get(*index).is_some_and(|id| *id != 0))
                        .map(|(n, _)| n.as_str())
                        .collect();
                    out.push_str(&format!(" // via {}", tables.join(" | ")));
                }
                out
            }
            CallTarget::Alloc { size, what, .. } => format!("ALLOCATE({}, {what})", self.expr(size)),
            CallTarget::Free(p) => format!("FREE({})", self.expr(p)),
            CallTarget::Nondet(s) => format!("NONDET({})", s.name()),
        }
    }

    pub fn instr(&self, f: &GFunction, i: &Instr, prog: Option<&GotoProgram>) -> String {
        match i {
            Instr::Decl(v) => {
                let ty = f.locals.get(v).map(|l| l.ty.clone()).unwrap_or(Type::Int);
                decl_text(&ty, v)
            }
            Instr::Dead(v) => format!("DEAD {v}"),
            Instr::Assign(l, e) => format!("{} = {}", self.lvalue(l), self.expr(e)),
            Instr::Assert { cond, prop } => {
                let d = prog.map(|p| p.properties[*prop].description.clone()).unwrap_or_default();
                format!("ASSERT {} // {d}", self.expr(cond))
            }
            Instr::Assume(c) => format!("ASSUME {}", self.expr(c)),
            Instr::Goto { target, cond, .. } => match cond {
                None => format!("GOTO {target}"),
                Some(c) => format!("IF {} THEN GOTO {target}", self.expr(c)),
            },
            Instr::Call { lhs, target, args } => {
                let c = self.call(target, args, prog);
                match lhs {
                    Some(l) => format!("{} = {c}", self.lvalue(l)),
                    None => c,
                }
            }
            Instr::Return(Some(e)) => format!("RETURN: {}", self.expr(e)),
            Instr::Return(None) => "RETURN".into(),
            Instr::Skip => "SKIP".into(),
            Instr::EndFunction => "END_FUNCTION".into(),
        }
    }
}

/// `int x;`, `Bird* p;`, `int a[3];`
pub fn decl_text(ty: &Type, name: &str) -> String {
    match ty {
        Type::Array(e, n) => {
            let inner = decl_text(e, name);
            let inner = inner.trim_end_matches(';');
            format!("{inner}[{n}];")
        }
        t => format!("{t} {name};"),
    }
}

impl fmt::Display for GExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer { compact: false }.expr(self))
    }
}
