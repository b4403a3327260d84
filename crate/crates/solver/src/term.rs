//! Hash-consed term DAG for quantifier-free bit-vector and array formulas.
//!
//! Every term is identified by a [`Term`] handle into a [`TermStore`]. The
//! smart constructors fold constants and apply a small set of local
//! rewrites, so structurally equal terms always share one handle.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

/// Handle to a node inside a [`TermStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(u32);

impl Term {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    BitVec(u32),
    /// Array from `BitVec(index)` to `BitVec(element)`.
    Array(u32, u32),
}

impl Sort {
    pub fn bv_width(self) -> u32 {
        match self {
            Sort::BitVec(w) => w,
            other => panic!("expected bit-vector sort, found {other:?}"),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
            Sort::Array(i, e) => write!(f, "(Array (_ BitVec {i}) (_ BitVec {e}))"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    BvConst { width: u32, value: u64 },
    Symbol { name: Rc<str>, sort: Sort },
    Not(Term),
    And(Vec<Term>),
    Or(Vec<Term>),
    Ite(Term, Term, Term),
    Eq(Term, Term),
    BvNeg(Term),
    BvAdd(Term, Term),
    BvSub(Term, Term),
    BvMul(Term, Term),
    BvSdiv(Term, Term),
    BvSrem(Term, Term),
    BvUdiv(Term, Term),
    BvUrem(Term, Term),
    BvSlt(Term, Term),
    BvSle(Term, Term),
    BvUlt(Term, Term),
    BvUle(Term, Term),
    Extract { hi: u32, lo: u32, arg: Term },
    Concat(Term, Term),
    ZeroExt { by: u32, arg: Term },
    SignExt { by: u32, arg: Term },
    Select(Term, Term),
    Store(Term, Term, Term),
    ConstArray { sort: Sort, value: Term },
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Interprets the low `width` bits of `value` as a two's complement number.
pub fn to_signed(width: u32, value: u64) -> i64 {
    let v = value & mask(width);
    if width < 64 && v >> (width - 1) & 1 == 1 {
        (v | !mask(width)) as i64
    } else {
        v as i64
    }
}

/// SMT-LIB `bvudiv` (division by zero yields all ones).
pub fn bv_udiv(width: u32, a: u64, b: u64) -> u64 {
    if b == 0 {
        mask(width)
    } else {
        (a / b) & mask(width)
    }
}

/// SMT-LIB `bvurem` (remainder by zero yields the dividend).
pub fn bv_urem(width: u32, a: u64, b: u64) -> u64 {
    if b == 0 {
        a & mask(width)
    } else {
        (a % b) & mask(width)
    }
}

/// SMT-LIB `bvsdiv`, defined through `bvudiv` on magnitudes.
pub fn bv_sdiv(width: u32, a: u64, b: u64) -> u64 {
    let m = mask(width);
    let sign = |x: u64| (x >> (width - 1)) & 1 == 1;
    let neg = |x: u64| x.wrapping_neg() & m;
    let (sa, sb) = (sign(a), sign(b));
    let ua = if sa { neg(a) } else { a & m };
    let ub = if sb { neg(b) } else { b & m };
    let q = bv_udiv(width, ua, ub);
    if sa != sb {
        neg(q)
    } else {
        q
    }
}

/// SMT-LIB `bvsrem`: the sign follows the dividend.
pub fn bv_srem(width: u32, a: u64, b: u64) -> u64 {
    let m = mask(width);
    let sign = |x: u64| (x >> (width - 1)) & 1 == 1;
    let neg = |x: u64| x.wrapping_neg() & m;
    let (sa, sb) = (sign(a), sign(b));
    let ua = if sa { neg(a) } else { a & m };
    let ub = if sb { neg(b) } else { b & m };
    let r = bv_urem(width, ua, ub);
    if sa {
        neg(r)
    } else {
        r
    }
}

#[derive(Default)]
pub struct TermStore {
    nodes: Vec<Node>,
    sorts: Vec<Sort>,
    dedup: HashMap<Node, Term>,
    symbols: HashMap<Rc<str>, Term>,
    select_cache: HashMap<(Term, Term), Term>,
}

impl TermStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: Term) -> &Node {
        &self.nodes[t.index()]
    }

    pub fn sort(&self, t: Term) -> Sort {
        self.sorts[t.index()]
    }

    pub fn width(&self, t: Term) -> u32 {
        self.sort(t).bv_width()
    }

    fn intern(&mut self, node: Node, sort: Sort) -> Term {
        if let Some(&t) = self.dedup.get(&node) {
            return t;
        }
        let t = Term(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.sorts.push(sort);
        self.dedup.insert(node, t);
        t
    }

    /// Returns the symbol with this name, creating it on first use.
    ///
    /// Panics if the name is already bound with a different sort.
    pub fn symbol(&mut self, name: &str, sort: Sort) -> Term {
        if let Some(&t) = self.symbols.get(name) {
            assert_eq!(self.sort(t), sort, "symbol `{name}` redeclared with another sort");
            return t;
        }
        let name: Rc<str> = Rc::from(name);
        let t = self.intern(Node::Symbol { name: name.clone(), sort }, sort);
        self.symbols.insert(name, t);
        t
    }

    pub fn lookup_symbol(&self, name: &str) -> Option<Term> {
        self.symbols.get(name).copied()
    }

    pub fn symbol_name(&self, t: Term) -> Option<&str> {
        match self.node(t) {
            Node::Symbol { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn tt(&mut self) -> Term {
        self.intern(Node::True, Sort::Bool)
    }

    pub fn ff(&mut self) -> Term {
        self.intern(Node::False, Sort::Bool)
    }

    pub fn bool_const(&mut self, b: bool) -> Term {
        if b {
            self.tt()
        } else {
            self.ff()
        }
    }

    pub fn bv(&mut self, width: u32, value: u64) -> Term {
        assert!((1..=64).contains(&width), "unsupported bit-vector width {width}");
        self.intern(
            Node::BvConst {
                width,
                value: value & mask(width),
            },
            Sort::BitVec(width),
        )
    }

    pub fn bv_signed(&mut self, width: u32, value: i64) -> Term {
        self.bv(width, value as u64)
    }

    pub fn as_bool(&self, t: Term) -> Option<bool> {
        match self.node(t) {
            Node::True => Some(true),
            Node::False => Some(false),
            _ => None,
        }
    }

    pub fn as_bv(&self, t: Term) -> Option<u64> {
        match self.node(t) {
            Node::BvConst { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn is_const(&self, t: Term) -> bool {
        matches!(self.node(t), Node::True | Node::False | Node::BvConst { .. })
    }

    pub fn not(&mut self, a: Term) -> Term {
        debug_assert_eq!(self.sort(a), Sort::Bool);
        match self.node(a) {
            Node::True => self.ff(),
            Node::False => self.tt(),
            Node::Not(inner) => *inner,
            _ => self.intern(Node::Not(a), Sort::Bool),
        }
    }

    fn negation_of(&self, a: Term) -> Option<Term> {
        match self.node(a) {
            Node::Not(x) => Some(*x),
            _ => None,
        }
    }

    pub fn and(&mut self, args: &[Term]) -> Term {
        let mut flat = Vec::with_capacity(args.len());
        for &a in args {
            debug_assert_eq!(self.sort(a), Sort::Bool);
            match self.node(a) {
                Node::True => {}
                Node::False => return self.ff(),
                Node::And(inner) => flat.extend(inner.iter().copied()),
                _ => flat.push(a),
            }
        }
        flat.sort();
        flat.dedup();
        for &a in &flat {
            if let Some(n) = self.negation_of(a) {
                if flat.binary_search(&n).is_ok() {
                    return self.ff();
                }
            }
        }
        match flat.len() {
            0 => self.tt(),
            1 => flat[0],
            _ => self.intern(Node::And(flat), Sort::Bool),
        }
    }

    pub fn and2(&mut self, a: Term, b: Term) -> Term {
        self.and(&[a, b])
    }

    pub fn or(&mut self, args: &[Term]) -> Term {
        let mut flat = Vec::with_capacity(args.len());
        for &a in args {
            debug_assert_eq!(self.sort(a), Sort::Bool);
            match self.node(a) {
                Node::False => {}
                Node::True => return self.tt(),
                Node::Or(inner) => flat.extend(inner.iter().copied()),
                _ => flat.push(a),
            }
        }
        flat.sort();
        flat.dedup();
        for &a in &flat {
            if let Some(n) = self.negation_of(a) {
                if flat.binary_search(&n).is_ok() {
                    return self.tt();
                }
            }
        }
        match flat.len() {
            0 => self.ff(),
            1 => flat[0],
            _ => self.intern(Node::Or(flat), Sort::Bool),
        }
    }

    pub fn or2(&mut self, a: Term, b: Term) -> Term {
        self.or(&[a, b])
    }

    pub fn implies(&mut self, a: Term, b: Term) -> Term {
        let na = self.not(a);
        self.or2(na, b)
    }

    pub fn ite(&mut self, c: Term, t: Term, e: Term) -> Term {
        debug_assert_eq!(self.sort(c), Sort::Bool);
        let sort = self.sort(t);
        assert_eq!(sort, self.sort(e), "ite branches differ in sort");
        if let Some(b) = self.as_bool(c) {
            return if b { t } else { e };
        }
        if t == e {
            return t;
        }
        if let Some(n) = self.negation_of(c) {
            return self.ite(n, e, t);
        }
        if sort == Sort::Bool {
            match (self.as_bool(t), self.as_bool(e)) {
                (Some(true), Some(false)) => return c,
                (Some(false), Some(true)) => return self.not(c),
                (Some(true), None) => return self.or2(c, e),
                (Some(false), None) => {
                    let nc = self.not(c);
                    return self.and2(nc, e);
                }
                (None, Some(false)) => return self.and2(c, t),
                (None, Some(true)) => {
                    let nc = self.not(c);
                    return self.or2(nc, t);
                }
                _ => {}
            }
        }
        self.intern(Node::Ite(c, t, e), sort)
    }

    pub fn eq(&mut self, a: Term, b: Term) -> Term {
        let sort = self.sort(a);
        assert_eq!(sort, self.sort(b), "equality between different sorts");
        if a == b {
            return self.tt();
        }
        if self.is_const(a) && self.is_const(b) {
            return self.ff();
        }
        if sort == Sort::Bool {
            if let Some(v) = self.as_bool(a) {
                return if v { b } else { self.not(b) };
            }
            if let Some(v) = self.as_bool(b) {
                return if v { a } else { self.not(a) };
            }
        }
        // ite(c, k1, k2) = k with distinct constants decides c
        if let Some(k) = self.as_bv(b) {
            if let Node::Ite(c, t, e) = *self.node(a) {
                if let (Some(kt), Some(ke)) = (self.as_bv(t), self.as_bv(e)) {
                    return match (kt == k, ke == k) {
                        (true, true) => self.tt(),
                        (true, false) => c,
                        (false, true) => self.not(c),
                        (false, false) => self.ff(),
                    };
                }
            }
        }
        if self.as_bv(a).is_some() && self.as_bv(b).is_none() {
            return self.eq(b, a);
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.intern(Node::Eq(x, y), Sort::Bool)
    }

    pub fn neq(&mut self, a: Term, b: Term) -> Term {
        let e = self.eq(a, b);
        self.not(e)
    }

    fn bin_consts(&self, a: Term, b: Term) -> Option<(u32, u64, u64)> {
        match (self.node(a), self.node(b)) {
            (Node::BvConst { width, value: x }, Node::BvConst { value: y, .. }) => {
                Some((*width, *x, *y))
            }
            _ => None,
        }
    }

    fn check_same_width(&self, a: Term, b: Term) -> u32 {
        let w = self.width(a);
        assert_eq!(w, self.width(b), "bit-vector operands of different widths");
        w
    }

    pub fn bv_neg(&mut self, a: Term) -> Term {
        let w = self.width(a);
        if let Some(v) = self.as_bv(a) {
            return self.bv(w, v.wrapping_neg());
        }
        if let Node::BvNeg(x) = self.node(a) {
            return *x;
        }
        self.intern(Node::BvNeg(a), Sort::BitVec(w))
    }

    pub fn bv_add(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, x.wrapping_add(y));
        }
        if self.as_bv(a) == Some(0) {
            return b;
        }
        if self.as_bv(b) == Some(0) {
            return a;
        }
        // (x + k1) + k2 => x + (k1 + k2)
        if let (Some(k2), Node::BvAdd(x, k1)) = (self.as_bv(b), self.node(a).clone()) {
            if let Some(k1v) = self.as_bv(k1) {
                let k = self.bv(w, k1v.wrapping_add(k2));
                return self.bv_add(x, k);
            }
        }
        if self.as_bv(a).is_some() {
            return self.bv_add(b, a);
        }
        self.intern(Node::BvAdd(a, b), Sort::BitVec(w))
    }

    pub fn bv_sub(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, x.wrapping_sub(y));
        }
        if self.as_bv(b) == Some(0) {
            return a;
        }
        if a == b {
            return self.bv(w, 0);
        }
        self.intern(Node::BvSub(a, b), Sort::BitVec(w))
    }

    pub fn bv_mul(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, x.wrapping_mul(y));
        }
        for (k, other) in [(a, b), (b, a)] {
            match self.as_bv(k) {
                Some(0) => return self.bv(w, 0),
                Some(1) => return other,
                _ => {}
            }
        }
        if self.as_bv(a).is_some() {
            return self.intern(Node::BvMul(b, a), Sort::BitVec(w));
        }
        self.intern(Node::BvMul(a, b), Sort::BitVec(w))
    }

    pub fn bv_sdiv(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, bv_sdiv(w, x, y));
        }
        if self.as_bv(b) == Some(1) {
            return a;
        }
        self.intern(Node::BvSdiv(a, b), Sort::BitVec(w))
    }

    pub fn bv_srem(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, bv_srem(w, x, y));
        }
        if self.as_bv(b) == Some(1) {
            return self.bv(w, 0);
        }
        self.intern(Node::BvSrem(a, b), Sort::BitVec(w))
    }

    pub fn bv_udiv(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, bv_udiv(w, x, y));
        }
        self.intern(Node::BvUdiv(a, b), Sort::BitVec(w))
    }

    pub fn bv_urem(&mut self, a: Term, b: Term) -> Term {
        let w = self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bv(w, bv_urem(w, x, y));
        }
        self.intern(Node::BvUrem(a, b), Sort::BitVec(w))
    }

    pub fn bv_slt(&mut self, a: Term, b: Term) -> Term {
        self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bool_const(to_signed(w, x) < to_signed(w, y));
        }
        if a == b {
            return self.ff();
        }
        self.intern(Node::BvSlt(a, b), Sort::Bool)
    }

    pub fn bv_sle(&mut self, a: Term, b: Term) -> Term {
        self.check_same_width(a, b);
        if let Some((w, x, y)) = self.bin_consts(a, b) {
            return self.bool_const(to_signed(w, x) <= to_signed(w, y));
        }
        if a == b {
            return self.tt();
        }
        self.intern(Node::BvSle(a, b), Sort::Bool)
    }

    pub fn bv_ult(&mut self, a: Term, b: Term) -> Term {
        self.check_same_width(a, b);
        if let Some((_, x, y)) = self.bin_consts(a, b) {
            return self.bool_const(x < y);
        }
        if a == b || self.as_bv(b) == Some(0) {
            return self.ff();
        }
        self.intern(Node::BvUlt(a, b), Sort::Bool)
    }

    pub fn bv_ule(&mut self, a: Term, b: Term) -> Term {
        self.check_same_width(a, b);
        if let Some((_, x, y)) = self.bin_consts(a, b) {
            return self.bool_const(x <= y);
        }
        if a == b || self.as_bv(a) == Some(0) {
            return self.tt();
        }
        self.intern(Node::BvUle(a, b), Sort::Bool)
    }

    pub fn extract(&mut self, hi: u32, lo: u32, a: Term) -> Term {
        let w = self.width(a);
        assert!(hi >= lo && hi < w, "extract [{hi}:{lo}] out of range for width {w}");
        if lo == 0 && hi == w - 1 {
            return a;
        }
        let rw = hi - lo + 1;
        if let Some(v) = self.as_bv(a) {
            return self.bv(rw, v >> lo);
        }
        match self.node(a).clone() {
            Node::Concat(h, l) => {
                let lw = self.width(l);
                if hi < lw {
                    return self.extract(hi, lo, l);
                }
                if lo >= lw {
                    return self.extract(hi - lw, lo - lw, h);
                }
            }
            Node::Extract { lo: ilo, arg, .. } => {
                return self.extract(hi + ilo, lo + ilo, arg);
            }
            Node::ZeroExt { arg, .. } | Node::SignExt { arg, .. } => {
                let aw = self.width(arg);
                if hi < aw {
                    return self.extract(hi, lo, arg);
                }
            }
            Node::Ite(c, t, e)
                if self.is_const(t) && self.is_const(e) => {
                    let t2 = self.extract(hi, lo, t);
                    let e2 = self.extract(hi, lo, e);
                    return self.ite(c, t2, e2);
                }
            _ => {}
        }
        self.intern(Node::Extract { hi, lo, arg: a }, Sort::BitVec(rw))
    }

    pub fn concat(&mut self, hi: Term, lo: Term) -> Term {
        let (hw, lw) = (self.width(hi), self.width(lo));
        let w = hw + lw;
        assert!(w <= 64, "concat wider than 64 bits");
        if let (Some(h), Some(l)) = (self.as_bv(hi), self.as_bv(lo)) {
            return self.bv(w, (h << lw) | l);
        }
        self.intern(Node::Concat(hi, lo), Sort::BitVec(w))
    }

    pub fn zero_ext(&mut self, by: u32, a: Term) -> Term {
        if by == 0 {
            return a;
        }
        let w = self.width(a) + by;
        if let Some(v) = self.as_bv(a) {
            return self.bv(w, v);
        }
        self.intern(Node::ZeroExt { by, arg: a }, Sort::BitVec(w))
    }

    pub fn sign_ext(&mut self, by: u32, a: Term) -> Term {
        if by == 0 {
            return a;
        }
        let aw = self.width(a);
        let w = aw + by;
        if let Some(v) = self.as_bv(a) {
            return self.bv(w, to_signed(aw, v) as u64);
        }
        self.intern(Node::SignExt { by, arg: a }, Sort::BitVec(w))
    }

    /// Truncates or sign-extends to `width`.
    pub fn resize_signed(&mut self, a: Term, width: u32) -> Term {
        let w = self.width(a);
        match w.cmp(&width) {
            std::cmp::Ordering::Equal => a,
            std::cmp::Ordering::Less => self.sign_ext(width - w, a),
            std::cmp::Ordering::Greater => self.extract(width - 1, 0, a),
        }
    }

    pub fn const_array(&mut self, index_width: u32, value: Term) -> Term {
        let ew = self.width(value);
        let sort = Sort::Array(index_width, ew);
        self.intern(Node::ConstArray { sort, value }, sort)
    }

    pub fn select(&mut self, arr: Term, idx: Term) -> Term {
        let Sort::Array(iw, ew) = self.sort(arr) else {
            panic!("select on non-array term");
        };
        assert_eq!(self.width(idx), iw, "select index width mismatch");
        if let Some(&t) = self.select_cache.get(&(arr, idx)) {
            return t;
        }
        let t = match self.node(arr).clone() {
            Node::ConstArray { value, .. } => value,
            Node::Store(_, i, v) if i == idx => v,
            Node::Store(inner, i, _) if self.is_const(i) && self.is_const(idx) => {
                self.select(inner, idx)
            }
            // Reads through merged arrays are pushed into both branches.
            Node::Ite(c, a, b) => {
                let x = self.select(a, idx);
                let y = self.select(b, idx);
                self.ite(c, x, y)
            }
            _ => self.intern(Node::Select(arr, idx), Sort::BitVec(ew)),
        };
        self.select_cache.insert((arr, idx), t);
        t
    }

    pub fn store(&mut self, arr: Term, idx: Term, val: Term) -> Term {
        let sort = self.sort(arr);
        let Sort::Array(iw, ew) = sort else {
            panic!("store on non-array term");
        };
        assert_eq!(self.width(idx), iw, "store index width mismatch");
        assert_eq!(self.width(val), ew, "store element width mismatch");
        self.intern(Node::Store(arr, idx, val), sort)
    }

    /// Children of a node in evaluation order.
    pub fn children(&self, t: Term) -> Vec<Term> {
        match self.node(t) {
            Node::True | Node::False | Node::BvConst { .. } | Node::Symbol { .. } => vec![],
            Node::Not(a)
            | Node::BvNeg(a)
            | Node::Extract { arg: a, .. }
            | Node::ZeroExt { arg: a, .. }
            | Node::SignExt { arg: a, .. }
            | Node::ConstArray { value: a, .. } => vec![*a],
            Node::And(xs) | Node::Or(xs) => xs.clone(),
            Node::Ite(a, b, c) | Node::Store(a, b, c) => vec![*a, *b, *c],
            Node::Eq(a, b)
            | Node::BvAdd(a, b)
            | Node::BvSub(a, b)
            | Node::BvMul(a, b)
            | Node::BvSdiv(a, b)
            | Node::BvSrem(a, b)
            | Node::BvUdiv(a, b)
            | Node::BvUrem(a, b)
            | Node::BvSlt(a, b)
            | Node::BvSle(a, b)
            | Node::BvUlt(a, b)
            | Node::BvUle(a, b)
            | Node::Concat(a, b)
            | Node::Select(a, b) => vec![*a, *b],
        }
    }

    /// All terms reachable from `roots`, children before parents.
    pub fn topo_order(&self, roots: &[Term]) -> Vec<Term> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack: Vec<(Term, bool)> = roots.iter().rev().map(|&r| (r, false)).collect();
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                out.push(t);
                continue;
            }
            if seen[t.index()] {
                continue;
            }
            seen[t.index()] = true;
            stack.push((t, true));
            for c in self.children(t).into_iter().rev() {
                if !seen[c.index()] {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Symbols occurring in the given terms, in first-occurrence order.
    pub fn free_symbols(&self, roots: &[Term]) -> Vec<Term> {
        self.topo_order(roots)
            .into_iter()
            .filter(|&t| matches!(self.node(t), Node::Symbol { .. }))
            .collect()
    }

    /// Number of distinct nodes reachable from `t`.
    pub fn dag_size(&self, t: Term) -> usize {
        self.topo_order(&[t]).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_structure() {
        let mut s = TermStore::new();
        let x = s.symbol("x", Sort::BitVec(32));
        let one = s.bv(32, 1);
        let a = s.bv_add(x, one);
        let b = s.bv_add(x, one);
        assert_eq!(a, b);
        let c = s.bv_add(one, x);
        assert_eq!(a, c);
    }

    #[test]
    fn constant_folding() {
        let mut s = TermStore::new();
        let a = s.bv_signed(8, 127);
        let b = s.bv(8, 1);
        let sum = s.bv_add(a, b);
        assert_eq!(s.as_bv(sum), Some(0x80));
        let z = s.bv(8, 0);
        let q = s.bv_sdiv(a, z);
        assert_eq!(s.as_bv(q), Some(0xff));
        let x = s.symbol("x", Sort::Bool);
        let nx = s.not(x);
        let f = s.and2(x, nx);
        assert_eq!(s.as_bool(f), Some(false));
        let t = s.or2(x, nx);
        assert_eq!(s.as_bool(t), Some(true));
    }

    #[test]
    fn select_over_store_with_constant_indices() {
        let mut s = TermStore::new();
        let zero = s.bv(32, 0);
        let m0 = s.const_array(32, zero);
        let (i1, i2, v) = (s.bv(32, 1), s.bv(32, 2), s.bv(32, 7));
        let m1 = s.store(m0, i1, v);
        assert_eq!(s.select(m1, i1), v);
        assert_eq!(s.select(m1, i2), zero);
    }

    #[test]
    fn smtlib_division_semantics() {
        assert_eq!(bv_sdiv(8, 0x80, 0xff), 0x80);
        assert_eq!(bv_srem(8, 0x80, 0xff), 0);
        assert_eq!(bv_srem(8, (-7i64) as u64 & 0xff, 2), (-1i64) as u64 & 0xff);
        assert_eq!(bv_sdiv(8, 5, 0), 0xff);
        assert_eq!(bv_sdiv(8, (-5i64) as u64 & 0xff, 0), 1);
        assert_eq!(bv_srem(8, 5, 0), 5);
    }
}
