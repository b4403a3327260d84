//! Translation of bit-vector/array terms into an AIG.
//!
//! Arrays are eliminated during translation: a read through stores, `ite`
//! and constant arrays becomes a multiplexer chain, array symbols defined by
//! a top-level equation are expanded as macros, and reads from the remaining
//! free arrays are related by Ackermann constraints.

use std::collections::HashMap;

use crate::aig::{Aig, AigLit};
use crate::term::{Node, Sort, Term, TermStore};
use crate::SolverError;

type Bits = Vec<AigLit>;

struct FreeRead {
    index: Bits,
    value: Bits,
}

pub struct BitBlaster<'a> {
    store: &'a TermStore,
    pub aig: Aig,
    bits: HashMap<Term, Bits>,
    macros: HashMap<Term, Term>,
    expanding: Vec<Term>,
    reads: HashMap<(Term, Term), Bits>,
    free_reads: HashMap<Term, Vec<FreeRead>>,
    /// Input bits of every bit-vector or Boolean symbol encountered.
    pub symbols: Vec<(Term, Bits)>,
    /// Side constraints produced by array elimination.
    pub side: Vec<AigLit>,
}

impl<'a> BitBlaster<'a> {
    pub fn new(store: &'a TermStore) -> Self {
        BitBlaster {
            store,
            aig: Aig::new(),
            bits: HashMap::new(),
            macros: HashMap::new(),
            expanding: Vec::new(),
            reads: HashMap::new(),
            free_reads: HashMap::new(),
            symbols: Vec::new(),
            side: Vec::new(),
        }
    }

    /// Splits top-level assertions into array macro definitions and the
    /// remaining constraints.
    pub fn collect_macros(&mut self, assertions: &[Term]) -> Vec<Term> {
        let mut flat = Vec::new();
        let mut stack: Vec<Term> = assertions.iter().rev().copied().collect();
        while let Some(t) = stack.pop() {
            match self.store.node(t) {
                Node::And(xs) => stack.extend(xs.iter().rev()),
                _ => flat.push(t),
            }
        }
        let mut rest = Vec::new();
        for t in flat {
            if let Node::Eq(a, b) = self.store.node(t) {
                let (a, b) = (*a, *b);
                if let Sort::Array(..) = self.store.sort(a) {
                    let is_sym = |x: Term| matches!(self.store.node(x), Node::Symbol { .. });
                    if is_sym(a) && !self.macros.contains_key(&a) {
                        self.macros.insert(a, b);
                        continue;
                    }
                    if is_sym(b) && !self.macros.contains_key(&b) {
                        self.macros.insert(b, a);
                        continue;
                    }
                }
            }
            rest.push(t);
        }
        rest
    }

    pub fn macros(&self) -> &HashMap<Term, Term> {
        &self.macros
    }

    /// AIG literal of a Boolean term.
    pub fn boolean(&mut self, t: Term) -> Result<AigLit, SolverError> {
        debug_assert_eq!(self.store.sort(t), Sort::Bool);
        Ok(self.blast(t)?[0])
    }

    pub fn blast(&mut self, root: Term) -> Result<Bits, SolverError> {
        if let Some(b) = self.bits.get(&root) {
            return Ok(b.clone());
        }
        for t in self.store.topo_order(&[root]) {
            if self.bits.contains_key(&t) {
                continue;
            }
            if let Sort::Array(..) = self.store.sort(t) {
                continue;
            }
            let b = self.blast_node(t)?;
            self.bits.insert(t, b);
        }
        Ok(self.bits[&root].clone())
    }

    fn get(&self, t: Term) -> &Bits {
        &self.bits[&t]
    }

    fn blast_node(&mut self, t: Term) -> Result<Bits, SolverError> {
        let s = self.store;
        let out = match s.node(t) {
            Node::True => vec![AigLit::TRUE],
            Node::False => vec![AigLit::FALSE],
            Node::BvConst { width, value } => {
                (0..*width).map(|i| Aig::constant(value >> i & 1 == 1)).collect()
            }
            Node::Symbol { sort, .. } => {
                let w = match sort {
                    Sort::Bool => 1,
                    Sort::BitVec(w) => *w,
                    Sort::Array(..) => unreachable!(),
                };
                let b: Bits = (0..w).map(|_| self.aig.input()).collect();
                self.symbols.push((t, b.clone()));
                b
            }
            Node::Not(a) => vec![!self.get(*a)[0]],
            Node::And(xs) => {
                let ls: Vec<AigLit> = xs.iter().map(|x| self.get(*x)[0]).collect();
                vec![self.aig.and_all(&ls)]
            }
            Node::Or(xs) => {
                let ls: Vec<AigLit> = xs.iter().map(|x| self.get(*x)[0]).collect();
                vec![self.aig.or_all(&ls)]
            }
            Node::Ite(c, a, b) => {
                if let Sort::Array(..) = s.sort(t) {
                    unreachable!()
                }
                let c = self.get(*c)[0];
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.mux_bits(c, &a, &b)
            }
            Node::Eq(a, b) => {
                if let Sort::Array(..) = s.sort(*a) {
                    return Err(SolverError::Unsupported(
                        "equality between array terms outside a definition".into(),
                    ));
                }
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                vec![self.eq_bits(&a, &b)]
            }
            Node::BvNeg(a) => {
                let a = self.get(*a).clone();
                self.neg(&a)
            }
            Node::BvAdd(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.add(&a, &b, AigLit::FALSE).0
            }
            Node::BvSub(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.sub(&a, &b)
            }
            Node::BvMul(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.mul(&a, &b)
            }
            Node::BvUdiv(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.udivrem(&a, &b).0
            }
            Node::BvUrem(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                self.udivrem(&a, &b).1
            }
            Node::BvSdiv(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                let (sa, sb) = (*a.last().unwrap(), *b.last().unwrap());
                let (ua, ub) = (self.abs(&a), self.abs(&b));
                let q = self.udivrem(&ua, &ub).0;
                let nq = self.neg(&q);
                let flip = self.aig.xor(sa, sb);
                self.mux_bits(flip, &nq, &q)
            }
            Node::BvSrem(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                let sa = *a.last().unwrap();
                let (ua, ub) = (self.abs(&a), self.abs(&b));
                let r = self.udivrem(&ua, &ub).1;
                let nr = self.neg(&r);
                self.mux_bits(sa, &nr, &r)
            }
            Node::BvUlt(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                vec![self.ult(&a, &b)]
            }
            Node::BvUle(a, b) => {
                let (a, b) = (self.get(*a).clone(), self.get(*b).clone());
                vec![!self.ult(&b, &a)]
            }
            Node::BvSlt(a, b) => {
                let (a, b) = (self.flip_sign(*a), self.flip_sign(*b));
                vec![self.ult(&a, &b)]
            }
            Node::BvSle(a, b) => {
                let (a, b) = (self.flip_sign(*a), self.flip_sign(*b));
                vec![!self.ult(&b, &a)]
            }
            Node::Extract { hi, lo, arg } => self.get(*arg)[*lo as usize..=*hi as usize].to_vec(),
            Node::Concat(h, l) => {
                let mut v = self.get(*l).clone();
                v.extend_from_slice(self.get(*h));
                v
            }
            Node::ZeroExt { by, arg } => {
                let mut v = self.get(*arg).clone();
                v.extend(std::iter::repeat_n(AigLit::FALSE, *by as usize));
                v
            }
            Node::SignExt { by, arg } => {
                let mut v = self.get(*arg).clone();
                let sign = *v.last().unwrap();
                v.extend(std::iter::repeat_n(sign, *by as usize));
                v
            }
            Node::Select(arr, idx) => {
                let (arr, idx) = (*arr, *idx);
                self.read(arr, idx)?
            }
            Node::Store(..) | Node::ConstArray { .. } => unreachable!(),
        };
        Ok(out)
    }

    fn flip_sign(&self, t: Term) -> Bits {
        let mut v = self.get(t).clone();
        let last = v.len() - 1;
        v[last] = !v[last];
        v
    }

    fn mux_bits(&mut self, c: AigLit, a: &[AigLit], b: &[AigLit]) -> Bits {
        a.iter().zip(b).map(|(&x, &y)| self.aig.mux(c, x, y)).collect()
    }

    fn eq_bits(&mut self, a: &[AigLit], b: &[AigLit]) -> AigLit {
        let xs: Vec<AigLit> = a.iter().zip(b).map(|(&x, &y)| self.aig.xnor(x, y)).collect();
        self.aig.and_all(&xs)
    }

    fn add(&mut self, a: &[AigLit], b: &[AigLit], carry_in: AigLit) -> (Bits, AigLit) {
        let mut c = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let xy = self.aig.xor(x, y);
            out.push(self.aig.xor(xy, c));
            let g = self.aig.and(x, y);
            let p = self.aig.and(xy, c);
            c = self.aig.or(g, p);
        }
        (out, c)
    }

    fn sub(&mut self, a: &[AigLit], b: &[AigLit]) -> Bits {
        let nb: Bits = b.iter().map(|&x| !x).collect();
        self.add(a, &nb, AigLit::TRUE).0
    }

    fn neg(&mut self, a: &[AigLit]) -> Bits {
        let zero = vec![AigLit::FALSE; a.len()];
        self.sub(&zero, a)
    }

    fn abs(&mut self, a: &[AigLit]) -> Bits {
        let n = self.neg(a);
        self.mux_bits(*a.last().unwrap(), &n, a)
    }

    /// `a < b` unsigned, from the borrow of `a - b`.
    fn ult(&mut self, a: &[AigLit], b: &[AigLit]) -> AigLit {
        let nb: Bits = b.iter().map(|&x| !x).collect();
        !self.add(a, &nb, AigLit::TRUE).1
    }

    fn mul(&mut self, a: &[AigLit], b: &[AigLit]) -> Bits {
        let w = a.len();
        let mut acc = vec![AigLit::FALSE; w];
        for (i, &bi) in b.iter().enumerate() {
            let mut partial = vec![AigLit::FALSE; w];
            for j in 0..w - i {
                partial[i + j] = self.aig.and(a[j], bi);
            }
            acc = self.add(&acc, &partial, AigLit::FALSE).0;
        }
        acc
    }

    /// Restoring division. A zero divisor yields an all-ones quotient and
    /// the dividend as remainder.
    fn udivrem(&mut self, a: &[AigLit], b: &[AigLit]) -> (Bits, Bits) {
        let w = a.len();
        let mut rem = vec![AigLit::FALSE; w];
        let mut quot = vec![AigLit::FALSE; w];
        for i in (0..w).rev() {
            // Shifted-out top bit of the remainder makes it exceed any divisor.
            let overflow = rem[w - 1];
            rem.rotate_right(1);
            rem[0] = a[i];
            let lt = self.ult(&rem, b);
            let ge = self.aig.or(overflow, !lt);
            let diff = self.sub(&rem, b);
            rem = self.mux_bits(ge, &diff, &rem);
            quot[i] = ge;
        }
        (quot, rem)
    }

    fn read(&mut self, arr: Term, idx: Term) -> Result<Bits, SolverError> {
        if let Some(b) = self.reads.get(&(arr, idx)) {
            return Ok(b.clone());
        }
        let s = self.store;
        let out = match s.node(arr) {
            Node::ConstArray { value, .. } => self.blast(*value)?,
            Node::Store(inner, i, v) => {
                let (inner, i, v) = (*inner, *i, *v);
                let ib = self.blast(i)?;
                let xb = self.blast(idx)?;
                let vb = self.blast(v)?;
                let hit = self.eq_bits(&ib, &xb);
                if hit == AigLit::TRUE {
                    vb
                } else {
                    let rest = self.read(inner, idx)?;
                    self.mux_bits(hit, &vb, &rest)
                }
            }
            Node::Ite(c, a, b) => {
                let (c, a, b) = (*c, *a, *b);
                let cb = self.blast(c)?[0];
                let ab = self.read(a, idx)?;
                let bb = self.read(b, idx)?;
                self.mux_bits(cb, &ab, &bb)
            }
            Node::Symbol { name, sort } => {
                if let Some(&def) = self.macros.get(&arr) {
                    if self.expanding.contains(&arr) {
                        return Err(SolverError::Unsupported(format!(
                            "cyclic definition of array `{name}`"
                        )));
                    }
                    self.expanding.push(arr);
                    let r = self.read(def, idx);
                    self.expanding.pop();
                    r?
                } else {
                    let Sort::Array(_, ew) = sort else {
                        unreachable!()
                    };
                    let xb = self.blast(idx)?;
                    let value: Bits = (0..*ew).map(|_| self.aig.input()).collect();
                    let prior = self.free_reads.remove(&arr).unwrap_or_default();
                    for r in &prior {
                        let same = self.eq_bits(&r.index, &xb);
                        let agree = self.eq_bits(&r.value, &value);
                        let c = self.aig.or(!same, agree);
                        self.side.push(c);
                    }
                    let mut prior = prior;
                    prior.push(FreeRead {
                        index: xb,
                        value: value.clone(),
                    });
                    self.free_reads.insert(arr, prior);
                    value
                }
            }
            other => {
                return Err(SolverError::Unsupported(format!(
                    "array-valued term {other:?}"
                )))
            }
        };
        self.reads.insert((arr, idx), out.clone());
        Ok(out)
    }

    /// Reads recorded for each free array: `(index bits, value bits)`.
    pub fn free_array_reads(&self) -> impl Iterator<Item = (Term, Vec<(&Bits, &Bits)>)> {
        self.free_reads
            .iter()
            .map(|(t, rs)| (*t, rs.iter().map(|r| (&r.index, &r.value)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_with, Value};
    use proptest::prelude::*;

    fn sim_bits(bb: &BitBlaster, env: &HashMap<usize, bool>, bits: &[AigLit]) -> u64 {
        bb.aig
            .simulate(env, bits)
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (b as u64) << i)
    }

    /// Every binary operator at width 4 against the evaluator, all inputs.
    #[test]
    fn binary_operators_exhaustive_width4() {
        type Ctor = fn(&mut TermStore, Term, Term) -> Term;
        let ops: Vec<(&str, Ctor)> = vec![
            ("add", TermStore::bv_add),
            ("sub", TermStore::bv_sub),
            ("mul", TermStore::bv_mul),
            ("udiv", TermStore::bv_udiv),
            ("urem", TermStore::bv_urem),
            ("sdiv", TermStore::bv_sdiv),
            ("srem", TermStore::bv_srem),
        ];
        for (name, op) in ops {
            let mut s = TermStore::new();
            let x = s.symbol("x", Sort::BitVec(4));
            let y = s.symbol("y", Sort::BitVec(4));
            let t = op(&mut s, x, y);
            let mut bb = BitBlaster::new(&s);
            let out = bb.blast(t).unwrap();
            let xb = bb.blast(x).unwrap();
            let yb = bb.blast(y).unwrap();
            for xv in 0..16u64 {
                for yv in 0..16u64 {
                    let mut env = HashMap::new();
                    for i in 0..4 {
                        env.insert(xb[i].node(), xv >> i & 1 == 1);
                        env.insert(yb[i].node(), yv >> i & 1 == 1);
                    }
                    let vals = HashMap::from([
                        ("x".to_string(), Value::Bv { width: 4, value: xv }),
                        ("y".to_string(), Value::Bv { width: 4, value: yv }),
                    ]);
                    let expect = eval_with(&s, &vals, t).as_u64();
                    assert_eq!(sim_bits(&bb, &env, &out), expect, "{name} {xv} {yv}");
                }
            }
        }
    }

    #[derive(Debug, Clone)]
    enum E {
        X,
        Y,
        C(u8),
        Bin(u8, Box<E>, Box<E>),
        Ite(u8, Box<E>, Box<E>, Box<E>, Box<E>),
        Neg(Box<E>),
        Read(Box<E>),
    }

    fn arb_e() -> impl Strategy<Value = E> {
        let leaf = prop_oneof![Just(E::X), Just(E::Y), any::<u8>().prop_map(E::C)];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                (0u8..7, inner.clone(), inner.clone())
                    .prop_map(|(o, a, b)| E::Bin(o, Box::new(a), Box::new(b))),
                (0u8..4, inner.clone(), inner.clone(), inner.clone(), inner.clone()).prop_map(
                    |(o, a, b, c, d)| E::Ite(o, Box::new(a), Box::new(b), Box::new(c), Box::new(d))
                ),
                inner.clone().prop_map(|a| E::Neg(Box::new(a))),
                inner.prop_map(|a| E::Read(Box::new(a))),
            ]
        })
    }

    fn build(s: &mut TermStore, e: &E, mem: Term) -> Term {
        match e {
            E::X => s.symbol("x", Sort::BitVec(8)),
            E::Y => s.symbol("y", Sort::BitVec(8)),
            E::C(c) => s.bv(8, *c as u64),
            E::Neg(a) => {
                let a = build(s, a, mem);
                s.bv_neg(a)
            }
            E::Read(a) => {
                let a = build(s, a, mem);
                s.select(mem, a)
            }
            E::Bin(o, a, b) => {
                let (a, b) = (build(s, a, mem), build(s, b, mem));
                match o {
                    0 => s.bv_add(a, b),
                    1 => s.bv_sub(a, b),
                    2 => s.bv_mul(a, b),
                    3 => s.bv_sdiv(a, b),
                    4 => s.bv_srem(a, b),
                    5 => s.bv_udiv(a, b),
                    _ => s.bv_urem(a, b),
                }
            }
            E::Ite(o, a, b, c, d) => {
                let (a, b) = (build(s, a, mem), build(s, b, mem));
                let (c, d) = (build(s, c, mem), build(s, d, mem));
                let cond = match o {
                    0 => s.bv_slt(a, b),
                    1 => s.bv_ule(a, b),
                    2 => s.eq(a, b),
                    _ => s.bv_sle(a, b),
                };
                s.ite(cond, c, d)
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        /// Random 8-bit expressions over a memory defined by stores: the
        /// circuit agrees with the evaluator on every input pair.
        #[test]
        fn circuits_match_evaluator(e in arb_e(), stores in proptest::collection::vec((any::<u8>(), any::<u8>()), 0..3)) {
            let mut s = TermStore::new();
            let zero = s.bv(8, 0);
            let mut mem = s.const_array(8, zero);
            for (i, v) in &stores {
                let (i, v) = (s.bv(8, *i as u64), s.bv(8, *v as u64));
                mem = s.store(mem, i, v);
            }
            let x = s.symbol("x", Sort::BitVec(8));
            let y = s.symbol("y", Sort::BitVec(8));
            mem = s.store(mem, x, x);
            let t = build(&mut s, &e, mem);
            let mut bb = BitBlaster::new(&s);
            let out = bb.blast(t).unwrap();
            let xb = bb.blast(x).unwrap();
            let yb = bb.blast(y).unwrap();
            for xv in (0..256u64).step_by(7) {
                for yv in (0..256u64).step_by(13) {
                    let mut env = HashMap::new();
                    for i in 0..8 {
                        env.insert(xb[i].node(), xv >> i & 1 == 1);
                        env.insert(yb[i].node(), yv >> i & 1 == 1);
                    }
                    let vals = HashMap::from([
                        ("x".to_string(), Value::Bv { width: 8, value: xv }),
                        ("y".to_string(), Value::Bv { width: 8, value: yv }),
                    ]);
                    let expect = eval_with(&s, &vals, t).as_u64();
                    prop_assert_eq!(sim_bits(&bb, &env, &out), expect);
                }
            }
        }
    }
}
