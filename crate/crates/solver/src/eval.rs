//! Direct evaluation of terms under a symbol assignment.
//!
//! This is the reference semantics used to validate models returned by any
//! backend. It shares nothing with the bit-blaster beyond the term language.

use std::collections::{BTreeMap, HashMap};

use crate::term::{
    bv_sdiv, bv_srem, bv_udiv, bv_urem, mask, to_signed, Node, Sort, Term, TermStore,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Bv { width: u32, value: u64 },
    Array { default: u64, entries: BTreeMap<u64, u64> },
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected Bool value, found {other:?}"),
        }
    }

    pub fn as_u64(&self) -> u64 {
        match self {
            Value::Bv { value, .. } => *value,
            Value::Bool(b) => *b as u64,
            other => panic!("expected bit-vector value, found {other:?}"),
        }
    }

    pub fn as_i64(&self) -> i64 {
        match self {
            Value::Bv { width, value } => to_signed(*width, *value),
            Value::Bool(b) => *b as i64,
            other => panic!("expected bit-vector value, found {other:?}"),
        }
    }

    fn read(&self, idx: u64) -> u64 {
        match self {
            Value::Array { default, entries } => entries.get(&idx).copied().unwrap_or(*default),
            other => panic!("expected array value, found {other:?}"),
        }
    }

    /// Zero value of a sort.
    pub fn default_for(sort: Sort) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::BitVec(width) => Value::Bv { width, value: 0 },
            Sort::Array(..) => Value::Array {
                default: 0,
                entries: BTreeMap::new(),
            },
        }
    }
}

/// Evaluates terms with memoisation. Symbols are resolved through `env`;
/// unresolved symbols evaluate to the zero value of their sort.
pub struct Evaluator<'a, F: FnMut(&str, Sort) -> Option<Value>> {
    store: &'a TermStore,
    env: F,
    memo: HashMap<Term, Value>,
}

impl<'a, F: FnMut(&str, Sort) -> Option<Value>> Evaluator<'a, F> {
    pub fn new(store: &'a TermStore, env: F) -> Self {
        Self {
            store,
            env,
            memo: HashMap::new(),
        }
    }

    /// Binds a term (normally a symbol) to a value, overriding `env`.
    pub fn bind(&mut self, t: Term, v: Value) {
        self.memo.insert(t, v);
    }

    pub fn eval(&mut self, root: Term) -> Value {
        if let Some(v) = self.memo.get(&root) {
            return v.clone();
        }
        for t in self.store.topo_order(&[root]) {
            if self.memo.contains_key(&t) {
                continue;
            }
            let v = self.eval_node(t);
            self.memo.insert(t, v);
        }
        self.memo[&root].clone()
    }

    fn get(&self, t: Term) -> &Value {
        &self.memo[&t]
    }

    fn bv(&self, t: Term) -> (u32, u64) {
        match self.get(t) {
            Value::Bv { width, value } => (*width, *value),
            other => panic!("expected bit-vector operand, found {other:?}"),
        }
    }

    fn eval_node(&mut self, t: Term) -> Value {
        let s = self.store;
        let bvv = |width: u32, value: u64| Value::Bv {
            width,
            value: value & mask(width),
        };
        match s.node(t) {
            Node::True => Value::Bool(true),
            Node::False => Value::Bool(false),
            Node::BvConst { width, value } => bvv(*width, *value),
            Node::Symbol { name, sort } => {
                (self.env)(name, *sort).unwrap_or_else(|| Value::default_for(*sort))
            }
            Node::Not(a) => Value::Bool(!self.get(*a).as_bool()),
            Node::And(xs) => Value::Bool(xs.iter().all(|x| self.get(*x).as_bool())),
            Node::Or(xs) => Value::Bool(xs.iter().any(|x| self.get(*x).as_bool())),
            Node::Ite(c, a, b) => {
                if self.get(*c).as_bool() {
                    self.get(*a).clone()
                } else {
                    self.get(*b).clone()
                }
            }
            Node::Eq(a, b) => Value::Bool(self.get(*a) == self.get(*b)),
            Node::BvNeg(a) => {
                let (w, x) = self.bv(*a);
                bvv(w, x.wrapping_neg())
            }
            Node::BvAdd(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, x.wrapping_add(y))
            }
            Node::BvSub(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, x.wrapping_sub(y))
            }
            Node::BvMul(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, x.wrapping_mul(y))
            }
            Node::BvSdiv(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, bv_sdiv(w, x, y))
            }
            Node::BvSrem(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, bv_srem(w, x, y))
            }
            Node::BvUdiv(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, bv_udiv(w, x, y))
            }
            Node::BvUrem(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                bvv(w, bv_urem(w, x, y))
            }
            Node::BvSlt(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                Value::Bool(to_signed(w, x) < to_signed(w, y))
            }
            Node::BvSle(a, b) => {
                let ((w, x), (_, y)) = (self.bv(*a), self.bv(*b));
                Value::Bool(to_signed(w, x) <= to_signed(w, y))
            }
            Node::BvUlt(a, b) => Value::Bool(self.bv(*a).1 < self.bv(*b).1),
            Node::BvUle(a, b) => Value::Bool(self.bv(*a).1 <= self.bv(*b).1),
            Node::Extract { hi, lo, arg } => {
                let (_, x) = self.bv(*arg);
                bvv(hi - lo + 1, x >> lo)
            }
            Node::Concat(h, l) => {
                let ((hw, x), (lw, y)) = (self.bv(*h), self.bv(*l));
                bvv(hw + lw, (x << lw) | y)
            }
            Node::ZeroExt { by, arg } => {
                let (w, x) = self.bv(*arg);
                bvv(w + by, x)
            }
            Node::SignExt { by, arg } => {
                let (w, x) = self.bv(*arg);
                bvv(w + by, to_signed(w, x) as u64)
            }
            Node::ConstArray { value, .. } => Value::Array {
                default: self.bv(*value).1,
                entries: BTreeMap::new(),
            },
            Node::Select(arr, idx) => {
                let (_, i) = self.bv(*idx);
                let Sort::Array(_, ew) = s.sort(*arr) else {
                    unreachable!()
                };
                bvv(ew, self.get(*arr).read(i))
            }
            Node::Store(arr, idx, val) => {
                let (_, i) = self.bv(*idx);
                let (_, v) = self.bv(*val);
                let mut a = self.get(*arr).clone();
                if let Value::Array { entries, .. } = &mut a {
                    entries.insert(i, v);
                }
                a
            }
        }
    }
}

/// Convenience wrapper evaluating one term under a symbol map.
pub fn eval_with(store: &TermStore, values: &HashMap<String, Value>, t: Term) -> Value {
    Evaluator::new(store, |name, _| values.get(name).cloned()).eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_arithmetic_and_arrays() {
        let mut s = TermStore::new();
        let x = s.symbol("x", Sort::BitVec(8));
        let y = s.symbol("y", Sort::BitVec(8));
        let sum = s.bv_add(x, y);
        let lt = s.bv_slt(sum, x);
        let zero = s.bv(8, 0);
        let arr = s.const_array(8, zero);
        let st = s.store(arr, x, y);
        let rd = s.select(st, x);
        let mut env = HashMap::new();
        env.insert("x".to_string(), Value::Bv { width: 8, value: 100 });
        env.insert("y".to_string(), Value::Bv { width: 8, value: 100 });
        assert_eq!(eval_with(&s, &env, sum).as_i64(), -56);
        assert!(eval_with(&s, &env, lt).as_bool());
        assert_eq!(eval_with(&s, &env, rd).as_u64(), 100);
    }
}
