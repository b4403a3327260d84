//! And-inverter graphs with structural hashing, plus Tseitin encoding into
//! the SAT solver.

use std::collections::HashMap;

use crate::sat::{Lit, SatSolver};

/// Literal of an AIG node: `node << 1 | negated`. Node 0 is constant false.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AigLit(u32);

impl AigLit {
    pub const FALSE: AigLit = AigLit(0);
    pub const TRUE: AigLit = AigLit(1);

    pub fn node(self) -> usize {
        (self.0 >> 1) as usize
    }
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
    pub fn is_const(self) -> bool {
        self.node() == 0
    }
}

impl std::ops::Not for AigLit {
    type Output = AigLit;
    fn not(self) -> AigLit {
        AigLit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, Debug)]
enum AigNode {
    Const,
    Input,
    And(AigLit, AigLit),
}

#[derive(Debug)]
pub struct Aig {
    nodes: Vec<AigNode>,
    hash: HashMap<(AigLit, AigLit), AigLit>,
}

impl Default for Aig {
    fn default() -> Self {
        Self::new()
    }
}

impl Aig {
    pub fn new() -> Self {
        Aig {
            nodes: vec![AigNode::Const],
            hash: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn constant(b: bool) -> AigLit {
        if b {
            AigLit::TRUE
        } else {
            AigLit::FALSE
        }
    }

    pub fn input(&mut self) -> AigLit {
        self.nodes.push(AigNode::Input);
        AigLit(((self.nodes.len() - 1) as u32) << 1)
    }

    pub fn and(&mut self, a: AigLit, b: AigLit) -> AigLit {
        if a == AigLit::FALSE || b == AigLit::FALSE || a == !b {
            return AigLit::FALSE;
        }
        if a == AigLit::TRUE || a == b {
            return b;
        }
        if b == AigLit::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&l) = self.hash.get(&key) {
            return l;
        }
        self.nodes.push(AigNode::And(key.0, key.1));
        let l = AigLit(((self.nodes.len() - 1) as u32) << 1);
        self.hash.insert(key, l);
        l
    }

    pub fn or(&mut self, a: AigLit, b: AigLit) -> AigLit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: AigLit, b: AigLit) -> AigLit {
        let x = self.and(a, !b);
        let y = self.and(!a, b);
        self.or(x, y)
    }

    pub fn xnor(&mut self, a: AigLit, b: AigLit) -> AigLit {
        !self.xor(a, b)
    }

    /// `if c then t else e`.
    pub fn mux(&mut self, c: AigLit, t: AigLit, e: AigLit) -> AigLit {
        if t == e {
            return t;
        }
        let x = self.and(c, t);
        let y = self.and(!c, e);
        self.or(x, y)
    }

    pub fn and_all(&mut self, lits: &[AigLit]) -> AigLit {
        lits.iter().fold(AigLit::TRUE, |acc, &l| self.and(acc, l))
    }

    pub fn or_all(&mut self, lits: &[AigLit]) -> AigLit {
        lits.iter().fold(AigLit::FALSE, |acc, &l| self.or(acc, l))
    }

    /// Evaluates literals under an assignment to input nodes.
    pub fn simulate(&self, inputs: &HashMap<usize, bool>, lits: &[AigLit]) -> Vec<bool> {
        let max = lits.iter().map(|l| l.node()).max().unwrap_or(0);
        let mut val = vec![false; max + 1];
        for i in 1..=max {
            val[i] = match self.nodes[i] {
                AigNode::Const => false,
                AigNode::Input => inputs.get(&i).copied().unwrap_or(false),
                AigNode::And(a, b) => {
                    (val[a.node()] ^ a.is_neg()) && (val[b.node()] ^ b.is_neg())
                }
            };
        }
        lits.iter().map(|l| val[l.node()] ^ l.is_neg()).collect()
    }
}

/// Incremental Tseitin translation of AIG cones into a SAT instance.
pub struct Cnf {
    pub solver: SatSolver,
    var_of: HashMap<usize, u32>,
}

impl Default for Cnf {
    fn default() -> Self {
        Self::new()
    }
}

impl Cnf {
    pub fn new() -> Self {
        let mut solver = SatSolver::new();
        let f = solver.new_var();
        solver.add_clause(&[Lit::new(f, true)]);
        let mut var_of = HashMap::new();
        var_of.insert(0, f);
        Cnf { solver, var_of }
    }

    /// SAT literal for an AIG literal, encoding its cone on first use.
    pub fn lit(&mut self, aig: &Aig, root: AigLit) -> Lit {
        let mut stack = vec![(root.node(), false)];
        while let Some((n, expanded)) = stack.pop() {
            if self.var_of.contains_key(&n) {
                continue;
            }
            match aig.nodes[n] {
                AigNode::Const => unreachable!("constant node is pre-encoded"),
                AigNode::Input => {
                    let v = self.solver.new_var();
                    self.var_of.insert(n, v);
                }
                AigNode::And(a, b) => {
                    if expanded {
                        let g = self.solver.new_var();
                        self.var_of.insert(n, g);
                        let la = self.sat_lit(a);
                        let lb = self.sat_lit(b);
                        let gl = Lit::new(g, false);
                        self.solver.add_clause(&[!gl, la]);
                        self.solver.add_clause(&[!gl, lb]);
                        self.solver.add_clause(&[gl, !la, !lb]);
                    } else {
                        stack.push((n, true));
                        for c in [a, b] {
                            if !self.var_of.contains_key(&c.node()) {
                                stack.push((c.node(), false));
                            }
                        }
                    }
                }
            }
        }
        self.sat_lit(root)
    }

    fn sat_lit(&self, l: AigLit) -> Lit {
        Lit::new(self.var_of[&l.node()], l.is_neg())
    }

    /// Value of an encoded AIG literal in a SAT model; unencoded inputs are
    /// unconstrained and read as false.
    pub fn model_value(&self, model: &[bool], l: AigLit) -> bool {
        match self.var_of.get(&l.node()) {
            Some(&v) => model[v as usize] ^ l.is_neg(),
            None => l.is_neg(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_hashing_and_folding() {
        let mut g = Aig::new();
        let a = g.input();
        let b = g.input();
        assert_eq!(g.and(a, b), g.and(b, a));
        assert_eq!(g.and(a, !a), AigLit::FALSE);
        assert_eq!(g.and(a, AigLit::TRUE), a);
        assert_eq!(g.mux(a, b, b), b);
    }

    #[test]
    fn xor_truth_table() {
        let mut g = Aig::new();
        let a = g.input();
        let b = g.input();
        let x = g.xor(a, b);
        for (va, vb) in [(false, false), (false, true), (true, false), (true, true)] {
            let inputs = HashMap::from([(a.node(), va), (b.node(), vb)]);
            assert_eq!(g.simulate(&inputs, &[x]), vec![va ^ vb]);
        }
    }
}
