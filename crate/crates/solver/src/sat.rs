//! Conflict-driven clause-learning SAT solver.
//!
//! Two watched literals, first-UIP learning with local minimisation,
//! VSIDS branching with phase saving, Luby restarts and LBD-based
//! learnt-clause reduction.

use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, negative: bool) -> Lit {
        Lit(var << 1 | negative as u32)
    }
    pub fn var(self) -> u32 {
        self.0 >> 1
    }
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Satisfying assignment indexed by variable.
    Sat(Vec<bool>),
    Unsat,
    /// Resource limit reached before a decision.
    Unknown,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum LBool {
    True,
    False,
    Undef,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: Lit,
}

/// Binary max-heap over variables ordered by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }
    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }
    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.sift_up(i, act);
    }
    fn increased(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.sift_up(i, act);
        }
    }
    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }
    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = Some(i);
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

pub struct SatSolver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    ok: bool,
    num_learnts: usize,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

impl Default for SatSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl SatSolver {
    pub fn new() -> Self {
        SatSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::default(),
            ok: true,
            num_learnts: 0,
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.deleted && !c.learnt).count()
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.assigns.len() as u32;
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(true);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow(self.assigns.len());
        self.order.insert(v, &self.activity);
        v
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[l.var() as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.is_neg() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
            LBool::False => {
                if l.is_neg() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at decision level 0. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut ls: Vec<Lit> = lits.to_vec();
        ls.sort();
        ls.dedup();
        let mut out = Vec::with_capacity(ls.len());
        for (i, &l) in ls.iter().enumerate() {
            if i + 1 < ls.len() && ls[i + 1] == !l {
                return true;
            }
            match self.value(l) {
                LBool::True => return true,
                LBool::False => {}
                LBool::Undef => out.push(l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(out, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watcher {
            clause: idx,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watcher {
            clause: idx,
            blocker: lits[0],
        });
        if learnt {
            self.num_learnts += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        });
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var() as usize;
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = if l.is_neg() { LBool::False } else { LBool::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.clause as usize].deleted {
                    continue;
                }
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                {
                    let c = &mut self.clauses[ci].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[j] = Watcher {
                        clause: w.clause,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                let mut found = false;
                for k in 2..len {
                    let l = self.clauses[ci].lits[k];
                    if self.value(l) != LBool::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[l.idx()].push(Watcher {
                            clause: w.clause,
                            blocker: first,
                        });
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                ws[j] = Watcher {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == LBool::False {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.clause));
                }
            }
            ws.truncate(j);
            // Watchers added to this list while it was taken out are kept.
            let added = std::mem::take(&mut self.watches[false_lit.idx()]);
            ws.extend(added);
            self.watches[false_lit.idx()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, c: u32) {
        let cl = &mut self.clauses[c as usize];
        cl.activity += self.cla_inc;
        if cl.activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            if self.clauses[confl as usize].learnt {
                self.bump_clause(confl);
            }
            let start = if p.is_some() { 1 } else { 0 };
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[start..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var() as usize].expect("non-decision literal has a reason");
        }
        learnt[0] = !p.unwrap();

        // Local minimisation: drop literals implied by the rest of the clause.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                match self.reason[l.var() as usize] {
                    None => true,
                    Some(r) => self.clauses[r as usize].lits[1..].iter().any(|&q| {
                        !self.seen[q.var() as usize] && self.level[q.var() as usize] > 0
                    }),
                }
            })
            .collect();
        for &l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut out: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter_map(|(l, k)| k.then_some(l))
            .collect();

        let bt = if out.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var() as usize] > self.level[out[max_i].var() as usize] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            self.level[out[1].var() as usize]
        };
        (out, bt)
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var() as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = !l.is_neg();
            self.order.insert(l.var(), &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == LBool::Undef {
                return Some(Lit::new(v, !self.polarity[v as usize]));
            }
        }
        None
    }

    fn is_locked(&self, ci: usize) -> bool {
        let l0 = self.clauses[ci].lits[0];
        self.value(l0) == LBool::True && self.reason[l0.var() as usize] == Some(ci as u32)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lbd > 2 && c.lits.len() > 2
            })
            .collect();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a], &self.clauses[b]);
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.partial_cmp(&cb.activity).unwrap())
        });
        let remove = cands.len() / 2;
        for &ci in cands.iter().take(remove) {
            if !self.is_locked(ci) {
                self.clauses[ci].deleted = true;
                self.clauses[ci].lits = Vec::new();
                self.num_learnts -= 1;
            }
        }
    }

    fn search(&mut self, budget: u64, deadline: Option<Instant>) -> Option<bool> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    return Some(false);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let ci = self.attach(learnt, true, lbd);
                    self.bump_clause(ci);
                    self.enqueue(first, Some(ci));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.conflicts.is_multiple_of(256) {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            return None;
                        }
                    }
                }
            } else {
                if local_conflicts >= budget {
                    self.cancel_until(0);
                    return None;
                }
                if self.num_learnts > 20_000 + self.trail.len() {
                    self.reduce_db();
                }
                self.decisions += 1;
                match self.pick_branch() {
                    None => return Some(true),
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }

    /// Decides satisfiability, giving up with `Unknown` at `deadline`.
    pub fn solve(&mut self, deadline: Option<Instant>) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        let mut restart = 0u64;
        loop {
            let budget = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            match self.search(budget, deadline) {
                Some(true) => {
                    let model = self
                        .assigns
                        .iter()
                        .map(|a| *a == LBool::True)
                        .collect();
                    self.cancel_until(0);
                    return SatResult::Sat(model);
                }
                Some(false) => {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                None => {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            self.cancel_until(0);
                            return SatResult::Unknown;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(x: i32) -> Lit {
        Lit::new(x.unsigned_abs() - 1, x < 0)
    }

    fn solve_cnf(nvars: u32, cnf: &[Vec<i32>]) -> SatResult {
        let mut s = SatSolver::new();
        for _ in 0..nvars {
            s.new_var();
        }
        for c in cnf {
            let ls: Vec<Lit> = c.iter().map(|&x| lit(x)).collect();
            s.add_clause(&ls);
        }
        s.solve(None)
    }

    fn satisfies(model: &[bool], cnf: &[Vec<i32>]) -> bool {
        cnf.iter().all(|c| {
            c.iter()
                .any(|&x| model[(x.unsigned_abs() - 1) as usize] == (x > 0))
        })
    }

    #[test]
    fn small_sat_and_unsat() {
        let cnf = vec![vec![1, 2], vec![-1, 2], vec![1, -2]];
        match solve_cnf(2, &cnf) {
            SatResult::Sat(m) => assert!(satisfies(&m, &cnf)),
            r => panic!("{r:?}"),
        }
        let cnf = vec![vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]];
        assert_eq!(solve_cnf(2, &cnf), SatResult::Unsat);
    }

    #[test]
    fn pigeonhole_4_into_3_is_unsat() {
        // p(i,j): pigeon i in hole j
        let var = |i: i32, j: i32| i * 3 + j + 1;
        let mut cnf = Vec::new();
        for i in 0..4 {
            cnf.push((0..3).map(|j| var(i, j)).collect());
        }
        for j in 0..3 {
            for a in 0..4 {
                for b in a + 1..4 {
                    cnf.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        assert_eq!(solve_cnf(12, &cnf), SatResult::Unsat);
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<f64> = (0..7).map(|i| luby(2.0, i)).collect();
        assert_eq!(seq, vec![1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 4.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn brute_force(nvars: u32, cnf: &[Vec<i32>]) -> bool {
            (0..1u32 << nvars).any(|bits| {
                let m: Vec<bool> = (0..nvars).map(|v| bits >> v & 1 == 1).collect();
                satisfies(&m, cnf)
            })
        }

        proptest! {
            #[test]
            fn agrees_with_enumeration(
                cnf in proptest::collection::vec(
                    proptest::collection::vec((1i32..=8, any::<bool>()), 1..4), 1..40)
            ) {
                let cnf: Vec<Vec<i32>> = cnf
                    .into_iter()
                    .map(|c| c.into_iter().map(|(v, n)| if n { -v } else { v }).collect())
                    .collect();
                let expected = brute_force(8, &cnf);
                match solve_cnf(8, &cnf) {
                    SatResult::Sat(m) => {
                        prop_assert!(expected);
                        prop_assert!(satisfies(&m, &cnf));
                    }
                    SatResult::Unsat => prop_assert!(!expected),
                    SatResult::Unknown => prop_assert!(false, "no deadline given"),
                }
            }
        }
    }
}
