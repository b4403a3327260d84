//! Deciding the equation system and reporting the result.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;
use std::time::Instant;

use cxxbmc_solver::{smtlib, Backend, Model, SolveResult, SolverError, Term, TermStore, Value};
use thiserror::Error;

use crate::frontend::ast::SourceLoc;
use crate::goto::{GotoProgram, Sort};
use crate::symex::exec::OBJ_SHIFT;
use crate::symex::{EqKind, SsaSystem};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("counterexample does not falsify any property")]
    Reconstruct,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub backend: Backend,
    /// Decide every property separately instead of one joint query.
    pub per_property: bool,
    pub deadline: Option<Instant>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            backend: Backend::Builtin,
            per_property: false,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Successful,
    Failed,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Successful => "SUCCESSFUL",
            Verdict::Failed => "FAILED",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub loc: SourceLoc,
    pub function: String,
    pub lhs: String,
    pub value: String,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// Index of the violated property in the GOTO program.
    pub prop: usize,
    pub steps: Vec<TraceStep>,
    /// Nondet values along the failing path, in execution order.
    pub inputs: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub failures: Vec<Counterexample>,
    /// Status of every property in per-property mode.
    pub statuses: BTreeMap<usize, Verdict>,
    pub reason: Option<String>,
}

/// SMT-LIB script asserting the equations and the negated properties.
pub fn smt_script(sys: &mut SsaSystem) -> String {
    let mut named: Vec<(Term, Option<String>)> = Vec::new();
    let defs: Vec<(Term, Term, String)> = sys
        .equations
        .iter()
        .filter_map(|e| e.lhs.map(|l| (l, e.rhs, e.name.clone())))
        .collect();
    for (l, r, name) in defs {
        let t = sys.store.eq(l, r);
        named.push((t, Some(name)));
    }
    let lits = sys.property_literals();
    let negs: Vec<Term> = lits.iter().map(|&l| sys.store.not(l)).collect();
    let goal = sys.store.or(&negs);
    named.push((goal, Some("property-violation".into())));
    smtlib::print_script(&sys.store, &named, false).text
}

/// Definitions of SSA symbols: symbol to (constraint, right-hand side).
type Defs = HashMap<Term, (Term, Term)>;

fn definitions(sys: &mut SsaSystem) -> Defs {
    let pairs: Vec<(Term, Term)> = sys.equations.iter().filter_map(|e| e.lhs.map(|l| (l, e.rhs))).collect();
    pairs
        .into_iter()
        .map(|(l, r)| (l, (sys.store.eq(l, r), r)))
        .collect()
}

/// Constraints in the cone of influence of `goal`. Definitions outside the
/// cone can always be satisfied by evaluating them in order.
fn slice(st: &TermStore, defs: &Defs, goal: Term) -> Vec<Term> {
    let mut seen: HashSet<Term> = HashSet::new();
    let mut stack = vec![goal];
    let mut out = Vec::new();
    while let Some(t) = stack.pop() {
        if !seen.insert(t) {
            continue;
        }
        if let Some(&(c, rhs)) = defs.get(&t) {
            out.push(c);
            stack.push(rhs);
        }
        stack.extend(st.children(t));
    }
    out.sort();
    out
}

/// Gives every SSA symbol the value of its definition when the solver did
/// not see it.
fn complete(sys: &SsaSystem, m: &mut Model) {
    for e in &sys.equations {
        if let Some(l) = e.lhs {
            let name = sys.store.symbol_name(l).unwrap();
            if !m.values.contains_key(name) {
                let v = m.eval(&sys.store, e.rhs);
                m.values.insert(name.to_string(), v);
            }
        }
    }
}

fn solve(sys: &mut SsaSystem, defs: &Defs, negs: &[Term], opts: &VerifyOptions) -> Result<SolveResult, VerifyError> {
    let goal = sys.store.or(negs);
    if sys.store.as_bool(goal) == Some(false) {
        return Ok(SolveResult::Unsat);
    }
    let mut all = slice(&sys.store, defs, goal);
    all.push(goal);
    let r = cxxbmc_solver::check(&sys.store, &all, &opts.backend, opts.deadline)?;
    Ok(match r {
        SolveResult::Sat(mut m) => {
            complete(sys, &mut m);
            SolveResult::Sat(m)
        }
        r => r,
    })
}

pub fn verify(prog: &GotoProgram, sys: &mut SsaSystem, opts: &VerifyOptions) -> Result<Outcome, VerifyError> {
    let defs = definitions(sys);
    let lits = sys.property_literals();
    let mut out = Outcome {
        verdict: Verdict::Successful,
        failures: vec![],
        statuses: BTreeMap::new(),
        reason: None,
    };
    if !opts.per_property {
        let negs: Vec<Term> = lits.iter().map(|&l| sys.store.not(l)).collect();
        match solve(sys, &defs, &negs, opts)? {
            SolveResult::Unsat => {}
            SolveResult::Unknown(r) => {
                out.verdict = Verdict::Unknown;
                out.reason = Some(r);
            }
            SolveResult::Sat(m) => {
                let i = (0..lits.len())
                    .find(|&i| !m.eval(&sys.store, lits[i]).as_bool())
                    .ok_or(VerifyError::Reconstruct)?;
                out.verdict = Verdict::Failed;
                out.failures.push(counterexample(sys, &m, sys.properties[i].prop));
            }
        }
        return Ok(out);
    }
    let mut by_prop: BTreeMap<usize, Vec<Term>> = (0..prog.properties.len()).map(|p| (p, vec![])).collect();
    for (inst, &l) in sys.properties.iter().zip(&lits) {
        by_prop.get_mut(&inst.prop).unwrap().push(l);
    }
    for (prop, ls) in by_prop {
        let negs: Vec<Term> = ls.iter().map(|&l| sys.store.not(l)).collect();
        let status = match solve(sys, &defs, &negs, opts)? {
            SolveResult::Unsat => Verdict::Successful,
            SolveResult::Unknown(r) => {
                out.reason.get_or_insert(r);
                Verdict::Unknown
            }
            SolveResult::Sat(m) => {
                if ls.iter().all(|&l| m.eval(&sys.store, l).as_bool()) {
                    return Err(VerifyError::Reconstruct);
                }
                out.failures.push(counterexample(sys, &m, prop));
                Verdict::Failed
            }
        };
        out.statuses.insert(prop, status);
    }
    out.verdict = if !out.failures.is_empty() {
        Verdict::Failed
    } else if out.statuses.values().any(|v| *v == Verdict::Unknown) {
        Verdict::Unknown
    } else {
        Verdict::Successful
    };
    Ok(out)
}

fn format_value(v: &Value, sort: Sort) -> String {
    match (v, sort) {
        (Value::Bool(b), _) => b.to_string(),
        (_, Sort::Ptr) => {
            let p = v.as_u64();
            if p == 0 {
                "NULL".into()
            } else {
                let obj = p >> OBJ_SHIFT;
                let off = cxxbmc_solver::term::to_signed(OBJ_SHIFT, p & ((1 << OBJ_SHIFT) - 1));
                format!("&object{obj}+{off}")
            }
        }
        _ => v.as_i64().to_string(),
    }
}

fn counterexample(sys: &SsaSystem, m: &Model, prop: usize) -> Counterexample {
    let st = &sys.store;
    let mut steps = Vec::new();
    let mut cache: HashMap<Term, bool> = HashMap::new();
    let mut holds = |t: Term| *cache.entry(t).or_insert_with(|| m.eval(st, t).as_bool());
    for e in &sys.equations {
        if e.kind == EqKind::Phi || !holds(e.guard) {
            continue;
        }
        let v = match e.lhs {
            Some(l) => m.eval(st, l),
            None => m.eval(st, e.rhs),
        };
        steps.push(TraceStep {
            loc: e.loc.clone(),
            function: e.function.clone(),
            lhs: e.var.clone(),
            value: format_value(&v, e.sort),
        });
    }
    let inputs = sys
        .nondets
        .iter()
        .filter(|n| holds(n.guard))
        .map(|n| m.eval(st, n.symbol).as_i64())
        .collect();
    Counterexample { prop, steps, inputs }
}

fn property_block(prog: &GotoProgram, prop: usize) -> String {
    let p = &prog.properties[prop];
    format!(
        "Violated property:\n  file {} line {} column {} function {}\n  {}\n  {}\n",
        p.loc.file, p.loc.line, p.loc.column, p.function, p.description, p.claim
    )
}

/// The counterexample trace followed by the violated property.
pub fn counterexample_text(prog: &GotoProgram, cx: &Counterexample) -> String {
    let mut out = String::from("Counterexample:\n");
    for (i, s) in cx.steps.iter().enumerate() {
        write!(
            out,
            "\nState {} file {} line {} function {}\n----------------------------------------------------\n  {}={}\n",
            i + 1,
            s.loc.file,
            s.loc.line,
            s.function,
            s.lhs,
            s.value
        )
        .unwrap();
    }
    out.push('\n');
    out.push_str(&property_block(prog, cx.prop));
    out
}

pub fn report_text(prog: &GotoProgram, o: &Outcome) -> String {
    let mut out = String::new();
    if !o.statuses.is_empty() {
        out.push_str("** Results:\n");
        for (p, v) in &o.statuses {
            let prop = &prog.properties[*p];
            let s = match v {
                Verdict::Successful => "SUCCESS",
                Verdict::Failed => "FAILURE",
                Verdict::Unknown => "UNKNOWN",
            };
            writeln!(
                out,
                "[{}.{}] line {} {}: {s}",
                prop.function,
                prop.kind.name(),
                prop.loc.line,
                prop.description
            )
            .unwrap();
        }
        out.push('\n');
    }
    for cx in &o.failures {
        out.push_str(&counterexample_text(prog, cx));
        out.push('\n');
    }
    match o.verdict {
        Verdict::Successful => out.push_str("VERIFICATION SUCCESSFUL\n"),
        Verdict::Failed => out.push_str("VERIFICATION FAILED\n"),
        Verdict::Unknown => {
            let r = o.reason.as_deref().unwrap_or("unknown");
            writeln!(out, "VERIFICATION INCONCLUSIVE ({r})").unwrap();
        }
    }
    out
}
