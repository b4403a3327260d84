//! Bit-vector and array decision procedures.
//!
//! Formulas are built in a [`TermStore`] and decided either by the built-in
//! bit-blasting solver or by an external SMT-LIB solver process. Every
//! satisfying model is checked against the term evaluator before it is
//! returned.

pub mod aig;
pub mod bitblast;
pub mod eval;
pub mod external;
pub mod sat;
pub mod smtlib;
pub mod term;

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

pub use eval::Value;
pub use term::{Node, Sort, Term, TermStore};

use aig::AigLit;
use bitblast::BitBlaster;
use sat::SatResult;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("unsupported formula: {0}")]
    Unsupported(String),
    #[error("malformed SMT-LIB: {0}")]
    Parse(String),
    #[error("cannot run solver `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver failed: {0}")]
    Failed(String),
    #[error("model does not satisfy the formula")]
    BadModel,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Values of all non-array symbols, plus array symbols defined by the
/// formula.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub values: HashMap<String, Value>,
}

impl Model {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn eval(&self, store: &TermStore, t: Term) -> Value {
        eval::eval_with(store, &self.values, t)
    }
}

#[derive(Debug)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Builtin,
    External { program: PathBuf, args: Vec<String> },
}

impl Backend {
    pub fn name(&self) -> String {
        match self {
            Backend::Builtin => "builtin".into(),
            Backend::External { program, .. } => program
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| program.display().to_string()),
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Stats {
    pub aig_nodes: usize,
    pub sat_vars: usize,
    pub conflicts: u64,
}

/// Decides the conjunction of `assertions`.
pub fn check(
    store: &TermStore,
    assertions: &[Term],
    backend: &Backend,
    deadline: Option<Instant>,
) -> Result<SolveResult, SolverError> {
    check_with_stats(store, assertions, backend, deadline).map(|(r, _)| r)
}

pub fn check_with_stats(
    store: &TermStore,
    assertions: &[Term],
    backend: &Backend,
    deadline: Option<Instant>,
) -> Result<(SolveResult, Stats), SolverError> {
    let (result, stats) = match backend {
        Backend::Builtin => check_builtin(store, assertions, deadline)?,
        Backend::External { program, args } => (
            check_external(store, assertions, program, args, deadline)?,
            Stats::default(),
        ),
    };
    if let SolveResult::Sat(model) = &result {
        let mut ev = eval::Evaluator::new(store, |n, _| model.values.get(n).cloned());
        if !assertions.iter().all(|&a| ev.eval(a).as_bool()) {
            return Err(SolverError::BadModel);
        }
    }
    Ok((result, stats))
}

/// Extends a model with the values of array symbols defined by top-level
/// equations.
fn complete_model(store: &TermStore, macros: &HashMap<Term, Term>, model: &mut Model) {
    let mut done: Vec<Term> = Vec::new();
    let mut pending: Vec<Term> = macros.keys().copied().collect();
    pending.sort();
    // Definitions may refer to each other; resolve in dependency order.
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&sym| {
            let def = macros[&sym];
            let deps_ready = store
                .free_symbols(&[def])
                .iter()
                .all(|d| !macros.contains_key(d) || done.contains(d));
            if deps_ready {
                let v = eval::eval_with(store, &model.values, def);
                model
                    .values
                    .insert(store.symbol_name(sym).unwrap().to_string(), v);
                done.push(sym);
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            break;
        }
    }
}

fn bits_value(cnf: &aig::Cnf, model: &[bool], bits: &[AigLit]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (cnf.model_value(model, b) as u64) << i)
}

fn check_builtin(
    store: &TermStore,
    assertions: &[Term],
    deadline: Option<Instant>,
) -> Result<(SolveResult, Stats), SolverError> {
    let mut bb = BitBlaster::new(store);
    let rest = bb.collect_macros(assertions);
    let mut roots = Vec::new();
    for &a in &rest {
        roots.push(bb.boolean(a)?);
    }
    roots.extend(bb.side.iter().copied());
    let mut cnf = aig::Cnf::new();
    for &r in &roots {
        let l = cnf.lit(&bb.aig, r);
        cnf.solver.add_clause(&[l]);
    }
    // Symbols only occurring in macro definitions still need encodings.
    for (_, bits) in bb.symbols.clone() {
        for b in bits {
            cnf.lit(&bb.aig, b);
        }
    }
    let result = cnf.solver.solve(deadline);
    let stats = Stats {
        aig_nodes: bb.aig.len(),
        sat_vars: cnf.solver.num_vars(),
        conflicts: cnf.solver.conflicts,
    };
    let out = match result {
        SatResult::Unsat => SolveResult::Unsat,
        SatResult::Unknown => SolveResult::Unknown("timeout".into()),
        SatResult::Sat(m) => {
            let mut model = Model::default();
            for (t, bits) in &bb.symbols {
                let v = bits_value(&cnf, &m, bits);
                let value = match store.sort(*t) {
                    Sort::Bool => Value::Bool(v == 1),
                    Sort::BitVec(width) => Value::Bv { width, value: v },
                    Sort::Array(..) => unreachable!(),
                };
                model
                    .values
                    .insert(store.symbol_name(*t).unwrap().to_string(), value);
            }
            for (arr, reads) in bb.free_array_reads() {
                let mut entries = std::collections::BTreeMap::new();
                for (i, v) in reads {
                    entries.insert(bits_value(&cnf, &m, i), bits_value(&cnf, &m, v));
                }
                model.values.insert(
                    store.symbol_name(arr).unwrap().to_string(),
                    Value::Array {
                        default: 0,
                        entries,
                    },
                );
            }
            complete_model(store, bb.macros(), &mut model);
            SolveResult::Sat(model)
        }
    };
    Ok((out, stats))
}

fn check_external(
    store: &TermStore,
    assertions: &[Term],
    program: &PathBuf,
    args: &[String],
    deadline: Option<Instant>,
) -> Result<SolveResult, SolverError> {
    let named: Vec<(Term, Option<String>)> = assertions.iter().map(|&a| (a, None)).collect();
    let script = smtlib::print_script(store, &named, true);
    let mut file = tempfile::Builder::new().suffix(".smt2").tempfile()?;
    std::io::Write::write_all(&mut file, script.text.as_bytes())?;
    let out = external::run_solver(program, args, file.path(), deadline)?;
    if out.timed_out {
        return Ok(SolveResult::Unknown("timeout".into()));
    }
    let exprs = smtlib::parse_sexprs(&out.stdout)?;
    let verdict = exprs.first().and_then(|e| match e {
        smtlib::SExpr::Atom(a) => Some(a.as_str()),
        _ => None,
    });
    match verdict {
        Some("unsat") => Ok(SolveResult::Unsat),
        Some("unknown") => Ok(SolveResult::Unknown("solver returned unknown".into())),
        Some("sat") => {
            let mut model = Model::default();
            if !script.value_symbols.is_empty() {
                let Some(resp) = exprs.last().filter(|_| exprs.len() > 1) else {
                    return Err(SolverError::Failed("missing get-value response".into()));
                };
                model.values = smtlib::parse_get_value(resp)?;
            }
            // Widths in hex literals can be coarser than the declared sort.
            for name in &script.value_symbols {
                let t = store.lookup_symbol(name).unwrap();
                if let (Sort::BitVec(width), Some(Value::Bv { value, .. })) =
                    (store.sort(t), model.values.get(name).cloned())
                {
                    model.values.insert(name.clone(), Value::Bv { width, value });
                }
            }
            let mut macros = HashMap::new();
            let mut bb = BitBlaster::new(store);
            bb.collect_macros(assertions);
            macros.extend(bb.macros().iter().map(|(k, v)| (*k, *v)));
            complete_model(store, &macros, &mut model);
            Ok(SolveResult::Sat(model))
        }
        _ => Err(SolverError::Failed(format!(
            "unexpected solver output: {}{}",
            out.stdout.trim(),
            out.stderr.trim()
        ))),
    }
}
