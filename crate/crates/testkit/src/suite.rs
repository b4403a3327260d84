//! Checks run over every corpus case.

use cxxbmc_core::frontend::{parse_source, pretty_print};
use cxxbmc_core::pipeline::{compile, Compiled};
use cxxbmc_core::symex::{interp, symex, SymexConfig};
use cxxbmc_core::verify::{verify, Outcome, Verdict, VerifyOptions};
use cxxbmc_solver::Backend;

use crate::corpus::{self, Case};
use crate::{dispatch, oracle};

pub fn cases() -> Vec<Case> {
    corpus::load(&corpus::root()).expect("corpus loads")
}

fn build(case: &Case) -> Result<(Compiled, SymexConfig), String> {
    let s = case.settings()?;
    let c = compile(&case.path.display().to_string(), &case.source(), s.check).map_err(|d| d.to_string())?;
    Ok((c, s.cfg))
}

fn decide(c: &Compiled, cfg: SymexConfig, opts: &VerifyOptions) -> Result<Outcome, String> {
    let mut sys = symex(&c.goto, cfg).map_err(|e| e.to_string())?;
    verify(&c.goto, &mut sys, opts).map_err(|e| e.to_string())
}

/// Programs without nondet inputs, which the interpreter can run alone.
pub fn deterministic(case: &Case) -> bool {
    !case.source().contains("nondet")
}

/// Verdict against the expect file, counterexample replay, and for
/// deterministic programs the interpreter's verdict.
pub fn verdict(case: &Case) -> Result<Outcome, String> {
    let (c, cfg) = build(case)?;
    let o = decide(&c, cfg, &VerifyOptions::default())?;
    if o.verdict != case.expected {
        return Err(format!("expected {:?}, got {:?}", case.expected, o.verdict));
    }
    oracle::replay(&c.goto, cfg, &o)?;
    if deterministic(case) {
        let run = interp::run(&c.goto, cfg, &[]).map_err(|e| e.to_string())?;
        if run.violations.is_empty() != (case.expected == Verdict::Successful) {
            return Err(format!("interpreter disagrees: violations {:?}", run.violations));
        }
    }
    Ok(o)
}

/// Failed counterexamples replay concretely; `Ok(false)` for passing cases.
pub fn replay(case: &Case) -> Result<bool, String> {
    let (c, cfg) = build(case)?;
    let o = decide(&c, cfg, &VerifyOptions::default())?;
    if o.failures.is_empty() {
        return Ok(false);
    }
    oracle::replay(&c.goto, cfg, &o)?;
    Ok(true)
}

/// A property violated at bound `k` stays violated at `k + 1`, with
/// unwinding assertions off.
pub fn monotone(case: &Case, k: u32) -> Result<(), String> {
    let (c, cfg) = build(case)?;
    let at = |k: u32| {
        let cfg = SymexConfig {
            unwind: k,
            unwinding_assertions: false,
            ..cfg
        };
        oracle::per_property(&c.goto, cfg)
    };
    let (lo, hi) = (at(k)?, at(k + 1)?);
    for (p, v) in &lo.statuses {
        if *v == Verdict::Failed && hi.statuses[p] != Verdict::Failed {
            let d = &c.goto.properties[*p].description;
            return Err(format!("`{d}` violated at k={k} but not at k={}", k + 1));
        }
    }
    Ok(())
}

/// Printing and reparsing gives the same tree.
pub fn round_trip(case: &Case) -> Result<(), String> {
    let file = case.path.display().to_string();
    let a = parse_source(&file, &case.source()).map_err(|d| d.to_string())?;
    let text = pretty_print(&a);
    let b = parse_source(&file, &text).map_err(|d| format!("reparse: {d}\n{text}"))?;
    if a != b {
        return Err(format!("printed form parses differently:\n{text}"));
    }
    if pretty_print(&b) != text {
        return Err("printing is not idempotent".into());
    }
    Ok(())
}

/// Vtable entries checked against the brute-force overrider.
pub fn dispatch(case: &Case) -> Result<usize, String> {
    let (c, _) = build(case)?;
    dispatch::check_tables_present(&c.program.symbols, &c.model)?;
    dispatch::check(&c.program.symbols, &c.model)
}

pub fn z3() -> Option<Backend> {
    let path = std::env::var_os("PATH")?;
    let program = std::env::split_paths(&path).map(|d| d.join("z3")).find(|p| p.is_file())?;
    Some(Backend::External {
        program,
        args: vec!["-smt2".into()],
    })
}

/// Builtin and `other` agree on the joint query and on every property.
pub fn solvers_agree(case: &Case, other: &Backend) -> Result<usize, String> {
    let (c, cfg) = build(case)?;
    let mut n = 0;
    for per_property in [false, true] {
        let run = |backend: Backend| {
            decide(
                &c,
                cfg,
                &VerifyOptions {
                    backend,
                    per_property,
                    deadline: None,
                },
            )
        };
        let a = run(Backend::Builtin)?;
        let b = run(other.clone())?;
        if a.verdict != b.verdict || a.statuses != b.statuses {
            return Err(format!(
                "builtin {:?} {:?}, {} {:?} {:?}",
                a.verdict,
                a.statuses,
                other.name(),
                b.verdict,
                b.statuses
            ));
        }
        n += 1 + a.statuses.len();
    }
    Ok(n)
}
