//! Cross-checks between symbolic and concrete execution.

use std::collections::BTreeSet;

use cxxbmc_core::goto::{CheckOptions, GotoProgram};
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::{interp, symex, SymexConfig};
use cxxbmc_core::verify::{verify, Outcome, Verdict, VerifyOptions};

pub const ALL_CHECKS: CheckOptions = CheckOptions {
    overflow: true,
    bounds: true,
    memory: true,
};

/// Decides every property separately.
pub fn per_property(g: &GotoProgram, cfg: SymexConfig) -> Result<Outcome, String> {
    let mut sys = symex(g, cfg).map_err(|e| e.to_string())?;
    sys.check_single_assignment()?;
    let opts = VerifyOptions {
        per_property: true,
        ..VerifyOptions::default()
    };
    verify(g, &mut sys, &opts).map_err(|e| e.to_string())
}

/// Compares symbolic and concrete verdicts of a deterministic program,
/// property by property. Returns the number of violated properties.
pub fn equivalence(src: &str, cfg: SymexConfig) -> Result<usize, String> {
    let c = compile("gen.cpp", src, ALL_CHECKS).map_err(|d| d.to_string())?;
    let run = interp::run(&c.goto, cfg, &[]).map_err(|e| e.to_string())?;
    let concrete: BTreeSet<usize> = run.violations.iter().copied().collect();
    let o = per_property(&c.goto, cfg)?;
    for (p, v) in &o.statuses {
        let violated = concrete.contains(p);
        let agree = match v {
            Verdict::Failed => violated,
            Verdict::Successful => !violated,
            Verdict::Unknown => false,
        };
        if !agree {
            let prop = &c.goto.properties[*p];
            return Err(format!(
                "property {p} ({} line {}): symbolic {:?}, concrete violated = {violated}",
                prop.description, prop.loc.line, v
            ));
        }
    }
    Ok(concrete.len())
}

/// Replays the nondet inputs of every counterexample concretely.
pub fn replay(g: &GotoProgram, cfg: SymexConfig, o: &Outcome) -> Result<(), String> {
    for cx in &o.failures {
        let run = interp::run(g, cfg, &cx.inputs).map_err(|e| e.to_string())?;
        if !run.violations.contains(&cx.prop) {
            return Err(format!(
                "replaying {:?} does not violate `{}`",
                cx.inputs, g.properties[cx.prop].description
            ));
        }
    }
    Ok(())
}
