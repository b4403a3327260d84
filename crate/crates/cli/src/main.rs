use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use clap::Parser;
use cxxbmc_core::goto::{dump, CheckOptions};
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::{symex, SymexConfig};
use cxxbmc_core::verify::{report_text, smt_script, verify, Verdict, VerifyOptions};
use cxxbmc_solver::Backend;
use serde::Serialize;

/// Bounded model checker for a subset of C++.
#[derive(Parser, Debug, Clone)]
#[command(name = "cxxbmc", version)]
struct Args {
    /// Source file to verify.
    file: PathBuf,
    /// Loop and recursion bound.
    #[arg(long, default_value_t = 10)]
    unwind: u32,
    /// Check that the bound is large enough.
    #[arg(long)]
    unwinding_assertions: bool,
    /// Check signed overflow and division by zero.
    #[arg(long)]
    overflow_check: bool,
    /// Check array and heap object bounds.
    #[arg(long)]
    bounds_check: bool,
    /// Check pointer dereferences and deallocation.
    #[arg(long)]
    memory_check: bool,
    /// `builtin`, or the name or path of an SMT-LIB2 solver.
    #[arg(long, default_value = "builtin")]
    solver: String,
    /// Write the SMT-LIB2 formula to this file.
    #[arg(long, value_name = "PATH")]
    smt_lib_out: Option<PathBuf>,
    #[arg(long)]
    show_goto_functions: bool,
    #[arg(long)]
    show_layouts: bool,
    /// Wall-clock limit in seconds for the whole run.
    #[arg(long, default_value_t = 900, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    /// Write a machine-readable result to this file.
    #[arg(long, value_name = "PATH")]
    result_json: Option<PathBuf>,
    /// Decide each property with its own query.
    #[arg(long)]
    per_property: bool,
    #[arg(long, default_value_t = 0)]
    verbosity: u8,
}

#[derive(Serialize, Debug, Clone)]
struct ViolatedProperty {
    file: String,
    line: u32,
    column: u32,
    function: String,
    description: String,
}

#[derive(Serialize, Debug)]
struct ResultJson {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    violated_property: Option<ViolatedProperty>,
    wall_time_s: f64,
    solver: String,
    unwind_k: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_rss: Option<u64>,
}

enum Done {
    Verdict {
        verdict: Verdict,
        violated: Option<ViolatedProperty>,
        reason: Option<String>,
    },
    /// Frontend or usage error.
    Error(String),
}

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

/// Peak resident set size of this process in bytes.
fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn find_in_path(name: &str) -> Option<PathBuf> {
    if name.contains('/') {
        let p = PathBuf::from(name);
        return p.is_file().then_some(p);
    }
    std::env::split_paths(&std::env::var_os("PATH")?)
        .map(|d| d.join(name))
        .find(|p| p.is_file())
}

fn backend(name: &str) -> Result<Backend, String> {
    if name == "builtin" {
        return Ok(Backend::Builtin);
    }
    let program = find_in_path(name).ok_or_else(|| format!("solver `{name}` not found"))?;
    let stem = program.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let args: Vec<String> = match stem.as_str() {
        "z3" => vec!["-smt2".into()],
        "cvc4" | "cvc5" => vec!["--lang=smt2".into()],
        _ => vec![],
    };
    Ok(Backend::External { program, args })
}

fn inconclusive(reason: String) -> Done {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "VERIFICATION INCONCLUSIVE ({reason})");
    let _ = out.flush();
    Done::Verdict {
        verdict: Verdict::Unknown,
        violated: None,
        reason: Some(reason),
    }
}

fn run(args: Args, src: String, backend: Backend, deadline: Instant) -> Done {
    let file = args.file.display().to_string();
    let check = CheckOptions {
        overflow: args.overflow_check,
        bounds: args.bounds_check,
        memory: args.memory_check,
    };
    let c = match compile(&file, &src, check) {
        Ok(c) => c,
        Err(d) => return Done::Error(d.to_string()),
    };
    let mut out = std::io::stdout().lock();
    if args.show_layouts {
        let _ = write!(out, "{}", c.model.render(&c.program.symbols));
        let _ = writeln!(out);
    }
    if args.show_goto_functions {
        let _ = write!(out, "{}", dump::program_text(&c.goto));
    }
    let _ = out.flush();
    drop(out);
    let cfg = SymexConfig {
        unwind: args.unwind,
        unwinding_assertions: args.unwinding_assertions,
        ..SymexConfig::default()
    };
    let started = Instant::now();
    let mut sys = match symex(&c.goto, cfg) {
        Ok(s) => s,
        Err(e) => return inconclusive(e.to_string()),
    };
    if args.verbosity >= 1 {
        eprintln!(
            "symex: {} equations, {} property instances, {:.3}s",
            sys.equations.len(),
            sys.properties.len(),
            started.elapsed().as_secs_f64()
        );
    }
    if let Some(path) = &args.smt_lib_out {
        if let Err(e) = std::fs::write(path, smt_script(&mut sys)) {
            return Done::Error(format!("cannot write {}: {e}", path.display()));
        }
    }
    let opts = VerifyOptions {
        backend,
        per_property: args.per_property,
        deadline: Some(deadline),
    };
    let started = Instant::now();
    let o = match verify(&c.goto, &mut sys, &opts) {
        Ok(o) => o,
        Err(e) => return inconclusive(e.to_string()),
    };
    if args.verbosity >= 1 {
        eprintln!("solver: {:.3}s", started.elapsed().as_secs_f64());
    }
    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", report_text(&c.goto, &o));
    let _ = out.flush();
    let violated = o.failures.first().map(|cx| {
        let p = &c.goto.properties[cx.prop];
        ViolatedProperty {
            file: p.loc.file.to_string(),
            line: p.loc.line,
            column: p.loc.column,
            function: p.function.clone(),
            description: p.description.clone(),
        }
    });
    Done::Verdict {
        verdict: o.verdict,
        violated,
        reason: o.reason,
    }
}

fn write_json(path: &Path, r: &ResultJson) {
    let text = serde_json::to_string_pretty(r).expect("serializable result");
    if let Err(e) = std::fs::write(path, text + "\n") {
        eprintln!("error: cannot write {}: {e}", path.display());
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let args = Args::parse();
    let deadline = start + Duration::from_secs(args.timeout);
    let finish = |verdict: &'static str, violated: Option<ViolatedProperty>, reason: Option<String>| {
        if let Some(path) = &args.result_json {
            let r = ResultJson {
                verdict,
                violated_property: violated,
                wall_time_s: start.elapsed().as_secs_f64(),
                solver: args.solver.clone(),
                unwind_k: args.unwind,
                reason,
                peak_rss: peak_rss(),
            };
            write_json(path, &r);
        }
    };
    let fail = |msg: String| {
        eprintln!("{msg}");
        finish("ERROR", None, Some(msg));
        ExitCode::from(EXIT_ERROR)
    };
    let src = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => return fail(format!("error: cannot read {}: {e}", args.file.display())),
    };
    let backend = match backend(&args.solver) {
        Ok(b) => b,
        Err(e) => return fail(format!("error: {e}")),
    };
    let (tx, rx) = mpsc::channel();
    let worker_args = args.clone();
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || {
            let _ = tx.send(run(worker_args, src, backend, deadline));
        })
        .expect("spawn worker thread");
    let done = match rx.recv_timeout(deadline.saturating_duration_since(Instant::now())) {
        Ok(d) => d,
        Err(mpsc::RecvTimeoutError::Timeout) => inconclusive("timeout".into()),
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            return fail("error: internal failure during verification".into());
        }
    };
    match done {
        Done::Error(msg) => fail(msg),
        Done::Verdict {
            verdict,
            violated,
            reason,
        } => {
            let code = match verdict {
                Verdict::Successful => EXIT_OK,
                Verdict::Failed => EXIT_FAILED,
                Verdict::Unknown => EXIT_UNKNOWN,
            };
            finish(verdict.as_str(), violated, reason);
            ExitCode::from(code)
        }
    }
}
