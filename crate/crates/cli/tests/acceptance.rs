//! One line per acceptance criterion. Run with `--nocapture` to see them.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cxxbmc_core::object_model::SlotKind;
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::SymexConfig;
use cxxbmc_core::verify::Verdict;
use cxxbmc_testkit::hierarchy::{ClassSpec, Hierarchy};
use cxxbmc_testkit::{corpus, exhaustive, gen, oracle, suite};
use tempfile::TempDir;

const PENGUIN_TIME: Duration = Duration::from_secs(1);
const CORPUS_TIME: Duration = Duration::from_secs(120);
const MIN_CASES: usize = 60;
const CATEGORIES: usize = 6;
const GENERATED: u64 = 200;

const PENGUIN: &str = "class Bird {
  public:
  virtual int doit(void) { return 21; }
};

class Penguin: public Bird {
  public:
  int doit(void) override { return 42; }
};
int main(){
  Bird *p = new Penguin();
  assert(p->doit() == 42);
  delete p;
  return 0;
}
";

const FRIEND18: &str = "#include <cassert>
template <int N> struct X
{
  template <int M>
  friend int foo(X const &)
  {
    return N * 10000 + M;
  }
};
X<1234> bring;

int main() {
  assert(
   foo<5678> (bring)
    !=12345678);
}
";

type Check = Result<String, String>;
/// Direct bases with virtual flags, then declared method ids.
type Shape = (Vec<(usize, bool)>, Vec<usize>);

struct Run {
    code: Option<i32>,
    stdout: String,
    elapsed: Duration,
}

fn cxxbmc(args: &[String], file: &Path) -> Run {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_cxxbmc"))
        .args(args)
        .arg(file)
        .output()
        .expect("run cxxbmc");
    Run {
        code: o.status.code(),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        elapsed: start.elapsed(),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bird_penguin(dir: &TempDir) -> Check {
    let f = dir.path().join("penguin.cpp");
    std::fs::write(&f, PENGUIN).unwrap();
    let r = cxxbmc(&[], &f);
    ensure(r.code == Some(0), || format!("exit {:?}", r.code))?;
    ensure(r.stdout.ends_with("VERIFICATION SUCCESSFUL\n"), || r.stdout.clone())?;
    ensure(r.elapsed < PENGUIN_TIME, || format!("{:.3}s", r.elapsed.as_secs_f64()))?;
    let d = cxxbmc(&["--show-goto-functions".into()], &f);
    ensure(d.stdout.contains("thunk::Penguin::doit(Bird*):"), || "no thunk in dump".into())?;
    let dispatch = d
        .stdout
        .lines()
        .find(|l| l.contains("->doit(p)") && l.contains("Bird@vptr"))
        .ok_or("no virtual call in main")?;
    ensure(dispatch.contains("Bird@Penguin"), || dispatch.to_string())?;
    Ok(format!("exit 0 in {:.3}s; dump has thunk and `{}`", r.elapsed.as_secs_f64(), dispatch.trim()))
}

fn friend_template(dir: &TempDir) -> Check {
    let f = dir.path().join("tmp2.cpp");
    std::fs::write(&f, FRIEND18).unwrap();
    let r = cxxbmc(&[], &f);
    ensure(r.code == Some(1), || format!("exit {:?}", r.code))?;
    let block = format!(
        "Violated property:\n  file {} line 13 column 3 function main\n  assertion foo<5678>(bring)!=12345678\n",
        f.display()
    );
    ensure(r.stdout.contains(&block), || r.stdout.clone())?;
    ensure(r.stdout.ends_with("VERIFICATION FAILED\n"), || r.stdout.clone())?;
    ensure(r.stdout.contains("  return_value=12345678\n"), || r.stdout.clone())?;
    Ok("line 13 column 3 main, return_value=12345678, exit 1".into())
}

fn corpus_rate() -> Check {
    let cases = suite::cases();
    let mut cats: Vec<&str> = cases.iter().map(|c| c.category.as_str()).collect();
    cats.dedup();
    ensure(cases.len() >= MIN_CASES, || format!("{} cases", cases.len()))?;
    ensure(cats.len() == CATEGORIES, || format!("{cats:?}"))?;
    let mut total = Duration::ZERO;
    let mut bad = Vec::new();
    for c in &cases {
        let r = cxxbmc(&c.flags, &c.path);
        total += r.elapsed;
        let want = match c.expected {
            Verdict::Successful => Some(0),
            _ => Some(1),
        };
        if r.code != want {
            bad.push(format!("{}/{} exit {:?}", c.category, c.name, r.code));
        }
    }
    ensure(bad.is_empty(), || bad.join(", "))?;
    ensure(total < CORPUS_TIME, || format!("{:.1}s", total.as_secs_f64()))?;
    Ok(format!(
        "{}/{} cases in {} categories, {:.2}s total",
        cases.len(),
        cases.len(),
        cats.len(),
        total.as_secs_f64()
    ))
}

fn equivalence() -> Check {
    let mut violated = 0;
    for seed in 0..GENERATED {
        violated += oracle::equivalence(&gen::program(seed), SymexConfig::default()).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("{GENERATED} programs agree per property ({violated} violated properties)"))
}

fn replay() -> Check {
    let mut n = 0;
    for c in suite::cases().iter().filter(|c| c.expected == Verdict::Failed) {
        ensure(suite::replay(c).map_err(|e| format!("{}: {e}", c.name))?, || format!("{} did not fail", c.name))?;
        n += 1;
    }
    Ok(format!("{n} FAILED cases replay"))
}

fn encoder() -> Check {
    let n = exhaustive::grid()?;
    Ok(format!("{n} programs at {} bits match enumeration", exhaustive::W))
}

fn solvers() -> Check {
    let Some(z3) = suite::z3() else {
        return Ok("skipped: no external solver on PATH".into());
    };
    let cases = suite::cases();
    let mut queries = 0;
    for c in &cases {
        queries += suite::solvers_agree(c, &z3).map_err(|e| format!("{}: {e}", c.name))?;
    }
    Ok(format!("builtin and z3 agree on {queries} queries over {} cases", cases.len()))
}

fn spec(classes: Vec<Shape>) -> Hierarchy {
    Hierarchy {
        classes: classes
            .into_iter()
            .map(|(bases, methods)| ClassSpec { bases, methods })
            .collect(),
    }
}

fn vptrs(h: &Hierarchy, class: usize) -> Result<Vec<String>, String> {
    let c = compile("h.cpp", &h.source(), Default::default()).map_err(|d| d.to_string())?;
    Ok(c.model
        .layouts
        .class(&format!("K{class}"))
        .slots
        .iter()
        .filter_map(|s| match &s.kind {
            SlotKind::Vptr(r) => Some(r.clone()),
            _ => None,
        })
        .collect())
}

fn object_model() -> Check {
    let single = spec(vec![(vec![], vec![0]), (vec![(0, false)], vec![0])]);
    let v = vptrs(&single, 1)?;
    ensure(v.len() == 1, || format!("single inheritance: {v:?}"))?;
    for n in 2..=4 {
        let mut cs: Vec<Shape> = (0..n).map(|_| (vec![], vec![0])).collect();
        cs.push(((0..n).map(|i| (i, false)).collect(), vec![]));
        let v = vptrs(&spec(cs), n)?;
        ensure(v.len() == n, || format!("{n} dynamic bases: {v:?}"))?;
    }
    let diamond = spec(vec![
        (vec![], vec![0]),
        (vec![(0, true)], vec![]),
        (vec![(0, true)], vec![]),
        (vec![(1, false), (2, false)], vec![]),
    ]);
    let v = vptrs(&diamond, 3)?;
    let shared = v.iter().filter(|r| *r == "K0").count();
    ensure(shared == 1, || format!("diamond: {v:?}"))?;
    let mut entries = 0;
    let cases = suite::cases();
    for c in &cases {
        entries += suite::dispatch(c).map_err(|e| format!("{}: {e}", c.name))?;
    }
    Ok(format!(
        "vptrs 1 / n=2..4 / diamond shares 1; {entries} vtable entries over {} corpus programs match brute force",
        cases.len()
    ))
}

#[test]
fn acceptance() {
    assert!(corpus::root().is_dir());
    let dir = TempDir::new().unwrap();
    let criteria: [(&str, &dyn Fn() -> Check); 8] = [
        ("Bird/Penguin dispatch", &|| bird_penguin(&dir)),
        ("friend template counterexample", &|| friend_template(&dir)),
        ("corpus pass rate", &corpus_rate),
        ("oracle equivalence", &equivalence),
        ("counterexample replay", &replay),
        ("8-bit encoder enumeration", &encoder),
        ("solver agreement", &solvers),
        ("object-model invariants", &object_model),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} criteria failed");
}
