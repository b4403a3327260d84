use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

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

const SLOW: &str = "int main() {
  int n = nondet_int();
  int s = nondet_int();
  for (int i = 0; i < n; i++) {
    s = s * s + nondet_int();
  }
  assert(s != 12345);
  return 0;
}
";

fn write(dir: &TempDir, name: &str, src: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p
}

fn cxxbmc(args: &[&str], file: &Path, json: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cxxbmc"));
    c.args(args);
    if let Some(j) = json {
        c.arg("--result-json").arg(j);
    }
    c.arg(file).output().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn assert_schema(j: &Value) {
    let obj = j.as_object().unwrap();
    for k in obj.keys() {
        assert!(
            ["verdict", "violated_property", "wall_time_s", "solver", "unwind_k", "reason", "peak_rss"].contains(&k.as_str()),
            "unexpected key {k}"
        );
    }
    assert!(["SUCCESSFUL", "FAILED", "UNKNOWN", "ERROR"].contains(&j["verdict"].as_str().unwrap()));
    assert!(j["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(j["solver"].is_string());
    assert!(j["unwind_k"].is_u64());
    if let Some(v) = j.get("violated_property") {
        assert!(v["file"].is_string() && v["function"].is_string() && v["description"].is_string());
        assert!(v["line"].as_u64().unwrap() >= 1 && v["column"].as_u64().unwrap() >= 1);
    }
    if let Some(r) = j.get("peak_rss") {
        assert!(r.as_u64().unwrap() > 0);
    }
}

#[test]
fn successful_run() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "penguin.cpp", PENGUIN);
    let j = d.path().join("r.json");
    let o = cxxbmc(&["--unwind", "4"], &f, Some(&j));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("VERIFICATION SUCCESSFUL\n"));
    let j = read_json(&j);
    assert_schema(&j);
    assert_eq!(j["verdict"], "SUCCESSFUL");
    assert_eq!(j["unwind_k"], 4);
    assert_eq!(j["solver"], "builtin");
    assert!(j.get("violated_property").is_none());
}

#[test]
fn failed_run_reports_property() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "bad.cpp", &PENGUIN.replace("== 42", "== 21"));
    let j = d.path().join("r.json");
    let o = cxxbmc(&[], &f, Some(&j));
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("Counterexample:") && out.ends_with("VERIFICATION FAILED\n"), "{out}");
    let j = read_json(&j);
    assert_schema(&j);
    let v = &j["violated_property"];
    assert_eq!((v["line"].as_u64(), v["column"].as_u64()), (Some(12), Some(3)));
    assert_eq!(v["function"], "main");
    assert_eq!(v["description"], "assertion p->doit()==21");
}

#[test]
fn errors_exit_two() {
    let d = TempDir::new().unwrap();
    let j = d.path().join("r.json");
    let o = cxxbmc(&[], &d.path().join("missing.cpp"), Some(&j));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read_json(&j)["verdict"], "ERROR");

    let f = write(&d, "syntax.cpp", "int main() { int x = @; }\n");
    let o = cxxbmc(&[], &f, Some(&j));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:22:"));
    let j = read_json(&j);
    assert_schema(&j);
    assert_eq!(j["verdict"], "ERROR");

    let f = write(&d, "ok.cpp", PENGUIN);
    let o = cxxbmc(&["--solver", "no-such-solver-binary"], &f, None);
    assert_eq!(o.status.code(), Some(2));
    let o = cxxbmc(&["--timeout", "0"], &f, None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn timeout_gives_unknown() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "slow.cpp", SLOW);
    let j = d.path().join("r.json");
    let start = std::time::Instant::now();
    let o = cxxbmc(&["--unwind", "2000", "--timeout", "1"], &f, Some(&j));
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("VERIFICATION INCONCLUSIVE (timeout)"));
    let j = read_json(&j);
    assert_schema(&j);
    assert_eq!(j["verdict"], "UNKNOWN");
    assert_eq!(j["reason"], "timeout");
}

#[test]
fn dumps_and_formula() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "penguin.cpp", PENGUIN);
    let smt = d.path().join("f.smt2");
    let o = cxxbmc(
        &["--show-goto-functions", "--show-layouts", "--smt-lib-out", smt.to_str().unwrap()],
        &f,
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("thunk::Penguin::doit(Bird*):"));
    assert!(out.contains("Bird@Penguin[0] = thunk::Penguin::doit(Bird*)"), "{out}");
    let text = std::fs::read_to_string(&smt).unwrap();
    assert!(text.contains("(check-sat)") && text.contains("property-violation"));
}

#[test]
fn per_property_lists_results() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "two.cpp", "int main() {\n  int x = 3;\n  assert(x == 3);\n  assert(x == 4);\n  return 0;\n}\n");
    let o = cxxbmc(&["--per-property"], &f, None);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("[main.assertion] line 3 assertion x==3: SUCCESS"), "{out}");
    assert!(out.contains("[main.assertion] line 4 assertion x==4: FAILURE"), "{out}");
}

#[test]
fn verbosity_reports_statistics() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "penguin.cpp", PENGUIN);
    let o = cxxbmc(&["--verbosity", "1"], &f, None);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("equations") && err.contains("solver:"), "{err}");
}

#[test]
fn external_solver_when_present() {
    if cxxbmc_testkit::suite::z3().is_none() {
        eprintln!("z3 not found; skipped");
        return;
    }
    let d = TempDir::new().unwrap();
    let f = write(&d, "penguin.cpp", PENGUIN);
    let j = d.path().join("r.json");
    let o = cxxbmc(&["--solver", "z3"], &f, Some(&j));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&j)["solver"], "z3");
    let f = write(&d, "bad.cpp", &PENGUIN.replace("== 42", "== 21"));
    assert_eq!(cxxbmc(&["--solver", "z3"], &f, None).status.code(), Some(1));
}
