use std::collections::BTreeMap;

use cxxbmc_core::verify::Verdict;
use cxxbmc_testkit::corpus::{self, Case};
use cxxbmc_testkit::suite;

fn each(mut check: impl FnMut(&Case) -> Result<(), String>) {
    let bad: Vec<String> = suite::cases()
        .iter()
        .filter_map(|c| check(c).err().map(|e| format!("{}/{}: {e}", c.category, c.name)))
        .collect();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn corpus_shape() {
    let cases = suite::cases();
    let mut per: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &cases {
        *per.entry(c.category.as_str()).or_default() += 1;
    }
    assert!(cases.len() >= 60, "{} cases", cases.len());
    assert_eq!(per.len(), 6, "{per:?}");
    assert!(per.values().all(|&n| n >= 10), "{per:?}");
    let failed = cases.iter().filter(|c| c.expected == Verdict::Failed).count();
    assert!(failed >= 20 && cases.len() - failed >= 20);
}

#[test]
fn verdicts_match_expectations() {
    each(|c| suite::verdict(c).map(|_| ()));
}

#[test]
fn failures_replay() {
    let mut replayed = 0;
    each(|c| {
        replayed += usize::from(suite::replay(c)?);
        Ok(())
    });
    let failed = suite::cases().iter().filter(|c| c.expected == Verdict::Failed).count();
    assert_eq!(replayed, failed);
}

#[test]
fn violations_persist_with_larger_bound() {
    each(|c| {
        let k = c.settings()?.cfg.unwind;
        for k in [1, 2, k] {
            suite::monotone(c, k)?;
        }
        Ok(())
    });
}

#[test]
fn pretty_printing_round_trips() {
    each(suite::round_trip);
}

#[test]
fn dispatch_matches_brute_force() {
    let mut entries = 0;
    for c in suite::cases() {
        entries += suite::dispatch(&c).unwrap_or_else(|e| panic!("{}: {e}", c.name));
    }
    assert!(entries >= 30, "{entries} vtable entries");
}

#[test]
fn solvers_agree_when_z3_present() {
    let Some(z3) = suite::z3() else {
        eprintln!("z3 not found; skipped");
        return;
    };
    each(|c| suite::solvers_agree(c, &z3).map(|_| ()));
}

#[test]
fn expect_files_parse() {
    let (v, f) = corpus::parse_expect("FAILED\n--unwind 3 --bounds-check\n").unwrap();
    assert_eq!(v, Verdict::Failed);
    let s = corpus::parse_flags(&f).unwrap();
    assert_eq!(s.cfg.unwind, 3);
    assert!(s.check.bounds && !s.check.memory);
    assert_eq!(corpus::parse_expect("SUCCESSFUL").unwrap(), (Verdict::Successful, vec![]));
    assert!(corpus::parse_expect("PASSED\n").is_err());
    assert!(corpus::parse_flags(&["--frobnicate".into()]).is_err());
    assert!(corpus::parse_flags(&["--unwind".into()]).is_err());
}

#[test]
fn empty_category_has_no_cases() {
    let d = tempfile_dir();
    std::fs::create_dir_all(d.join("empty-sub")).unwrap();
    assert!(corpus::load(&d).unwrap().is_empty());
    std::fs::remove_dir_all(&d).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("cxxbmc-corpus-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}
