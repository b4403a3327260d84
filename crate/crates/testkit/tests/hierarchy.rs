use cxxbmc_core::goto::CheckOptions;
use cxxbmc_core::object_model::SlotKind;
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::{symex, SymexConfig};
use cxxbmc_core::verify::{verify, Verdict, VerifyOptions};
use cxxbmc_testkit::dispatch;
use cxxbmc_testkit::hierarchy::{strategy, Hierarchy};
use proptest::prelude::*;

fn run(h: &Hierarchy) -> Result<(), TestCaseError> {
    let src = h.source();
    let c = match compile("h.cpp", &src, CheckOptions::default()) {
        Ok(c) => c,
        Err(d) => {
            prop_assert!(!h.supported(), "rejected a supported hierarchy: {d}\n{src}");
            return Ok(());
        }
    };
    prop_assert!(h.supported(), "accepted an unsupported hierarchy\n{src}");
    for i in 0..h.classes.len() {
        let vptrs = c.model.layouts.class(&format!("K{i}")).slots.iter().filter(|s| matches!(s.kind, SlotKind::Vptr(_))).count();
        prop_assert_eq!(vptrs, h.vptr_count(i), "vptrs of K{}\n{}", i, src);
    }
    dispatch::check_tables_present(&c.program.symbols, &c.model).map_err(TestCaseError::fail)?;
    dispatch::check(&c.program.symbols, &c.model).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
    let mut sys = symex(&c.goto, SymexConfig::default()).unwrap();
    let o = verify(&c.goto, &mut sys, &VerifyOptions::default()).unwrap();
    prop_assert_eq!(o.verdict, Verdict::Successful, "{}", src);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn layouts_and_dispatch_match_model(h in strategy(5)) {
        run(&h)?;
    }
}

type Shape<'a> = (&'a [(usize, bool)], &'a [usize]);

fn spec(classes: &[Shape]) -> Hierarchy {
    Hierarchy {
        classes: classes
            .iter()
            .map(|(b, m)| cxxbmc_testkit::hierarchy::ClassSpec { bases: b.to_vec(), methods: m.to_vec() })
            .collect(),
    }
}

#[test]
fn vptr_counts_of_standard_shapes() {
    let single = spec(&[(&[], &[0]), (&[(0, false)], &[0])]);
    assert_eq!(single.vptr_count(1), 1);
    for n in 1..=4 {
        let mut cs: Vec<Shape> = vec![(&[], &[0]); n];
        let bases: Vec<(usize, bool)> = (0..n).map(|i| (i, false)).collect();
        cs.push((&bases, &[]));
        let h = spec(&cs);
        assert_eq!(h.vptr_count(n), n);
        run(&h).unwrap();
    }
    let diamond = spec(&[(&[], &[0]), (&[(0, true)], &[]), (&[(0, true)], &[]), (&[(1, false), (2, false)], &[])]);
    assert_eq!(diamond.vptr_count(3), 3);
    let c = compile("d.cpp", &diamond.source(), CheckOptions::default()).unwrap();
    let shared = c.model.layouts.class("K3").slots.iter().filter(|s| s.kind == SlotKind::Vptr("K0".into())).count();
    assert_eq!(shared, 1);
    run(&diamond).unwrap();
}

#[test]
fn unsupported_shapes_are_predicted() {
    let crossed = spec(&[(&[], &[0]), (&[(0, true)], &[]), (&[(0, false)], &[]), (&[(1, false), (2, false)], &[])]);
    assert!(!crossed.supported());
    run(&crossed).unwrap();
    let repeated = spec(&[(&[], &[]), (&[(0, false)], &[]), (&[(0, false)], &[]), (&[(1, false), (2, false)], &[])]);
    assert!(!repeated.supported());
    run(&repeated).unwrap();
    let ambiguous = spec(&[(&[], &[0]), (&[(0, true)], &[0]), (&[(0, true)], &[0]), (&[(1, false), (2, false)], &[])]);
    assert!(!ambiguous.supported());
    run(&ambiguous).unwrap();
}

#[test]
fn strategy_mostly_yields_supported_hierarchies() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let s = strategy(5);
    let hs: Vec<Hierarchy> = (0..200).map(|_| s.new_tree(&mut runner).unwrap().current()).collect();
    let ok = hs.iter().filter(|h| h.supported()).count();
    let virt = hs.iter().filter(|h| h.supported() && h.classes.iter().any(|c| c.bases.iter().any(|b| b.1))).count();
    assert!(ok >= 100 && virt >= 20, "supported {ok}, with virtual bases {virt}");
}
