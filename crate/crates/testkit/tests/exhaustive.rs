use cxxbmc_core::goto::CheckOptions;
use cxxbmc_testkit::exhaustive::*;
use proptest::prelude::*;

#[test]
fn fixed_grid_matches_enumeration() {
    assert_eq!(grid().unwrap(), 78);
}

#[test]
fn enumeration_oracle_sanity() {
    assert_eq!(apply("*", 16, 16), 0);
    assert_eq!(apply("/", -128, -1), -128);
    assert!(bad("/", -128, -1) && bad("%", 5, 0) && !bad("-", -1, 127));
    assert!(out_of_bounds(4, 0, 4, 0) && !out_of_bounds(4, 0, 3, 0));
    assert!(out_of_bounds(100, 100, 127, 27));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn overflow_matches_enumeration(op in prop::sample::select(OPS.to_vec()), lo in -128i64..=127, len in 0i64..4) {
        let hi = (lo + len).min(127);
        let opts = CheckOptions { overflow: true, ..CheckOptions::default() };
        prop_assert_eq!(check(&overflow_program(op, lo, hi), opts).unwrap(), expect(overflow_reachable(op, lo, hi)));
    }

    #[test]
    fn result_values_match_enumeration(op in prop::sample::select(OPS.to_vec()), lo in -128i64..=127, k in -128i64..=127) {
        prop_assert_eq!(check(&result_program(op, lo, k), CheckOptions::default()).unwrap(), expect(result_reachable(op, lo, k)));
    }

    #[test]
    fn bounds_match_enumeration(n in 1i64..=120, lo in -128i64..=127, len in 0i64..16, off in -8i64..=8) {
        let hi = (lo + len).min(127);
        prop_assert_eq!(check(&bounds_program(n, lo, hi, off), bounds_checks()).unwrap(), expect(out_of_bounds(n, lo, hi, off)));
    }
}
