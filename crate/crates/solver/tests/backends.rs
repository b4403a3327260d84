use std::path::PathBuf;

use cxxbmc_solver::{check, Backend, SolveResult, Sort, Term, TermStore};
use proptest::prelude::*;

fn z3() -> Option<Backend> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join("z3"))
        .find(|p| p.is_file())
        .map(|program| Backend::External {
            program,
            args: vec![],
        })
}

fn formula(s: &mut TermStore, ops: &[(u8, usize, usize, u8)]) -> Term {
    let x = s.symbol("x", Sort::BitVec(8));
    let y = s.symbol("y", Sort::BitVec(8));
    let zero = s.bv(8, 0);
    let m0 = s.const_array(32, zero);
    let m = s.symbol("mem#1", Sort::Array(32, 8));
    let mut pool = vec![x, y];
    let mut conds = Vec::new();
    for &(op, i, j, c) in ops {
        let a = pool[i % pool.len()];
        let b = pool[j % pool.len()];
        let k = s.bv(8, c as u64);
        let t = match op % 8 {
            0 => s.bv_add(a, b),
            1 => s.bv_mul(a, k),
            2 => s.bv_sdiv(a, b),
            3 => s.bv_srem(a, b),
            4 => {
                let idx = s.zero_ext(24, a);
                s.select(m, idx)
            }
            5 => {
                let lt = s.bv_slt(a, b);
                conds.push(lt);
                s.ite(lt, a, k)
            }
            6 => s.bv_udiv(a, k),
            _ => s.bv_sub(b, a),
        };
        pool.push(t);
    }
    let ix = s.zero_ext(24, x);
    let iy = s.zero_ext(24, y);
    let m1 = s.store(m0, ix, y);
    let m1 = s.store(m1, iy, x);
    let def = s.eq(m, m1);
    let last = *pool.last().unwrap();
    let k = s.bv(8, 0x2a);
    let goal = s.eq(last, k);
    let mut all = vec![def, goal];
    all.extend(conds.into_iter().take(1));
    s.and(&all)
}

#[test]
fn builtin_finds_valid_models() {
    let mut s = TermStore::new();
    let f = formula(&mut s, &[(0, 0, 1, 0), (1, 2, 0, 3)]);
    match check(&s, &[f], &Backend::Builtin, None).unwrap() {
        SolveResult::Sat(m) => assert!(m.eval(&s, f).as_bool()),
        r => panic!("{r:?}"),
    }
}

#[test]
fn unknown_solver_path_is_an_error() {
    let mut s = TermStore::new();
    let f = formula(&mut s, &[(0, 0, 1, 0)]);
    let b = Backend::External {
        program: PathBuf::from("/nonexistent/z3"),
        args: vec![],
    };
    assert!(check(&s, &[f], &b, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn builtin_agrees_with_z3(ops in proptest::collection::vec((any::<u8>(), 0usize..10, 0usize..10, any::<u8>()), 1..8)) {
        let Some(z3) = z3() else { return Ok(()); };
        let mut s = TermStore::new();
        let f = formula(&mut s, &ops);
        let a = check(&s, &[f], &Backend::Builtin, None).unwrap();
        let b = check(&s, &[f], &z3, None).unwrap();
        prop_assert_eq!(a.is_sat(), b.is_sat());
        prop_assert_eq!(a.is_unsat(), b.is_unsat());
    }
}
