//! Verdicts on 8-bit programs against enumeration of every input.

use cxxbmc_core::goto::CheckOptions;
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::{interp, symex, SymexConfig};
use cxxbmc_core::verify::{verify, Verdict, VerifyOptions};

pub const W: u32 = 8;
pub const OPS: [&str; 5] = ["+", "-", "*", "/", "%"];

fn wrap(v: i64) -> i64 {
    (v as i8) as i64
}

/// Reference semantics: wrap-around arithmetic, division by zero as in
/// SMT-LIB (`x / 0` is -1 or 1 by sign of `x`, `x % 0` is `x`).
pub fn apply(op: &str, a: i64, b: i64) -> i64 {
    match op {
        "+" => wrap(a + b),
        "-" => wrap(a - b),
        "*" => wrap(a * b),
        "/" if b == 0 => {
            if a >= 0 {
                -1
            } else {
                1
            }
        }
        "%" if b == 0 => a,
        "/" => wrap(a / b),
        "%" => wrap(a % b),
        _ => unreachable!(),
    }
}

/// The operation overflows or divides by zero.
pub fn bad(op: &str, a: i64, b: i64) -> bool {
    let exact = match op {
        "+" => a + b,
        "-" => a - b,
        "*" => a * b,
        _ => {
            if b == 0 {
                return true;
            }
            if b == -1 {
                -a
            } else {
                0
            }
        }
    };
    !(-128..=127).contains(&exact)
}

pub fn cfg() -> SymexConfig {
    SymexConfig {
        int_width: W,
        ..SymexConfig::default()
    }
}

/// Verdict of `src` at 8 bits; a counterexample must replay.
pub fn check(src: &str, opts: CheckOptions) -> Result<Verdict, String> {
    let c = compile("t.cpp", src, opts).map_err(|d| format!("{d}\n{src}"))?;
    let mut sys = symex(&c.goto, cfg()).map_err(|e| e.to_string())?;
    let o = verify(&c.goto, &mut sys, &VerifyOptions::default()).map_err(|e| e.to_string())?;
    if let Some(cx) = o.failures.first() {
        let r = interp::run(&c.goto, cfg(), &cx.inputs).map_err(|e| e.to_string())?;
        if !r.violations.contains(&cx.prop) {
            return Err(format!("counterexample does not replay\n{src}"));
        }
    }
    Ok(o.verdict)
}

pub fn expect(found: bool) -> Verdict {
    if found {
        Verdict::Failed
    } else {
        Verdict::Successful
    }
}

pub fn result_program(op: &str, lo: i64, k: i64) -> String {
    format!(
        "int main() {{
  int a = nondet_int();
  int b = nondet_int();
  __CPROVER_assume(b >= {lo});
  int r = a {op} b;
  assert(r != {k});
  return 0;
}}
"
    )
}

pub fn overflow_program(op: &str, lo: i64, hi: i64) -> String {
    format!(
        "int main() {{
  int a = nondet_int();
  int b = nondet_int();
  __CPROVER_assume(b >= {lo} && b <= {hi});
  int r = a {op} b;
  return 0;
}}
"
    )
}

pub fn bounds_program(n: i64, lo: i64, hi: i64, off: i64) -> String {
    format!(
        "int a[{n}];
int main() {{
  int i = nondet_int();
  __CPROVER_assume(i >= {lo} && i <= {hi});
  a[i + {off}] = 1;
  return 0;
}}
"
    )
}

/// Enumerated verdict of [`result_program`].
pub fn result_reachable(op: &str, lo: i64, k: i64) -> bool {
    (-128..=127).any(|a| (lo..=127).any(|b| apply(op, a, b) == k))
}

pub fn overflow_reachable(op: &str, lo: i64, hi: i64) -> bool {
    (-128..=127).any(|a| (lo..=hi).any(|b| bad(op, a, b)))
}

/// Either the index addition overflows or the index leaves the array.
pub fn out_of_bounds(n: i64, lo: i64, hi: i64, off: i64) -> bool {
    (lo..=hi).any(|i| {
        let j = i + off;
        !(-128..=127).contains(&j) || j < 0 || j >= n
    })
}

pub fn bounds_checks() -> CheckOptions {
    CheckOptions {
        bounds: true,
        overflow: true,
        ..CheckOptions::default()
    }
}

/// A fixed grid over every operator. Returns the number of programs.
pub fn grid() -> Result<usize, String> {
    let mut n = 0;
    let mut same = |src: String, opts: CheckOptions, want: bool| -> Result<(), String> {
        n += 1;
        let got = check(&src, opts)?;
        if got != expect(want) {
            return Err(format!("got {got:?}, enumeration says violated = {want}\n{src}"));
        }
        Ok(())
    };
    let overflow = CheckOptions {
        overflow: true,
        ..CheckOptions::default()
    };
    for op in OPS {
        for (lo, k) in [(-128, 0), (3, 127), (5, -100), (100, 2), (-1, -128), (120, 77)] {
            same(result_program(op, lo, k), CheckOptions::default(), result_reachable(op, lo, k))?;
        }
        for (lo, hi) in [(-128, 127), (1, 1), (2, 3), (-1, -1), (0, 0), (1, 127), (64, 64), (-2, 2)] {
            same(overflow_program(op, lo, hi), overflow, overflow_reachable(op, lo, hi))?;
        }
    }
    for (arr, lo, hi, off) in [(4, 0, 3, 0), (4, 0, 4, 0), (4, -1, 2, 0), (10, 2, 9, -2), (10, 2, 9, -3), (100, 0, 127, -28), (100, 100, 127, 27), (100, 0, 120, 10)] {
        same(bounds_program(arr, lo, hi, off), bounds_checks(), out_of_bounds(arr, lo, hi, off))?;
    }
    Ok(n)
}
