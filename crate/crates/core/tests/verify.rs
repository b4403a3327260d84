use cxxbmc_core::goto::CheckOptions;
use cxxbmc_core::pipeline::compile;
use cxxbmc_core::symex::{interp, symex, SymexConfig};
use cxxbmc_core::verify::{report_text, verify, Outcome, Verdict, VerifyOptions};

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

const FRIEND: &str = "#include <cassert>
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

fn run(src: &str, check: CheckOptions, cfg: SymexConfig) -> (Outcome, String) {
    let c = compile("t.cpp", src, check).unwrap_or_else(|d| panic!("{d}"));
    let mut sys = symex(&c.goto, cfg).unwrap();
    sys.check_single_assignment().unwrap();
    let o = verify(&c.goto, &mut sys, &VerifyOptions::default()).unwrap();
    let text = report_text(&c.goto, &o);
    if let Some(cx) = o.failures.first() {
        // The counterexample must replay concretely.
        let r = interp::run(&c.goto, cfg, &cx.inputs).unwrap();
        assert!(r.violations.contains(&cx.prop), "replay misses the violation\n{text}");
    }
    (o, text)
}

fn verdict(src: &str) -> Verdict {
    run(src, CheckOptions::default(), SymexConfig::default()).0.verdict
}

#[test]
fn penguin_is_successful() {
    let (o, text) = run(PENGUIN, CheckOptions::default(), SymexConfig::default());
    assert_eq!(o.verdict, Verdict::Successful, "{text}");
    assert!(text.ends_with("VERIFICATION SUCCESSFUL\n"));
}

#[test]
fn friend_template_fails_with_value() {
    let (o, text) = run(FRIEND, CheckOptions::default(), SymexConfig::default());
    println!("{text}");
    assert_eq!(o.verdict, Verdict::Failed);
    assert!(text.contains(
        "Violated property:
  file t.cpp line 13 column 3 function main
  assertion foo<5678>(bring)!=12345678
  return_value!=12345678

VERIFICATION FAILED
"
    ));
    assert!(text.contains("return_value=12345678"));
}

#[test]
fn wrong_dispatch_expectation_fails() {
    let src = PENGUIN.replace("== 42", "== 21");
    assert_eq!(verdict(&src), Verdict::Failed);
}

fn with(src: &str, check: CheckOptions, unwind: u32, ua: bool) -> Verdict {
    let cfg = SymexConfig {
        unwind,
        unwinding_assertions: ua,
        ..SymexConfig::default()
    };
    run(src, check, cfg).0.verdict
}

const SUM: &str = "int main() {
  int s = 0;
  for (int i = 0; i < 10; i++) s += i;
  assert(s == 45);
  return 0;
}
";

#[test]
fn sum_loop_needs_enough_unwinding() {
    let opts = CheckOptions::default();
    assert_eq!(with(SUM, opts, 10, true), Verdict::Successful);
    assert_eq!(with(SUM, opts, 3, true), Verdict::Failed);
    // Without unwinding assertions the cut paths are silently dropped.
    assert_eq!(with(SUM, opts, 3, false), Verdict::Successful);
}

#[test]
fn nondet_overflow_is_found() {
    let src = "int main() {
  int x = nondet_int();
  int y = x + 1;
  assert(y > x || x == 2147483647);
  return 0;
}
";
    let on = CheckOptions {
        overflow: true,
        ..CheckOptions::default()
    };
    assert_eq!(with(src, CheckOptions::default(), 10, false), Verdict::Successful);
    assert_eq!(with(src, on, 10, false), Verdict::Failed);
}

#[test]
fn array_bounds() {
    let src = "int main() {
  int a[4];
  int i = nondet_int();
  if (i >= 0 && i <= 4) a[i] = 1;
  return 0;
}
";
    let on = CheckOptions {
        bounds: true,
        ..CheckOptions::default()
    };
    assert_eq!(with(src, on, 10, false), Verdict::Failed);
    let fixed = src.replace("i <= 4", "i < 4");
    assert_eq!(with(&fixed, on, 10, false), Verdict::Successful);
}

#[test]
fn memory_errors() {
    let mem = CheckOptions {
        memory: true,
        ..CheckOptions::default()
    };
    let double_free = "int main() {
  int *p = new int(3);
  delete p;
  delete p;
  return 0;
}
";
    assert_eq!(with(double_free, mem, 10, false), Verdict::Failed);
    let null_deref = "int main() {
  int *p = 0;
  if (nondet_bool()) p = new int(1);
  int v = *p;
  delete p;
  return v;
}
";
    assert_eq!(with(null_deref, mem, 10, false), Verdict::Failed);
    let ok = "int main() {
  int *p = new int(3);
  *p = *p + 1;
  assert(*p == 4);
  delete p;
  return 0;
}
";
    assert_eq!(with(ok, mem, 10, false), Verdict::Successful);
}

#[test]
fn recursion_bound() {
    let src = "int fact(int n) { if (n <= 1) return 1; return n * fact(n - 1); }
int main() {
  assert(fact(5) == 120);
  return 0;
}
";
    assert_eq!(with(src, CheckOptions::default(), 10, true), Verdict::Successful);
    assert_eq!(with(src, CheckOptions::default(), 2, true), Verdict::Failed);
}

#[test]
fn virtual_and_multiple_inheritance() {
    let src = "struct A { int a; virtual int f() { return 1; } };
struct B { int b; virtual int g() { return 2; } };
struct C : public A, public B {
  int f() override { return 10; }
  int g() override { return 20 + a; }
};
int main() {
  C *c = new C();
  c->a = 5;
  B *b = c;
  A *a = c;
  assert(b->g() == 25);
  assert(a->f() == 10);
  delete c;
  return 0;
}
";
    assert_eq!(verdict(src), Verdict::Successful);
    assert_eq!(verdict(&src.replace("== 25", "== 20")), Verdict::Failed);
}

#[test]
fn virtual_base_shared() {
    let src = "struct V { int v; };
struct L : virtual V { };
struct R : virtual V { };
struct D : L, R { };
int main() {
  D d;
  L *l = &d;
  R *r = &d;
  l->v = 7;
  assert(r->v == 7);
  return 0;
}
";
    assert_eq!(verdict(src), Verdict::Successful);
}

#[test]
fn nondet_dispatch() {
    let src = "struct S { virtual int k() { return 1; } };
struct T : S { int k() override { return 2; } };
int main() {
  S *p;
  if (nondet_bool()) p = new S(); else p = new T();
  int r = p->k();
  assert(r == 1);
  delete p;
  return 0;
}
";
    assert_eq!(verdict(src), Verdict::Failed);
    assert_eq!(verdict(&src.replace("r == 1", "r == 1 || r == 2")), Verdict::Successful);
}

#[test]
fn virtual_base_reached_through_virtual_base() {
    let src = "struct A { int a; virtual int f() { return 1; } };
struct B : virtual A { int b; int f() { return 2; } };
struct C : virtual B { int c; };
int main() {
  C o;
  A *p = &o;
  assert(p->f() == 2);
  assert(p->f() == 1);
  return 0;
}
";
    let (o, text) = run(src, CheckOptions::default(), SymexConfig::default());
    assert_eq!(o.verdict, Verdict::Failed);
    assert!(text.contains("line 8 column"), "{text}");
}
