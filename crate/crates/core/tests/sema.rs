use cxxbmc_core::frontend::parse_source;
use cxxbmc_core::sema::{monomorphize, synthesize_defaults, typecheck, Program};

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

fn check(src: &str) -> Result<Program, String> {
    let ast = parse_source("t.cpp", src).map_err(|d| d.to_string())?;
    let p = typecheck(ast).map_err(|d| d.to_string())?;
    let mut p = monomorphize(p);
    synthesize_defaults(&mut p);
    Ok(p)
}

fn reject(src: &str) -> String {
    match check(src) {
        Ok(_) => panic!("accepted:\n{src}"),
        Err(e) => e,
    }
}

#[test]
fn penguin_overrides_bird() {
    let p = check(PENGUIN).unwrap();
    let f = p.symbols.function("Penguin::doit(Penguin*)");
    assert!(f.is_virtual);
    assert_eq!(f.overrides, vec!["Bird::doit(Bird*)".to_string()]);
    assert!(p.symbols.default_ctor("Penguin").is_some());
    assert!(p.symbols.dtor("Penguin").is_none());
}

#[test]
fn friend_template_instance() {
    let p = check(FRIEND).unwrap();
    assert!(p.symbols.classes.contains_key("X<1234>"));
    let f = p.symbols.function("foo<5678>(X<1234>&)");
    assert_eq!(f.display, "foo<5678>");
    assert!(f.has_body);
}

#[test]
fn unused_instances_are_pruned() {
    let src = "template <typename T> struct Box { T v; };
template <typename T> int get(Box<T> *b) { return 1; }
Box<int> used;
int main() { Box<bool> *p = nullptr; return get(&used); }";
    let p = check(src).unwrap();
    assert!(p.symbols.classes.contains_key("Box<int>"));
    assert!(p.symbols.classes.contains_key("Box<bool>"));
    assert!(p.symbols.functions.contains_key("get<int>(Box<int>*)"));
    assert!(!p.symbols.functions.keys().any(|k| k.starts_with("get<bool>")));
}

#[test]
fn explicit_specializations() {
    let src = "template <int N> struct F { int v() { return N * F<N - 1>().v(); } };
template <> struct F<0> { int v() { return 1; } };
int main() { F<3> f; assert(f.v() == 6); return 0; }";
    // `F<N-1>()` would be a temporary object.
    reject(src);
    let src = "template <int N> int f() { return N * f<N - 1>(); }
template <> int f<0>() { return 1; }
int main() { assert(f<4>() == 24); return 0; }";
    let p = check(src).unwrap();
    for k in ["f<4>()", "f<3>()", "f<2>()", "f<1>()", "f<0>()"] {
        assert!(p.symbols.functions.contains_key(k), "{k}");
    }
}

#[test]
fn instantiation_depth_is_limited() {
    let src = "template <int N> int f() { return f<N + 1>(); }
int main() { return f<0>(); }";
    let e = reject(src);
    assert!(e.contains("depth exceeds 64"), "{e}");
}

#[test]
fn circular_class_instantiation() {
    let src = "template <int N> struct S { S<N> inner; };
S<1> s;
int main() { return 0; }";
    let e = reject(src);
    assert!(e.contains("circular"), "{e}");
}

#[test]
fn default_template_arguments_see_earlier_parameters() {
    let src = "template <int A, int B = A * 2> struct P { int get() { return B; } };
int main() { P<3> p; assert(p.get() == 6); return 0; }";
    let p = check(src).unwrap();
    assert!(p.symbols.classes.contains_key("P<3,6>"));
}

#[test]
fn type_errors() {
    assert!(reject("int main(){ bool b = 1 + true; return 0; }").contains("invalid operands"));
    assert!(reject("int main(){ int *p = 1; return 0; }").contains("cannot convert"));
    check("int main(){ int *p = 0; return 0; }").unwrap();
    assert!(reject("int main(){ int a = 2147483648; return 0; }").contains("does not fit"));
    check("int main(){ int a = -2147483648; return 0; }").unwrap();
    assert!(reject("struct A { virtual int f() = 0; }; int main(){ A a; return 0; }").contains("abstract"));
    assert!(reject("struct A { A(int x) {} }; int main(){ A a; return 0; }").contains("default constructor"));
    assert!(reject("int main(){ int *p; int *q; return p < q; }").contains("invalid operands"));
    assert!(reject("struct A { int x; }; struct B { int x; }; struct C : A, B {}; int main(){ C c; return c.x; }")
        .contains("ambiguous"));
    assert!(reject("struct A { int f() { return 0; } }; int main(){ A a; return a.g(); }").contains("no member"));
}

#[test]
fn override_error_names_the_method() {
    let e = reject(
        "class Bird { public: int doit(void) { return 21; } };
class Penguin: public Bird { public: int doit(void) override { return 42; } };
int main(){ return 0; }",
    );
    assert!(e.contains("Penguin::doit") && e.contains("override"), "{e}");
    assert!(e.starts_with("error: t.cpp:2:"), "{e}");
}

#[test]
fn synthesized_members() {
    let src = "struct M { ~M() {} };
struct A { virtual ~A() {} };
struct B : A { int a[2]; M m; };
int main(){ B b; B c = b; return 0; }";
    let p = check(src).unwrap();
    let d = p.symbols.dtor("B").unwrap();
    assert!(d.is_virtual && d.synthesized.is_some());
    let cc = p.symbols.copy_ctor("B").unwrap();
    assert_eq!(cc.mangled, "B::B(B*,B&)");
    let synthesized = p
        .ast
        .decls
        .iter()
        .filter_map(|d| match d {
            cxxbmc_core::frontend::ast::Decl::Class(c) if c.name == "B" => Some(c),
            _ => None,
        })
        .flat_map(|c| c.members.iter())
        .filter(|m| matches!(m, cxxbmc_core::frontend::ast::Member::Method(f) if f.flags.synthesized))
        .count();
    assert_eq!(synthesized, 3);
}

#[test]
fn monomorphize_is_idempotent() {
    for src in [PENGUIN, FRIEND] {
        let p = check(src).unwrap();
        let again = monomorphize(p.clone());
        assert_eq!(again.ast, p.ast);
        assert_eq!(
            again.symbols.functions.keys().collect::<Vec<_>>(),
            p.symbols.functions.keys().collect::<Vec<_>>()
        );
    }
}
