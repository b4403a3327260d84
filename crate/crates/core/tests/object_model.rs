use cxxbmc_core::frontend::parse_source;
use cxxbmc_core::object_model::{vtable, ObjectModel, SlotKind};
use cxxbmc_core::sema::{monomorphize, synthesize_defaults, typecheck, Program};

fn build(src: &str) -> Result<(Program, ObjectModel), String> {
    let ast = parse_source("t.cpp", src).map_err(|d| d.to_string())?;
    let mut p = monomorphize(typecheck(ast).map_err(|d| d.to_string())?);
    synthesize_defaults(&mut p);
    let om = ObjectModel::build(&p.symbols).map_err(|d| d.to_string())?;
    Ok((p, om))
}

fn vptr_names(om: &ObjectModel, c: &str) -> Vec<String> {
    om.layouts
        .class(c)
        .slots
        .iter()
        .filter(|s| matches!(s.kind, SlotKind::Vptr(_)))
        .map(|s| s.name.clone())
        .collect()
}

const MAIN: &str = "int main(){ return 0; }";

#[test]
fn penguin_has_one_table_through_bird() {
    let src = format!(
        "class Bird {{ public: virtual int doit(void) {{ return 21; }} }};
class Penguin: public Bird {{ public: int doit(void) override {{ return 42; }} }};
{MAIN}"
    );
    let (p, om) = build(&src).unwrap();
    assert_eq!(vptr_names(&om, "Penguin"), vec!["Bird@vptr"]);
    let t = om.vtables.table("Bird@Penguin").unwrap();
    assert_eq!(t.entries[0].target.as_deref(), Some("thunk::Penguin::doit(Bird*)"));
    assert!(om.vtables.table("Penguin@Penguin").is_none());
    let th = &om.vtables.thunks[0];
    assert_eq!((th.target.as_str(), th.delta), ("Penguin::doit(Penguin*)", 0));
    let (t, root, idx) = vtable::dispatch_slot(&p.symbols, &om.layouts, "Penguin::doit(Penguin*)");
    assert_eq!((t.as_str(), root.as_str(), idx), ("Bird", "Bird", 0));
    assert_eq!(
        om.vtables.table("Bird@Bird").unwrap().entries[0].target.as_deref(),
        Some("Bird::doit(Bird*)")
    );
}

#[test]
fn two_dynamic_bases_give_two_vptrs() {
    let src = format!(
        "struct A {{ int a; virtual int f() {{ return 1; }} }};
struct B {{ int b; virtual int g() {{ return 2; }} }};
struct C : A, B {{ int c; int g() {{ return 3; }} virtual int h() {{ return 4; }} }};
{MAIN}"
    );
    let (_, om) = build(&src).unwrap();
    assert_eq!(vptr_names(&om, "C"), vec!["A@vptr", "B@vptr"]);
    let l = om.layouts.class("C");
    assert_eq!(l.size(), 5);
    assert_eq!(om.layouts.subobject_offset("C", "B"), Some(2));
    let b = om.vtables.table("B@C").unwrap();
    assert_eq!(b.entries[0].target.as_deref(), Some("thunk::C::g(B*)"));
    let th = om.vtables.thunks.iter().find(|t| t.name == "thunk::C::g(B*)").unwrap();
    assert_eq!(th.delta, -2);
    // `h` extends the primary table.
    let a = om.vtables.table("A@C").unwrap();
    assert_eq!(a.entries.len(), 2);
    assert_eq!(a.entries[1].target.as_deref(), Some("thunk::C::h(A*)"));
}

#[test]
fn virtual_diamond_shares_one_base() {
    let src = format!(
        "struct B {{ int x; virtual int f() {{ return 1; }} }};
struct L : virtual B {{ int l; }};
struct R : virtual B {{ int r; int f() {{ return 2; }} }};
struct D : L, R {{ }};
{MAIN}"
    );
    let (_, om) = build(&src).unwrap();
    let v = vptr_names(&om, "D");
    assert_eq!(v.len(), 3, "{v:?}");
    assert_eq!(v.iter().filter(|n| *n == "B@vptr").count(), 1);
    let bo = om.layouts.subobject_offset("D", "B").unwrap();
    assert_eq!(om.layouts.class("D").vbases, vec![("B".to_string(), bo)]);
    let t = om.vtables.table("B@D").unwrap();
    let target = t.entries[0].target.clone().unwrap();
    let th = om.vtables.thunks.iter().find(|t| t.name == target).unwrap();
    assert_eq!(th.target, "R::f(R*)");
    assert_eq!(th.delta, om.layouts.subobject_offset("D", "R").unwrap() as i64 - bo as i64);
}

#[test]
fn ambiguous_final_overrider() {
    let src = format!(
        "struct B {{ virtual int f() {{ return 1; }} }};
struct L : virtual B {{ int f() {{ return 2; }} }};
struct R : virtual B {{ int f() {{ return 3; }} }};
struct D : L, R {{ }};
{MAIN}"
    );
    let e = build(&src).unwrap_err();
    assert!(e.contains("final overrider"), "{e}");
}

#[test]
fn unsupported_hierarchies() {
    let e = build(&format!("struct A {{ int a; }}; struct B : A {{}}; struct C : A {{}}; struct D : B, C {{}}; {MAIN}"))
        .unwrap_err();
    assert!(e.contains("repeated non-virtual base"), "{e}");
    let e = build(&format!(
        "struct A {{ int a; }}; struct B : virtual A {{}}; struct C : A {{}}; struct D : B, C {{}}; {MAIN}"
    ))
    .unwrap_err();
    assert!(e.contains("crossed diamond"), "{e}");
}

#[test]
fn pure_virtual_slots_have_no_target() {
    let src = format!("struct S {{ virtual int f() = 0; }}; struct T : S {{ int f() {{ return 1; }} }}; {MAIN}");
    let (_, om) = build(&src).unwrap();
    assert_eq!(om.vtables.table("S@S").unwrap().entries[0].target, None);
    assert_eq!(om.vtables.candidates("S", 0).len(), 2);
}

#[test]
fn render_lists_slots_and_tables() {
    let src = format!(
        "class Bird {{ public: virtual int doit(void) {{ return 21; }} }};
class Penguin: public Bird {{ public: int doit(void) override {{ return 42; }} }};
{MAIN}"
    );
    let (p, om) = build(&src).unwrap();
    let r = om.render(&p.symbols);
    assert!(r.contains("class Penguin (size 1, non-virtual size 1)\n  [0] Bird@vptr\nBird@Penguin[0] = thunk::Penguin::doit(Bird*)\n"), "{r}");
}
