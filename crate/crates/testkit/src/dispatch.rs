//! Brute-force final overriders checked against the generated vtables.

use std::collections::BTreeSet;

use cxxbmc_core::object_model::ObjectModel;
use cxxbmc_core::sema::symbols::{FnKind, FunctionInfo, SymbolTable};

fn ancestors(syms: &SymbolTable, c: &str, out: &mut BTreeSet<String>) {
    if out.insert(c.to_string()) {
        for b in &syms.class(c).bases {
            ancestors(syms, &b.name, out);
        }
    }
}

fn is_ancestor(syms: &SymbolTable, d: &str, b: &str) -> bool {
    let mut all = BTreeSet::new();
    ancestors(syms, d, &mut all);
    all.contains(b)
}

fn same_slot(f: &FunctionInfo, g: &FunctionInfo) -> bool {
    match (f.kind, g.kind) {
        (FnKind::Dtor, FnKind::Dtor) => true,
        (FnKind::Method, FnKind::Method) => f.name == g.name && f.params == g.params,
        _ => false,
    }
}

/// Most-derived declaration in `class` matching `method`, among classes
/// between the declaring class of `method` and `class`.
pub fn final_overrider(syms: &SymbolTable, class: &str, method: &str) -> Option<String> {
    let m = syms.function(method);
    let owner = m.class.as_deref()?;
    let mut family = BTreeSet::new();
    ancestors(syms, class, &mut family);
    let mut cands: Vec<(String, String)> = Vec::new();
    for c in family.iter().filter(|c| is_ancestor(syms, c, owner)) {
        for f in &syms.class(c).methods {
            if same_slot(syms.function(f), m) {
                cands.push((c.clone(), f.clone()));
            }
        }
    }
    let maximal: Vec<&(String, String)> = cands
        .iter()
        .filter(|(c, _)| !cands.iter().any(|(o, _)| o != c && is_ancestor(syms, o, c)))
        .collect();
    match maximal.as_slice() {
        [(_, f)] => Some(f.clone()),
        _ => None,
    }
}

/// Checks every vtable entry against the oracle. Returns the number of
/// entries checked.
pub fn check(syms: &SymbolTable, om: &ObjectModel) -> Result<usize, String> {
    let mut n = 0;
    for t in &om.vtables.tables {
        for (i, e) in t.entries.iter().enumerate() {
            let want = final_overrider(syms, &t.class, &e.method)
                .ok_or_else(|| format!("{}[{i}]: no unique overrider of `{}`", t.name, e.method))?;
            let got = e.target.as_ref().map(|g| {
                om.vtables
                    .thunks
                    .iter()
                    .find(|th| th.name == *g)
                    .map_or(g.clone(), |th| th.target.clone())
            });
            let pure = syms.function(&want).is_pure;
            let ok = match &got {
                Some(g) => *g == want && !pure,
                None => pure,
            };
            if !ok {
                return Err(format!("{}[{i}]: expected `{want}`, found {got:?}", t.name));
            }
            n += 1;
        }
    }
    Ok(n)
}

/// Every dynamic class has one table per vptr slot of its complete object.
pub fn check_tables_present(syms: &SymbolTable, om: &ObjectModel) -> Result<(), String> {
    for c in &syms.class_order {
        for (root, _) in om.layouts.vptrs(c) {
            let name = format!("{root}@{c}");
            if om.vtables.table(&name).is_none() {
                return Err(format!("missing table `{name}`"));
            }
        }
    }
    Ok(())
}
