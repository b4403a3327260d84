//! Virtual tables and this-adjusting thunks.
//!
//! A complete object of class `D` has one vptr per root subobject `R`
//! (a class that introduced its own vptr); it points to table `R@D`.
//! An entry calls the final overrider directly when it is declared in `R`
//! and through a thunk that shifts `this` otherwise.

use std::collections::BTreeMap;

use super::layout::Layouts;
use crate::diag::Diagnostic;
use crate::sema::symbols::SymbolTable;
use crate::sema::types::{mangle, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VtEntry {
    /// Introducing declaration of the slot.
    pub method: String,
    /// Function called through the slot; `None` for a pure virtual.
    pub target: Option<String>,
}

#[derive(Clone, Debug)]
pub struct VTable {
    pub name: String,
    pub root: String,
    pub class: String,
    pub entries: Vec<VtEntry>,
}

#[derive(Clone, Debug)]
pub struct Thunk {
    pub name: String,
    /// Display form used in dumps: `thunk::Penguin::doit`.
    pub display: String,
    pub target: String,
    pub root: String,
    /// Slot distance from the root subobject to the overrider's subobject.
    pub delta: i64,
    pub params: Vec<Type>,
    pub ret: Type,
}

#[derive(Clone, Debug, Default)]
pub struct VTables {
    pub tables: Vec<VTable>,
    pub thunks: Vec<Thunk>,
}

impl VTables {
    pub fn table(&self, name: &str) -> Option<&VTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Possible targets of slot `index` in tables of root `root`.
    pub fn candidates(&self, root: &str, index: usize) -> Vec<Option<String>> {
        let mut out = Vec::new();
        for t in self.tables.iter().filter(|t| t.root == root) {
            if let Some(e) = t.entries.get(index) {
                if !out.contains(&e.target) {
                    out.push(e.target.clone());
                }
            }
        }
        out
    }

    pub fn compute(syms: &SymbolTable, layouts: &Layouts) -> Result<VTables, Diagnostic> {
        let mut vt = VTables::default();
        let mut thunk_names: BTreeMap<(String, String, i64), String> = BTreeMap::new();
        let mut thunk_count: BTreeMap<(String, String), usize> = BTreeMap::new();
        for d in &syms.class_order {
            let mut family = vec![d.clone()];
            family.extend(syms.all_bases(d));
            for (root, off) in layouts.vptrs(d) {
                let methods = family
                    .iter()
                    .filter(|t| layouts.root(t).as_deref() == Some(root.as_str()))
                    .map(|t| vtable_methods(syms, layouts, t))
                    .max_by_key(|m| m.len())
                    .unwrap_or_default();
                let mut entries = Vec::new();
                for m in methods {
                    let f = final_overrider(syms, d, &m)?;
                    let fi = syms.function(&f);
                    let target = if fi.is_pure && !fi.has_body {
                        None
                    } else if fi.class.as_deref() == Some(root.as_str()) {
                        Some(f.clone())
                    } else {
                        let fc = fi.class.clone().unwrap();
                        let delta = layouts.subobject_offset(d, &fc).unwrap() as i64 - off as i64;
                        let key = (f.clone(), root.clone(), delta);
                        let name = match thunk_names.get(&key) {
                            Some(n) => n.clone(),
                            None => {
                                let k = thunk_count.entry((f.clone(), root.clone())).or_insert(0);
                                let mut params = vec![Type::ptr(Type::class(root.clone()))];
                                params.extend(fi.params.iter().cloned());
                                let display = format!("thunk::{}", fi.display);
                                let mut name = mangle(&display, &params);
                                if *k > 0 {
                                    name = format!("{name}${k}");
                                }
                                *k += 1;
                                thunk_names.insert(key, name.clone());
                                vt.thunks.push(Thunk {
                                    name: name.clone(),
                                    display,
                                    target: f.clone(),
                                    root: root.clone(),
                                    delta,
                                    params: fi.params.clone(),
                                    ret: fi.ret.clone(),
                                });
                                name
                            }
                        };
                        Some(name)
                    };
                    entries.push(VtEntry { method: m, target });
                }
                vt.tables.push(VTable {
                    name: format!("{root}@{d}"),
                    root,
                    class: d.clone(),
                    entries,
                });
            }
        }
        Ok(vt)
    }
}

/// The declaration that introduced the slot `m` occupies.
pub fn introducer(syms: &SymbolTable, m: &str) -> String {
    let mut cur = m.to_string();
    while let Some(o) = syms.function(&cur).overrides.first() {
        cur = o.clone();
    }
    cur
}

/// Slots of the table reached through the vptr at offset 0 of a `class`
/// subobject: the primary base's slots, then methods `class` introduces.
pub fn vtable_methods(syms: &SymbolTable, layouts: &Layouts, class: &str) -> Vec<String> {
    let mut out = match &layouts.class(class).primary {
        Some(p) => vtable_methods(syms, layouts, p),
        None => vec![],
    };
    if !syms.is_dynamic(class) {
        return out;
    }
    for m in &syms.class(class).methods {
        let f = syms.function(m);
        if f.is_virtual && f.overrides.is_empty() {
            out.push(m.clone());
        }
    }
    out
}

fn overrides_transitively(syms: &SymbolTable, f: &str, m: &str) -> bool {
    f == m || syms.function(f).overrides.iter().any(|o| overrides_transitively(syms, o, m))
}

/// Final overrider of slot `m` in a complete `class` object.
pub fn final_overrider(syms: &SymbolTable, class: &str, m: &str) -> Result<String, Diagnostic> {
    let mut family = vec![class.to_string()];
    family.extend(syms.all_bases(class));
    let mut cands: Vec<String> = Vec::new();
    for c in &family {
        for f in &syms.class(c).methods {
            if overrides_transitively(syms, f, m) {
                cands.push(f.clone());
            }
        }
    }
    let class_of = |f: &String| syms.function(f).class.clone().unwrap();
    let maximal: Vec<&String> = cands
        .iter()
        .filter(|f| {
            let fc = class_of(f);
            !cands.iter().any(|g| {
                let gc = class_of(g);
                gc != fc && syms.derives_from(&gc, &fc)
            })
        })
        .collect();
    match maximal.as_slice() {
        [one] => Ok((*one).clone()),
        _ => Err(Diagnostic::error(
            syms.class(class).loc.clone(),
            format!(
                "no unique final overrider for `{}` in `{class}`",
                syms.function(m).display
            ),
        )),
    }
}

/// Vtable slot used to call `m`: the root of the introducing class and the
/// index of the slot in its table.
pub fn dispatch_slot(syms: &SymbolTable, layouts: &Layouts, m: &str) -> (String, String, usize) {
    let intro = introducer(syms, m);
    let t = syms.function(&intro).class.clone().unwrap();
    let root = layouts.root(&t).expect("virtual method in a class without vptr");
    let index = vtable_methods(syms, layouts, &t)
        .iter()
        .position(|x| *x == intro)
        .expect("introducer missing from its own table");
    (t, root, index)
}
