//! Slot-based object layout.
//!
//! Every scalar occupies one slot. The non-virtual part of a class holds,
//! in order: its own vptr (only when no non-virtual base already provides
//! one), the primary base, the other non-virtual bases, one pointer per
//! direct virtual base, then the fields. A complete object is the
//! non-virtual part followed by the non-virtual parts of all virtual bases.

use std::collections::BTreeMap;

use crate::diag::Diagnostic;
use crate::sema::symbols::SymbolTable;
use crate::sema::types::Type;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Int,
    Bool,
    Ptr,
    /// Virtual table pointer of the subobject rooted at the named class.
    Vptr(String),
    /// Pointer to the named virtual base subobject.
    VbasePtr(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub name: String,
}

#[derive(Clone, Debug)]
pub struct ClassLayout {
    pub name: String,
    /// Complete-object slots.
    pub slots: Vec<Slot>,
    pub nv_size: u32,
    pub primary: Option<String>,
    pub own_vptr: bool,
    /// Direct non-virtual bases and their offsets in the non-virtual part.
    pub nv_bases: BTreeMap<String, u32>,
    /// Direct virtual bases and the offsets of their pointer slots.
    pub vbase_ptrs: BTreeMap<String, u32>,
    /// Own fields.
    pub fields: BTreeMap<String, u32>,
    /// Virtual bases of the complete object, in layout order.
    pub vbases: Vec<(String, u32)>,
}

impl ClassLayout {
    pub fn size(&self) -> u32 {
        self.slots.len() as u32
    }

    pub fn vbase_offset(&self, v: &str) -> Option<u32> {
        self.vbases.iter().find(|(n, _)| n == v).map(|(_, o)| *o)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Layouts {
    pub classes: BTreeMap<String, ClassLayout>,
}

pub fn slot_kind(t: &Type) -> SlotKind {
    match t {
        Type::Bool => SlotKind::Bool,
        Type::Pointer(_) | Type::Null => SlotKind::Ptr,
        _ => SlotKind::Int,
    }
}

impl Layouts {
    pub fn compute(syms: &SymbolTable) -> Result<Layouts, Diagnostic> {
        let mut l = Layouts::default();
        for c in &syms.class_order {
            l.check_hierarchy(syms, c)?;
            let cl = l.build(syms, c);
            l.classes.insert(c.clone(), cl);
        }
        Ok(l)
    }

    pub fn class(&self, c: &str) -> &ClassLayout {
        self.classes
            .get(c)
            .unwrap_or_else(|| panic!("no layout for `{c}`"))
    }

    pub fn size_of(&self, t: &Type) -> u32 {
        match t {
            Type::Class(c) => self.class(c).size(),
            Type::Array(e, n) => self.size_of(e) * n,
            _ => 1,
        }
    }

    /// Appends the slots of a complete object of type `t`.
    fn push_object(&self, t: &Type, prefix: &str, out: &mut Vec<Slot>) {
        match t {
            Type::Class(c) => {
                for s in &self.class(c).slots {
                    out.push(Slot {
                        kind: s.kind.clone(),
                        name: format!("{prefix}.{}", s.name),
                    });
                }
            }
            Type::Array(e, n) => {
                for i in 0..*n {
                    self.push_object(e, &format!("{prefix}[{i}]"), out);
                }
            }
            t => out.push(Slot {
                kind: slot_kind(t),
                name: prefix.to_string(),
            }),
        }
    }

    fn build(&self, syms: &SymbolTable, c: &str) -> ClassLayout {
        let info = syms.class(c);
        let dynamic = syms.is_dynamic(c);
        let primary = info
            .bases
            .iter()
            .find(|b| !b.is_virtual && syms.is_dynamic(&b.name))
            .map(|b| b.name.clone());
        let mut slots = Vec::new();
        let own_vptr = dynamic && primary.is_none();
        if own_vptr {
            slots.push(Slot {
                kind: SlotKind::Vptr(c.to_string()),
                name: format!("{c}@vptr"),
            });
        }
        let mut nv_bases = BTreeMap::new();
        let mut order: Vec<&str> = primary.iter().map(|s| s.as_str()).collect();
        for b in &info.bases {
            if !b.is_virtual && Some(&b.name) != primary.as_ref() {
                order.push(&b.name);
            }
        }
        for b in order {
            nv_bases.insert(b.to_string(), slots.len() as u32);
            let bl = self.class(b);
            slots.extend(bl.slots[..bl.nv_size as usize].iter().cloned());
        }
        let mut vbase_ptrs = BTreeMap::new();
        for b in info.bases.iter().filter(|b| b.is_virtual) {
            vbase_ptrs.insert(b.name.clone(), slots.len() as u32);
            slots.push(Slot {
                kind: SlotKind::VbasePtr(b.name.clone()),
                name: format!("{}@vbase", b.name),
            });
        }
        let mut fields = BTreeMap::new();
        for f in &info.fields {
            fields.insert(f.name.clone(), slots.len() as u32);
            self.push_object(&f.ty, &format!("{c}::{}", f.name), &mut slots);
        }
        let nv_size = slots.len() as u32;
        let mut vbases = Vec::new();
        for v in virtual_bases(syms, c) {
            vbases.push((v.clone(), slots.len() as u32));
            let vl = self.class(&v);
            slots.extend(vl.slots[..vl.nv_size as usize].iter().cloned());
        }
        ClassLayout {
            name: c.to_string(),
            slots,
            nv_size,
            primary,
            own_vptr,
            nv_bases,
            vbase_ptrs,
            fields,
            vbases,
        }
    }

    fn check_hierarchy(&self, syms: &SymbolTable, c: &str) -> Result<(), Diagnostic> {
        let vbases = virtual_bases(syms, c);
        let mut nv = Vec::new();
        nv_subobjects(syms, c, &mut nv);
        for v in &vbases {
            nv_subobjects(syms, v, &mut nv);
        }
        let loc = syms.class(c).loc.clone();
        for v in &vbases {
            if nv.contains(v) {
                return Err(Diagnostic::error(
                    loc,
                    format!("crossed diamond hierarchy unsupported: `{v}` is both a virtual and a non-virtual base of `{c}`"),
                ));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &nv {
            if !seen.insert(b) {
                return Err(Diagnostic::error(
                    loc,
                    format!("repeated non-virtual base `{b}` in `{c}` unsupported"),
                ));
            }
        }
        Ok(())
    }

    /// Offset of the `base` subobject within a complete `class` object.
    pub fn subobject_offset(&self, class: &str, base: &str) -> Option<u32> {
        if class == base {
            return Some(0);
        }
        let l = self.class(class);
        if let Some(o) = l.vbase_offset(base) {
            return Some(o);
        }
        if let Some(o) = self.nv_offset(class, base) {
            return Some(o);
        }
        l.vbases
            .iter()
            .find_map(|(v, vo)| self.nv_offset(v, base).map(|o| vo + o))
    }

    /// Offset of `base` within the non-virtual part of `class`.
    pub fn nv_offset(&self, class: &str, base: &str) -> Option<u32> {
        if class == base {
            return Some(0);
        }
        let l = self.class(class);
        l.nv_bases
            .iter()
            .find_map(|(b, bo)| self.nv_offset(b, base).map(|o| bo + o))
    }

    /// Vptr slots of a complete object: `(root, offset)`.
    pub fn vptrs(&self, class: &str) -> Vec<(String, u32)> {
        self.class(class)
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match &s.kind {
                SlotKind::Vptr(r) => Some((r.clone(), i as u32)),
                _ => None,
            })
            .collect()
    }

    /// Vptr slots in the non-virtual part of `class`.
    pub fn nv_vptrs(&self, class: &str) -> Vec<(String, u32)> {
        let nv = self.class(class).nv_size;
        self.vptrs(class).into_iter().filter(|(_, o)| *o < nv).collect()
    }

    /// Class whose vptr sits at offset 0 of a `class` subobject.
    pub fn root(&self, class: &str) -> Option<String> {
        let l = self.class(class);
        if l.own_vptr {
            Some(class.to_string())
        } else {
            l.primary.as_ref().and_then(|p| self.root(p))
        }
    }
}

/// Virtual bases of `class`, each once, in depth-first declaration order.
pub fn virtual_bases(syms: &SymbolTable, class: &str) -> Vec<String> {
    let mut out = Vec::new();
    collect_vbases(syms, class, &mut out);
    out
}

fn collect_vbases(syms: &SymbolTable, class: &str, out: &mut Vec<String>) {
    for b in &syms.class(class).bases {
        collect_vbases(syms, &b.name, out);
        if b.is_virtual && !out.contains(&b.name) {
            out.push(b.name.clone());
        }
    }
}

fn nv_subobjects(syms: &SymbolTable, class: &str, out: &mut Vec<String>) {
    for b in &syms.class(class).bases {
        if !b.is_virtual {
            out.push(b.name.clone());
            nv_subobjects(syms, &b.name, out);
        }
    }
}
