pub mod layout;
pub mod vtable;

use std::fmt::Write;

pub use layout::{ClassLayout, Layouts, Slot, SlotKind};
pub use vtable::{Thunk, VTable, VTables};

use crate::diag::Diagnostic;
use crate::sema::symbols::SymbolTable;

#[derive(Clone, Debug)]
pub struct ObjectModel {
    pub layouts: Layouts,
    pub vtables: VTables,
}

impl ObjectModel {
    pub fn build(syms: &SymbolTable) -> Result<ObjectModel, Diagnostic> {
        let layouts = Layouts::compute(syms)?;
        let vtables = VTables::compute(syms, &layouts)?;
        Ok(ObjectModel { layouts, vtables })
    }

    /// Text for `--show-layouts`.
    pub fn render(&self, syms: &SymbolTable) -> String {
        let mut out = String::new();
        for c in &syms.class_order {
            let l = self.layouts.class(c);
            writeln!(out, "class {c} (size {}, non-virtual size {})", l.size(), l.nv_size).unwrap();
            for (i, s) in l.slots.iter().enumerate() {
                writeln!(out, "  [{i}] {}", s.name).unwrap();
            }
            for t in self.vtables.tables.iter().filter(|t| t.class == *c) {
                for (i, e) in t.entries.iter().enumerate() {
                    let target = e.target.as_deref().unwrap_or("<pure virtual>");
                    writeln!(out, "{}[{i}] = {target}", t.name).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}
