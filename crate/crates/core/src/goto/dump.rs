//! Text form of GOTO programs for `--show-goto-functions`.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::ir::*;

pub fn function_text(p: &GotoProgram, f: &GFunction) -> String {
    let printer = Printer { compact: false };
    let targets: BTreeSet<usize> = f
        .body
        .iter()
        .filter_map(|i| match &i.instr {
            Instr::Goto { target, .. } => Some(*target),
            _ => None,
        })
        .collect();
    let mut out = format!("{}:\n", f.name);
    for (pc, inst) in f.body.iter().enumerate() {
        if targets.contains(&pc) {
            writeln!(out, "{pc}:").unwrap();
        }
        writeln!(out, "  {}", printer.instr(f, &inst.instr, Some(p))).unwrap();
    }
    out
}

pub fn program_text(p: &GotoProgram) -> String {
    let mut out = String::new();
    for (name, entries) in &p.vtables {
        let items: Vec<&str> = entries
            .iter()
            .map(|id| p.fn_by_id(*id).unwrap_or("<pure virtual>"))
            .collect();
        writeln!(out, "vtable {name} = {{ {} }}", items.join(", ")).unwrap();
    }
    if !p.vtables.is_empty() {
        out.push('\n');
    }
    for f in p.functions.values() {
        out.push_str(&function_text(p, f));
        out.push('\n');
    }
    out
}
