//! The equation system produced by symbolic execution.

use std::collections::HashSet;
use std::fmt::Write;

use cxxbmc_solver::{Term, TermStore};

use crate::frontend::ast::SourceLoc;
use crate::goto::Sort;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqKind {
    /// Assignment to a register.
    Assign,
    /// Parameter binding at a call.
    Param,
    /// Merge of two paths.
    Phi,
    /// Write to memory; has no SSA symbol of its own.
    Store,
}

#[derive(Clone, Debug)]
pub struct Equation {
    pub kind: EqKind,
    pub sort: Sort,
    pub guard: Term,
    /// SSA symbol defined by the equation; `None` for memory writes.
    pub lhs: Option<Term>,
    /// `x#3` for registers, the written lvalue for stores.
    pub name: String,
    /// Source-level name of the assigned variable or lvalue.
    pub var: String,
    pub rhs: Term,
    pub loc: SourceLoc,
    pub function: String,
}

#[derive(Clone, Debug)]
pub struct PropInstance {
    /// Index into the GOTO program's properties.
    pub prop: usize,
    pub guard: Term,
    pub claim: Term,
}

#[derive(Clone, Debug)]
pub struct NondetInput {
    pub symbol: Term,
    pub guard: Term,
    pub loc: SourceLoc,
}

pub struct SsaSystem {
    pub store: TermStore,
    pub equations: Vec<Equation>,
    pub properties: Vec<PropInstance>,
    /// Nondeterministic choices in execution order.
    pub nondets: Vec<NondetInput>,
    pub int_width: u32,
}

impl SsaSystem {
    /// Equality constraints of all SSA definitions.
    pub fn constraints(&mut self) -> Vec<Term> {
        let defs: Vec<(Term, Term)> = self
            .equations
            .iter()
            .filter_map(|e| e.lhs.map(|l| (l, e.rhs)))
            .collect();
        defs.into_iter().map(|(l, r)| self.store.eq(l, r)).collect()
    }

    /// `guard -> claim` for every property instance.
    pub fn property_literals(&mut self) -> Vec<Term> {
        let pairs: Vec<(Term, Term)> = self.properties.iter().map(|p| (p.guard, p.claim)).collect();
        pairs.into_iter().map(|(g, c)| self.store.implies(g, c)).collect()
    }

    /// Checks that no SSA symbol is defined twice and that every symbol in a
    /// right-hand side is defined earlier or is a nondet input.
    pub fn check_single_assignment(&self) -> Result<(), String> {
        let mut defined: HashSet<Term> = self.nondets.iter().map(|n| n.symbol).collect();
        for e in &self.equations {
            for s in self.store.free_symbols(&[e.rhs, e.guard]) {
                if !defined.contains(&s) {
                    return Err(format!(
                        "`{}` uses `{}` before its definition",
                        e.name,
                        self.store.symbol_name(s).unwrap_or("?")
                    ));
                }
            }
            if let Some(l) = e.lhs {
                if !defined.insert(l) {
                    return Err(format!("`{}` is defined twice", e.name));
                }
            }
        }
        Ok(())
    }

    /// Human-readable listing of the equations and properties.
    pub fn render(&self) -> String {
        let names = std::collections::HashMap::new();
        let mut out = String::new();
        for e in &self.equations {
            let g = cxxbmc_solver::smtlib::print_term(&self.store, e.guard, &names);
            let r = cxxbmc_solver::smtlib::print_term(&self.store, e.rhs, &names);
            writeln!(out, "{} = {r}    [guard {g}]", e.name).unwrap();
        }
        for p in &self.properties {
            let g = cxxbmc_solver::smtlib::print_term(&self.store, p.guard, &names);
            let c = cxxbmc_solver::smtlib::print_term(&self.store, p.claim, &names);
            writeln!(out, "property {}: {g} => {c}", p.prop).unwrap();
        }
        out
    }
}
