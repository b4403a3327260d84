//! Random class hierarchies with an independent model of their layout and
//! dispatch.

use std::collections::BTreeSet;
use std::fmt::Write;

use proptest::prelude::*;

/// Classes `K0..Kn`; bases always have smaller indices.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub classes: Vec<ClassSpec>,
}

#[derive(Clone, Debug)]
pub struct ClassSpec {
    /// `(base index, virtual)`, distinct bases.
    pub bases: Vec<(usize, bool)>,
    /// Virtual methods `m{id}()` declared here.
    pub methods: Vec<usize>,
}

pub const METHODS: usize = 3;

pub fn strategy(max_classes: usize) -> impl Strategy<Value = Hierarchy> {
    let class = (
        prop::collection::vec((0usize..64, any::<bool>()), 0..3),
        prop::collection::btree_set(0..METHODS, 0..3),
    );
    prop::collection::vec(class, 1..=max_classes).prop_map(|raw| {
        let classes = raw
            .into_iter()
            .enumerate()
            .map(|(i, (bases, methods))| {
                let mut seen = BTreeSet::new();
                let bases = if i == 0 {
                    vec![]
                } else {
                    bases
                        .into_iter()
                        .map(|(b, v)| (b % i, v))
                        .filter(|(b, _)| seen.insert(*b))
                        .collect()
                };
                ClassSpec {
                    bases,
                    methods: methods.into_iter().collect(),
                }
            })
            .collect();
        Hierarchy { classes }
    })
}

/// Value returned by `K{class}::m{method}`.
pub fn ret(class: usize, method: usize) -> i64 {
    100 * class as i64 + method as i64 + 1
}

impl Hierarchy {
    pub fn derives(&self, d: usize, b: usize) -> bool {
        d == b || self.classes[d].bases.iter().any(|&(x, _)| self.derives(x, b))
    }

    pub fn dynamic(&self, c: usize) -> bool {
        !self.classes[c].methods.is_empty() || self.classes[c].bases.iter().any(|&(b, _)| self.dynamic(b))
    }

    /// Gets a vptr of its own: dynamic with no dynamic non-virtual base.
    pub fn own_vptr(&self, c: usize) -> bool {
        self.dynamic(c) && !self.classes[c].bases.iter().any(|&(b, v)| !v && self.dynamic(b))
    }

    /// Base subobjects reached through non-virtual edges only, with repeats.
    fn nv_subobjects(&self, c: usize, out: &mut Vec<usize>) {
        for &(b, v) in &self.classes[c].bases {
            if !v {
                out.push(b);
                self.nv_subobjects(b, out);
            }
        }
    }

    /// Distinct virtual bases anywhere below `c`.
    pub fn virtual_bases(&self, c: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &(b, v) in &self.classes[c].bases {
            if v {
                out.insert(b);
            }
            out.extend(self.virtual_bases(b));
        }
        out
    }

    /// Vptr slots in a complete object of `c`.
    pub fn vptr_count(&self, c: usize) -> usize {
        let mut subs = vec![c];
        self.nv_subobjects(c, &mut subs);
        for v in self.virtual_bases(c) {
            subs.push(v);
            self.nv_subobjects(v, &mut subs);
        }
        subs.into_iter().filter(|&s| self.own_vptr(s)).count()
    }

    /// A base that is both virtual and non-virtual, or a repeated
    /// non-virtual base.
    pub fn unsupported_shape(&self, c: usize) -> bool {
        let vbases = self.virtual_bases(c);
        let mut nv = Vec::new();
        self.nv_subobjects(c, &mut nv);
        for &v in &vbases {
            self.nv_subobjects(v, &mut nv);
        }
        let distinct: BTreeSet<usize> = nv.iter().copied().collect();
        distinct.len() != nv.len() || vbases.iter().any(|v| distinct.contains(v))
    }

    fn declares(&self, c: usize, m: usize) -> bool {
        self.classes[c].methods.contains(&m)
    }

    /// Classes that introduce `m`: declare it with no base declaring it.
    pub fn introducers(&self, m: usize) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&c| self.declares(c, m) && !(0..c).any(|b| self.derives(c, b) && b != c && self.declares(b, m)))
            .collect()
    }

    /// Final overrider in a complete `d` of slot `m` introduced by `t`:
    /// the unique most-derived declaring class between `t` and `d`.
    pub fn final_overrider(&self, d: usize, t: usize, m: usize) -> Option<usize> {
        let cands: Vec<usize> = (0..=d)
            .filter(|&c| self.derives(d, c) && self.derives(c, t) && self.declares(c, m))
            .collect();
        let maximal: Vec<usize> = cands
            .iter()
            .copied()
            .filter(|&c| !cands.iter().any(|&o| o != c && self.derives(o, c)))
            .collect();
        match maximal.as_slice() {
            [one] => Some(*one),
            _ => None,
        }
    }

    /// Whether the checker should accept the program.
    pub fn supported(&self) -> bool {
        (0..self.classes.len()).all(|d| {
            !self.unsupported_shape(d)
                && (0..METHODS).all(|m| {
                    self.introducers(m)
                        .into_iter()
                        .filter(|&t| self.derives(d, t))
                        .all(|t| self.final_overrider(d, t, m).is_some())
                })
        })
    }

    /// Class definitions plus a `main` that calls every method through
    /// every declaring base of every class and asserts the overrider's
    /// result.
    pub fn source(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.classes.iter().enumerate() {
            write!(s, "struct K{i}").unwrap();
            for (j, &(b, v)) in c.bases.iter().enumerate() {
                let sep = if j == 0 { " : " } else { ", " };
                let virt = if v { "virtual " } else { "" };
                write!(s, "{sep}public {virt}K{b}").unwrap();
            }
            writeln!(s, " {{").unwrap();
            writeln!(s, "  int f{i};").unwrap();
            for &m in &c.methods {
                writeln!(s, "  virtual int m{m}() {{ return {}; }}", ret(i, m)).unwrap();
            }
            writeln!(s, "}};").unwrap();
        }
        s.push_str("int main() {\n");
        for d in 0..self.classes.len() {
            writeln!(s, "  K{d} o{d};").unwrap();
            for b in 0..=d {
                if !self.derives(d, b) {
                    continue;
                }
                for &m in &self.classes[b].methods {
                    if let Some(f) = self.final_overrider(d, b, m) {
                        writeln!(s, "  {{ K{b} *p = &o{d}; assert(p->m{m}() == {}); }}", ret(f, m)).unwrap();
                    }
                }
            }
        }
        s.push_str("  return 0;\n}\n");
        s
    }
}
