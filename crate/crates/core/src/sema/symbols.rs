use std::collections::{BTreeMap, BTreeSet};

use super::types::Type;
use crate::frontend::ast::SourceLoc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnKind {
    Free,
    Method,
    Ctor,
    Dtor,
}

/// Members generated for classes that do not declare them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synth {
    DefaultCtor,
    CopyCtor,
    Dtor,
}

#[derive(Clone, Debug)]
pub struct FunctionInfo {
    pub mangled: String,
    /// Unqualified name: `doit`, `Bird`, `~Bird`, `foo`.
    pub name: String,
    /// Name used in reports: `Bird::doit`, `foo<5678>`, `main`.
    pub display: String,
    pub class: Option<String>,
    pub kind: FnKind,
    /// Parameter types, without the implicit `this`.
    pub params: Vec<Type>,
    pub ret: Type,
    pub is_virtual: bool,
    pub is_pure: bool,
    pub synthesized: Option<Synth>,
    pub has_body: bool,
    /// Base-class methods this one overrides.
    pub overrides: Vec<String>,
    /// Set for template instances and explicit specializations.
    pub from_template: bool,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug)]
pub struct BaseInfo {
    pub name: String,
    pub is_virtual: bool,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug)]
pub struct FieldInfo {
    pub name: String,
    pub ty: Type,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: String,
    pub bases: Vec<BaseInfo>,
    pub fields: Vec<FieldInfo>,
    /// Mangled names of methods, constructors and destructor.
    pub methods: Vec<String>,
    pub typedefs: BTreeMap<String, Type>,
    pub complete: bool,
    pub is_abstract: bool,
    pub from_template: bool,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug)]
pub struct GlobalInfo {
    pub name: String,
    pub ty: Type,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub classes: BTreeMap<String, ClassInfo>,
    /// Classes in the order their definitions were completed.
    pub class_order: Vec<String>,
    pub functions: BTreeMap<String, FunctionInfo>,
    pub globals: BTreeMap<String, GlobalInfo>,
}

impl SymbolTable {
    pub fn class(&self, name: &str) -> &ClassInfo {
        self.classes
            .get(name)
            .unwrap_or_else(|| panic!("unknown class `{name}`"))
    }

    pub fn function(&self, mangled: &str) -> &FunctionInfo {
        self.functions
            .get(mangled)
            .unwrap_or_else(|| panic!("unknown function `{mangled}`"))
    }

    /// True when `derived` is `base` or inherits from it.
    pub fn derives_from(&self, derived: &str, base: &str) -> bool {
        if derived == base {
            return true;
        }
        match self.classes.get(derived) {
            Some(c) => c.bases.iter().any(|b| self.derives_from(&b.name, base)),
            None => false,
        }
    }

    /// All proper base classes, depth-first in declaration order, each once.
    pub fn all_bases(&self, class: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_bases(class, &mut out, &mut seen);
        out
    }

    fn collect_bases(&self, class: &str, out: &mut Vec<String>, seen: &mut BTreeSet<String>) {
        if let Some(c) = self.classes.get(class) {
            for b in &c.bases {
                if seen.insert(b.name.clone()) {
                    out.push(b.name.clone());
                }
                self.collect_bases(&b.name, out, seen);
            }
        }
    }

    /// A path of direct-base edges from `from` to `to`, each edge being
    /// `(class, base, is_virtual)`.
    pub fn base_path(&self, from: &str, to: &str) -> Option<Vec<(String, String, bool)>> {
        if from == to {
            return Some(vec![]);
        }
        let c = self.classes.get(from)?;
        for b in &c.bases {
            if let Some(mut rest) = self.base_path(&b.name, to) {
                rest.insert(0, (from.to_string(), b.name.clone(), b.is_virtual));
                return Some(rest);
            }
        }
        None
    }

    /// Methods of `class` itself named `name`.
    pub fn methods_named<'a>(&'a self, class: &str, name: &'a str) -> Vec<&'a FunctionInfo> {
        self.class(class)
            .methods
            .iter()
            .map(|m| self.function(m))
            .filter(|f| f.name == name)
            .collect()
    }

    pub fn ctors(&self, class: &str) -> Vec<&FunctionInfo> {
        self.class(class)
            .methods
            .iter()
            .map(|m| self.function(m))
            .filter(|f| f.kind == FnKind::Ctor)
            .collect()
    }

    pub fn dtor(&self, class: &str) -> Option<&FunctionInfo> {
        self.class(class)
            .methods
            .iter()
            .map(|m| self.function(m))
            .find(|f| f.kind == FnKind::Dtor)
    }

    pub fn default_ctor(&self, class: &str) -> Option<&FunctionInfo> {
        self.ctors(class).into_iter().find(|f| f.params.is_empty())
    }

    pub fn copy_ctor(&self, class: &str) -> Option<&FunctionInfo> {
        let want = Type::Reference(Box::new(Type::class(class)));
        self.ctors(class)
            .into_iter()
            .find(|f| f.params.len() == 1 && f.params[0] == want)
    }

    /// Virtual methods declared directly in `class`.
    pub fn virtual_methods(&self, class: &str) -> Vec<&FunctionInfo> {
        self.class(class)
            .methods
            .iter()
            .map(|m| self.function(m))
            .filter(|f| f.is_virtual)
            .collect()
    }

    /// Whether objects of `class` need a virtual table.
    pub fn is_dynamic(&self, class: &str) -> bool {
        !self.virtual_methods(class).is_empty()
            || self.class(class).bases.iter().any(|b| self.is_dynamic(&b.name))
    }
}

/// Identity of an overridable method: name plus parameter types.
/// Destructors share one signature.
pub fn signature_key(f: &FunctionInfo) -> (String, Vec<Type>) {
    if f.kind == FnKind::Dtor {
        ("~".to_string(), vec![])
    } else {
        (f.name.clone(), f.params.clone())
    }
}
