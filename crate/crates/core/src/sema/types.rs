use std::fmt;

/// Semantic type after typedef expansion and template instantiation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Void,
    /// Type of `nullptr`/`NULL`, convertible to every pointer.
    Null,
    Class(String),
    Pointer(Box<Type>),
    Array(Box<Type>, u32),
    Reference(Box<Type>),
}

impl Type {
    pub fn ptr(t: Type) -> Type {
        Type::Pointer(Box::new(t))
    }

    pub fn class(name: impl Into<String>) -> Type {
        Type::Class(name.into())
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Type::Int | Type::Bool | Type::Pointer(_) | Type::Null)
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, Type::Pointer(_) | Type::Null)
    }

    /// Usable as a condition: `if`, `assert`, `!`, `&&`, `||`.
    pub fn is_testable(&self) -> bool {
        matches!(self, Type::Int | Type::Bool | Type::Pointer(_) | Type::Null)
    }

    pub fn pointee(&self) -> Option<&Type> {
        match self {
            Type::Pointer(t) => Some(t),
            _ => None,
        }
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Class(n) => Some(n),
            _ => None,
        }
    }

    /// Class named by `T` or `T*`.
    pub fn class_or_pointee_class(&self) -> Option<&str> {
        match self {
            Type::Class(n) => Some(n),
            Type::Pointer(t) => t.class_name(),
            _ => None,
        }
    }

    /// Strips one reference layer.
    pub fn deref_ref(&self) -> &Type {
        match self {
            Type::Reference(t) => t,
            t => t,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
            Type::Void => write!(f, "void"),
            Type::Null => write!(f, "nullptr_t"),
            Type::Class(n) => write!(f, "{n}"),
            Type::Pointer(t) => write!(f, "{t}*"),
            Type::Array(t, n) => write!(f, "{t}[{n}]"),
            Type::Reference(t) => write!(f, "{t}&"),
        }
    }
}

/// `name(T1,T2)` as used in mangled names.
pub fn mangle(name: &str, params: &[Type]) -> String {
    let ps: Vec<String> = params.iter().map(|t| t.to_string()).collect();
    format!("{name}({})", ps.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_mangle() {
        let t = Type::ptr(Type::class("Bird"));
        assert_eq!(t.to_string(), "Bird*");
        assert_eq!(
            Type::Array(Box::new(Type::ptr(Type::Int)), 3).to_string(),
            "int*[3]"
        );
        assert_eq!(mangle("Penguin::doit", &[Type::ptr(Type::class("Penguin"))]), "Penguin::doit(Penguin*)");
        assert_eq!(mangle("f", &[]), "f()");
    }
}
