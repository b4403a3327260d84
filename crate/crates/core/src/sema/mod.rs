pub mod check;
pub mod defaults;
pub mod symbols;
pub mod templates;
pub mod types;

pub use check::{typecheck, Program};
pub use defaults::synthesize_defaults;
pub use templates::monomorphize;
