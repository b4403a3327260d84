pub mod exec;
pub mod interp;
pub mod system;

pub use exec::{symex, SymexConfig, SymexError};
pub use system::*;
