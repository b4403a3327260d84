pub mod dump;
pub mod ir;
pub mod lower;

pub use ir::*;
pub use lower::{lower, CheckOptions};
