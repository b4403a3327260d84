pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use parser::parse_source;
pub use pretty::pretty_print;
