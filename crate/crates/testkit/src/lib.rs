pub mod corpus;
pub mod dispatch;
pub mod exhaustive;
pub mod gen;
pub mod hierarchy;
pub mod oracle;
pub mod suite;
