pub mod diag;
pub mod frontend;
pub mod goto;
pub mod object_model;
pub mod pipeline;
pub mod sema;
pub mod symex;
pub mod verify;
