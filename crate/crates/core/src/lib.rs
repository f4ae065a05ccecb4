pub mod classify;
pub mod cone;
pub mod error;
pub mod fan;
pub mod format;
pub mod lattice;
pub mod polytope;
pub mod primitive;
pub mod surgery;

pub use error::{Error, Result};
