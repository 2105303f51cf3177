//! Decorated planar binary trees, their dendriform algebra, and the
//! iterated-integral evaluation of Chen-Fliess type series over them.

pub mod dendriform;
pub mod error;
pub mod iterated_integrals;
pub mod operators;
pub mod signals;
pub mod tree;
pub mod verify;

pub use error::{Error, ParenCondition, Result};
