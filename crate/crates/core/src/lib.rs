//! Synthesis of ground terms from equational specifications: a tree-automata
//! solver for the regular fragment, a finite-domain enumeration solver, a
//! bounded fallback, and generators for reductions into the input format.

pub mod automata;
pub mod congruence;
pub mod error;
pub mod fd;
pub mod formula;
pub mod parser;
pub mod problem;
pub mod reductions;
pub mod regular;
pub mod term;

pub use error::{Error, Result};
