//! Lattice-point counting on trivalent graph polytopes, Hilbert functions of
//! the associated graded algebras and Gorenstein classification.

pub mod decimal;
pub mod error;
pub mod gorenstein;
pub mod graph;
pub mod hilbert;
pub mod polytope;
pub mod symmetry;

pub use error::{Error, Result};
