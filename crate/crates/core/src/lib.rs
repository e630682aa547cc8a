//! Exact combinatorics of fine and saturated monoids, rational fans, log
//! blow-ups and toric flattening.
//!
//! Monoids live inside integer lattices and are given by generators. Cones
//! live in the dual lattice. Everything is computed with arbitrary-precision
//! integers and rationals, so results are exact and reproducible.

pub mod blowup;
pub mod error;
pub mod flatten;
pub mod homs;
pub mod ideals;
pub mod json;
pub mod lattice;
pub mod lp;
pub mod monoids;
pub mod polyhedra;
pub mod pool;
pub mod svg;

pub use error::{Error, Result};
