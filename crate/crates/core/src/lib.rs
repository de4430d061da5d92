//! Finite-dimensional contextual quantum structures.
//!
//! Contexts of `M_n(ℂ)` are represented by complete orthogonal projector
//! systems. They are ordered by inclusion into finite posets whose spectra
//! are linked by coarse-graining maps. On top of that sit finite valuations,
//! Born tables `Tr(C_i D_j)` between pairs of contexts, and a search for
//! global sections that exhibits the Kochen–Specker obstruction.

pub mod born;
pub mod context;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod projectors;
pub mod qubit;
pub mod sections;
pub mod valuation;

pub use error::{Error, Result};
