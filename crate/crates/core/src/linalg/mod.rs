//! Dense complex matrices and Hermitian spectral tools.

mod eigen;
mod matrix;

pub use eigen::{
    hermitian_eigendecomposition, jacobi_eigen, projector_range_basis,
    simultaneous_diagonalization, EigenBasis, SpectralDecomposition,
};
pub use matrix::{inner, pauli_x, pauli_y, pauli_z, CMatrix, I, ONE, ZERO};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every check in the crate.
///
/// `eps` bounds Frobenius residuals; `eigengap` is the relative gap below
/// which eigenvalues are merged into a single eigenspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
    pub eigengap: f64,
}

impl Tolerance {
    pub fn new(eps: f64, eigengap: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(eps) || !ok(eigengap) {
            return Err(Error::InvalidTolerance);
        }
        Ok(Self { eps, eigengap })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: 1e-9,
            eigengap: 1e-8,
        }
    }
}
