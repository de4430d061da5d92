//! The two-dimensional case: trace-one projectors on ℂ² are points of the
//! Bloch sphere, `P_a = (I + a·σ)/2`, and a nontrivial qubit context is
//! `{P_a, P_{-a}}`, so antipodal vectors give the same context.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, CMatrix, Tolerance};
use crate::projectors::ProjectorSystem;

const UNIT_TOL: f64 = 1e-12;
const LENIENT_UNIT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    /// Requires `|a|² = 1` within 1e-12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm_sqr = x * x + y * y + z * z;
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(norm_sqr.sqrt()));
        }
        Ok(Self { x, y, z })
    }

    /// Accepts vectors within 1e-6 of unit length and rescales them.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > LENIENT_UNIT_TOL {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn antipode(&self) -> BlochVector {
        BlochVector {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// `a·σ`, a self-adjoint unitary with eigenvalues ±1.
    pub fn observable(&self) -> CMatrix {
        let sx = pauli_x().scale_real(self.x);
        let sy = pauli_y().scale_real(self.y);
        let sz = pauli_z().scale_real(self.z);
        &(&sx + &sy) + &sz
    }
}

pub fn bloch_to_projector(a: &BlochVector) -> CMatrix {
    (&CMatrix::identity(2) + &a.observable()).scale_real(0.5)
}

/// Inverse of [`bloch_to_projector`]: `a_k = Re Tr(P σ_k)`.
pub fn projector_to_bloch(p: &CMatrix, tol: &Tolerance) -> Result<BlochVector> {
    if p.dim() != 2
        || !p.is_projector(tol)
        || (p.trace() - Complex64::new(1.0, 0.0)).norm() >= tol.eps
    {
        return Err(Error::NotTraceOneProjector);
    }
    let comp = |s: CMatrix| (p * &s).trace().re;
    BlochVector::normalized(comp(pauli_x()), comp(pauli_y()), comp(pauli_z()))
}

/// The context `{P_a, P_{-a}}`, canonicalized.
pub fn qubit_context(a: &BlochVector) -> Context {
    let system = ProjectorSystem::validate(
        vec![bloch_to_projector(a), bloch_to_projector(&a.antipode())],
        &Tolerance::default(),
    )
    .expect("P_a and P_-a form a projector system");
    Context::from_system(&system)
}

/// `(1 + s·t·(a·b))/2`, with the signs `s`, `t` read off the canonical
/// order of each context (`+` where the canonical projector is `P_a`).
pub fn qubit_born_closed_form(a: &BlochVector, b: &BlochVector) -> [[f64; 2]; 2] {
    let signs = |v: &BlochVector| -> [f64; 2] {
        let ctx = qubit_context(v);
        let pv = bloch_to_projector(v);
        let first_is_pv =
            ctx.system.projectors()[0].distance(&pv) < ctx.system.projectors()[1].distance(&pv);
        if first_is_pv {
            [1.0, -1.0]
        } else {
            [-1.0, 1.0]
        }
    };
    let (s, t) = (signs(a), signs(b));
    let ab = a.dot(b);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (1.0 + s[i] * t[j] * ab) / 2.0;
        }
    }
    out
}
