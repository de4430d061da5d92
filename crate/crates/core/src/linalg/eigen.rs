//! Hermitian eigensolver (cyclic complex Jacobi) and the spectral
//! decompositions built on it.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matrix::{CMatrix, ONE, ZERO};
use super::Tolerance;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// `H = Σ λ_i P_i` with distinct eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<CMatrix>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.projectors[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n), |acc, (&l, p)| &acc + &p.scale_real(l))
    }
}

/// Unitary eigenbasis of a Hermitian matrix. `vectors` holds the
/// eigenvectors as columns, in the order of `values` (ascending).
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn off_diagonal_norm(h: &CMatrix) -> f64 {
    let n = h.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += h[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn check_hermitian(h: &CMatrix, tol: &Tolerance) -> Result<f64> {
    let norm = h.frobenius_norm();
    let residual = h.hermitian_residual();
    if residual >= tol.eps * (1.0 + norm) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(norm)
}

/// Cyclic Jacobi over complex Givens rotations. The input is assumed
/// Hermitian; only its Hermitian part is meaningful.
pub fn jacobi_eigen(h: &CMatrix) -> Result<EigenBasis> {
    let n = h.dim();
    let norm = h.frobenius_norm();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let target = OFF_DIAGONAL_TOL * (1.0 + norm);

    let mut converged = off_diagonal_norm(&a) < target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) < target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let columns: Vec<Vec<Complex64>> = order.iter().map(|&i| v.column(i)).collect();
    Ok(EigenBasis {
        values,
        vectors: CMatrix::from_columns(&columns),
    })
}

// Zeroes a[p][q] with U = diag(1, e^{-iφ}) · R(θ), where φ is the phase of
// a[p][q] and R is the real Jacobi rotation of the resulting symmetric block.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let conj_phase = phase.conj();
    let u00 = Complex64::new(c, 0.0);
    let u01 = Complex64::new(s, 0.0);
    let u10 = conj_phase * (-s);
    let u11 = conj_phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u00 + akq * u10;
        a[(k, q)] = akp * u01 + akq * u11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
        a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u00 + vkq * u10;
        v[(k, q)] = vkp * u01 + vkq * u11;
    }
}

/// Splits ascending `values` into runs whose consecutive gaps are below `gap`.
fn group_sorted(values: &[f64], gap: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] >= gap {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

fn projector_from(vectors: &[Vec<Complex64>], n: usize) -> CMatrix {
    vectors
        .iter()
        .fold(CMatrix::zeros(n), |acc, v| &acc + &CMatrix::outer(v, v))
}

pub fn hermitian_eigendecomposition(h: &CMatrix, tol: &Tolerance) -> Result<SpectralDecomposition> {
    let norm = check_hermitian(h, tol)?;
    let basis = jacobi_eigen(h)?;
    let n = h.dim();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    for range in group_sorted(&basis.values, tol.eigengap * (1.0 + norm)) {
        let vals = &basis.values[range.clone()];
        eigenvalues.push(vals.iter().sum::<f64>() / vals.len() as f64);
        let vecs: Vec<_> = range.map(|k| basis.vectors.column(k)).collect();
        projectors.push(projector_from(&vecs, n));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Orthonormal basis of the range of a projector (eigenvalue-1 eigenvectors).
pub fn projector_range_basis(p: &CMatrix) -> Result<Vec<Vec<Complex64>>> {
    let basis = jacobi_eigen(p)?;
    Ok(basis
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.5)
        .map(|(k, _)| basis.vectors.column(k))
        .collect())
}

/// Joint-eigenspace projectors of a commuting Hermitian family.
///
/// The first member is diagonalized; each later member is then compressed
/// into every current block (`B† A B` on an orthonormal block basis `B`),
/// diagonalized there, and the block is split along its eigenspaces.
pub fn simultaneous_diagonalization(family: &[CMatrix], tol: &Tolerance) -> Result<Vec<CMatrix>> {
    let first = family.first().ok_or(Error::EmptyFamily)?;
    let n = first.dim();
    let mut norms = Vec::with_capacity(family.len());
    for a in family {
        if a.dim() != n {
            return Err(Error::DimMismatch {
                expected: n,
                actual: a.dim(),
            });
        }
        norms.push(check_hermitian(a, tol)?);
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let residual = family[i].commutator(&family[j])?.frobenius_norm();
            if residual >= tol.eps * (1.0 + norms[i] * norms[j]) {
                return Err(Error::NotCommuting {
                    left: i,
                    right: j,
                    residual,
                });
            }
        }
    }

    let mut blocks: Vec<Vec<Vec<Complex64>>> = vec![(0..n)
        .map(|k| {
            let mut e = vec![ZERO; n];
            e[k] = ONE;
            e
        })
        .collect()];
    for (a, &norm) in family.iter().zip(&norms) {
        let mut next = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let k = block.len();
            let images: Vec<Vec<Complex64>> = block.iter().map(|b| a.mul_vec(b)).collect();
            let mut compressed = CMatrix::zeros(k);
            for r in 0..k {
                for c in 0..k {
                    compressed[(r, c)] = super::matrix::inner(&block[r], &images[c]);
                }
            }
            let eig = jacobi_eigen(&compressed)?;
            for range in group_sorted(&eig.values, tol.eigengap * (1.0 + norm)) {
                let sub: Vec<Vec<Complex64>> = range
                    .map(|col| {
                        let w = eig.vectors.column(col);
                        (0..n)
                            .map(|row| (0..k).map(|m| block[m][row] * w[m]).sum())
                            .collect()
                    })
                    .collect();
                next.push(sub);
            }
        }
        blocks = next;
    }
    Ok(blocks.iter().map(|b| projector_from(b, n)).collect())
}
