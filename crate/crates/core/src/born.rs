//! Born tables `β_{CD}(i, j) = Tr(C_i D_j)` between pairs of contexts, their
//! behavior under refinement, and the state-level probabilities they reduce to.

use num_complex::Complex64;
use serde::Serialize;

use crate::context::{Context, ContextPoset};
use crate::error::{Error, Result};
use crate::linalg::{projector_range_basis, CMatrix, Tolerance};
use crate::projectors::Refinement;
use crate::valuation::{FiniteValuation, ProbabilityValuation};

pub const MARGINAL_TOL: f64 = 1e-9;
pub const COHERENCE_TOL: f64 = 1e-8;
pub const RANK_ONE_TOL: f64 = 1e-10;
pub const RANK_K_TOL: f64 = 1e-9;
pub const SECTION_TOL: f64 = 1e-10;
const NEGATIVE_CLAMP: f64 = -1e-12;

/// Unnormalized valuation on `Spec(C) × Spec(D)`; total mass is `n`.
#[derive(Clone, Debug)]
pub struct BornTable {
    pub left: Context,
    pub right: Context,
    rows: Vec<Vec<f64>>,
}

impl BornTable {
    pub fn new(left: &Context, right: &Context) -> Result<Self> {
        let n = left.dim();
        if right.dim() != n {
            return Err(Error::DimMismatch {
                expected: n,
                actual: right.dim(),
            });
        }
        let mut rows = Vec::with_capacity(left.system.len());
        for (i, c) in left.system.projectors().iter().enumerate() {
            let mut row = Vec::with_capacity(right.system.len());
            for (j, d) in right.system.projectors().iter().enumerate() {
                let tr = (c * d).trace();
                if tr.im.abs() >= 1e-10 * n as f64 {
                    return Err(Error::ImaginaryResidue(tr.im));
                }
                if tr.re < NEGATIVE_CLAMP {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: tr.re,
                    });
                }
                row.push(tr.re.max(0.0));
            }
            rows.push(row);
        }
        Ok(Self {
            left: left.clone(),
            right: right.clone(),
            rows,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_marginals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        (0..self.right.system.len())
            .map(|j| self.rows.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().flatten().sum()
    }

    pub fn valuation(&self) -> FiniteValuation<(usize, usize)> {
        let pairs = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &w)| ((i, j), w)));
        FiniteValuation::from_pairs(pairs).expect("entries are clamped nonnegative")
    }

    /// Invariant violations: marginals against ranks, total against `n`,
    /// and entries against `min(μ_i, ν_j)`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mu = self.left.system.ranks();
        let nu = self.right.system.ranks();
        for (i, (m, &r)) in self.row_marginals().iter().zip(mu).enumerate() {
            if (m - r as f64).abs() > MARGINAL_TOL {
                out.push(format!("row marginal {} is {m}, expected {r}", i + 1));
            }
        }
        for (j, (m, &r)) in self.col_marginals().iter().zip(nu).enumerate() {
            if (m - r as f64).abs() > MARGINAL_TOL {
                out.push(format!("column marginal {} is {m}, expected {r}", j + 1));
            }
        }
        let n = self.left.dim() as f64;
        if (self.total() - n).abs() > MARGINAL_TOL {
            out.push(format!("total mass is {}, expected {n}", self.total()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let bound = mu[i].min(nu[j]) as f64;
                if v > bound + MARGINAL_TOL {
                    out.push(format!(
                        "entry ({}, {}) = {v} exceeds {bound}",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
        out
    }
}

/// Checks that pushing the fine table forward along `r × s` gives the
/// coarse table. `r` and `s` must coarsen the fine systems onto the coarse
/// ones.
pub fn coherence_check(
    fine: (&Context, &Context),
    coarse: (&Context, &Context),
    r: &Refinement,
    s: &Refinement,
    tol: &Tolerance,
) -> Result<bool> {
    for (f, c, w) in [(fine.0, coarse.0, r), (fine.1, coarse.1, s)] {
        let image = f.system.coarsen(w).map_err(|_| Error::NotComparable)?;
        if !image.approx_eq(&c.system, tol) {
            return Err(Error::NotComparable);
        }
    }
    let fine_table = BornTable::new(fine.0, fine.1)?;
    let coarse_table = BornTable::new(coarse.0, coarse.1)?;
    let pushed = fine_table
        .valuation()
        .pushforward(|&(i, j)| (r.map[i], s.map[j]));
    Ok(pushed
        .max_difference(&coarse_table.valuation())
        .is_some_and(|d| d <= COHERENCE_TOL))
}

/// One line of a poset coherence report.
#[derive(Clone, Debug, Serialize)]
pub struct CoherenceResult {
    pub coarse_left: String,
    pub coarse_right: String,
    pub coherent: bool,
}

/// Runs [`coherence_check`] from `(left, right)` to every pair of contexts
/// below them in the poset, including the pair itself.
pub fn poset_coherence(
    poset: &ContextPoset,
    left: usize,
    right: usize,
    tol: &Tolerance,
) -> Result<Vec<CoherenceResult>> {
    let contexts = poset.contexts();
    let below = |top: usize| -> Vec<(usize, Refinement)> {
        (0..contexts.len())
            .filter_map(|low| {
                if low == top {
                    Some((low, Refinement::identity(&contexts[top].system.type_of())))
                } else {
                    poset.pair(low, top).map(|p| (low, p.refinement.clone()))
                }
            })
            .collect()
    };
    let mut out = Vec::new();
    for (cl, r) in below(left) {
        for (cr, s) in below(right) {
            let coherent = coherence_check(
                (&contexts[left], &contexts[right]),
                (&contexts[cl], &contexts[cr]),
                &r,
                &s,
                tol,
            )?;
            out.push(CoherenceResult {
                coarse_left: contexts[cl].id.clone(),
                coarse_right: contexts[cr].id.clone(),
                coherent,
            });
        }
    }
    Ok(out)
}

fn projector_at(c: &Context, i: usize) -> Result<&CMatrix> {
    c.system.projectors().get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: c.system.len(),
    })
}

/// For rank-one `C_i = |ψ⟩⟨ψ|`, compares row `i` of the Born table with
/// `⟨ψ|D_j|ψ⟩`, where `ψ` is recovered as an eigenvector of `C_i`.
pub fn rank1_check(c: &Context, i: usize, d: &Context) -> Result<bool> {
    let ci = projector_at(c, i)?;
    if c.system.ranks()[i] != 1 {
        return Err(Error::RankNotOne(i));
    }
    row_matches_basis(c, i, d, &projector_range_basis(ci)?, RANK_ONE_TOL)
}

/// Same comparison for any rank, with `C_i = Σ_k |ψ_k⟩⟨ψ_k|` on an
/// orthonormal eigenbasis of its range.
pub fn rank_k_decomposition_check(c: &Context, i: usize, d: &Context) -> Result<bool> {
    let ci = projector_at(c, i)?;
    let basis = projector_range_basis(ci)?;
    if basis.len() != c.system.ranks()[i] {
        return Ok(false);
    }
    row_matches_basis(c, i, d, &basis, RANK_K_TOL)
}

fn row_matches_basis(
    c: &Context,
    i: usize,
    d: &Context,
    basis: &[Vec<Complex64>],
    bound: f64,
) -> Result<bool> {
    let table = BornTable::new(c, d)?;
    Ok(d.system.projectors().iter().enumerate().all(|(j, dj)| {
        let expected: f64 = basis.iter().map(|psi| dj.expectation(psi).re).sum();
        (table.get(i, j) - expected).abs() < bound
    }))
}

/// A nonzero vector in ℂ^n; probabilities divide by `⟨ψ|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<Complex64>);

impl PureState {
    pub fn new(v: Vec<Complex64>) -> Result<Self> {
        if v.is_empty() || v.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v))
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// The distribution `i ↦ ⟨ψ|C_i|ψ⟩ / ⟨ψ|ψ⟩` on `Spec(C)`.
pub fn pure_state_section(psi: &PureState, c: &Context) -> Result<ProbabilityValuation<usize>> {
    if psi.0.len() != c.dim() {
        return Err(Error::DimMismatch {
            expected: c.dim(),
            actual: psi.0.len(),
        });
    }
    let norm = psi.norm_sqr();
    let weights = c
        .system
        .projectors()
        .iter()
        .map(|p| (p.expectation(&psi.0).re / norm).max(0.0))
        .collect();
    ProbabilityValuation::new(FiniteValuation::new(
        (0..c.system.len()).collect(),
        weights,
    )?)
}

/// Whether the pure-state distributions form a section over the poset:
/// for every `C ≤ D`, restricting the distribution on `D` gives the one on `C`.
pub fn section_compatibility_check(psi: &PureState, poset: &ContextPoset) -> Result<bool> {
    let sections = poset
        .contexts()
        .iter()
        .map(|c| pure_state_section(psi, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(poset.order().iter().all(|p| {
        let pushed = sections[p.high].pushforward(|&i| p.refinement.map[i]);
        pushed
            .max_difference(&sections[p.low])
            .is_some_and(|d| d <= SECTION_TOL)
    }))
}

/// Distribution of the values of `o = Σ λ_i C_i` under `weights` on
/// `Spec(C)`, with `λ_i = Tr(o C_i)/μ_i` and equal values merged.
/// Output points are the distinct values, ascending.
pub fn observable_distribution(
    c: &Context,
    o: &CMatrix,
    weights: &FiniteValuation<usize>,
    tol: &Tolerance,
) -> Result<FiniteValuation<f64>> {
    if o.dim() != c.dim() {
        return Err(Error::DimMismatch {
            expected: c.dim(),
            actual: o.dim(),
        });
    }
    let scale = 1.0 + o.frobenius_norm();
    if o.hermitian_residual() >= tol.eps * scale {
        return Err(Error::NotInContext);
    }
    let projectors = c.system.projectors();
    let values: Vec<f64> = projectors
        .iter()
        .zip(c.system.ranks())
        .map(|(p, &mu)| (o * p).trace().re / mu as f64)
        .collect();
    let rebuilt = values
        .iter()
        .zip(projectors)
        .fold(CMatrix::zeros(c.dim()), |acc, (&l, p)| {
            &acc + &p.scale_real(l)
        });
    if rebuilt.distance(o) >= tol.eps * scale {
        return Err(Error::NotInContext);
    }
    let mut indexed: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            weights
                .weight(&i)
                .map(|w| (l, w))
                .ok_or_else(|| Error::UnknownPoint(i.to_string()))
        })
        .collect::<Result<_>>()?;
    if weights.points().len() != values.len() {
        return Err(Error::LengthMismatch {
            points: weights.points().len(),
            weights: values.len(),
        });
    }
    indexed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gap = tol.eigengap * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut points: Vec<f64> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for (l, w) in indexed {
        if l - anchor < gap {
            *masses.last_mut().expect("anchor set") += w;
        } else {
            anchor = l;
            points.push(l);
            masses.push(w);
        }
    }
    FiniteValuation::new(points, masses)
}
