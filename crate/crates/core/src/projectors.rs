//! Projector systems, their types, refinements and the coarsening action.

use std::cmp::Reverse;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Tolerance};

const QUANTUM: f64 = 1e-6;

/// Ordered partition of `n`: the ranks of a projector system in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct OrderedPartition(Vec<usize>);

impl OrderedPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidPartition);
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl<'de> Deserialize<'de> for OrderedPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OrderedPartition::new(Vec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Reindexing from fine indices (`source`, length l) to coarse indices
/// (`target`, length m). Indices are 0-based in the API and 1-based in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub source: OrderedPartition,
    pub target: OrderedPartition,
    pub map: Vec<usize>,
}

impl Refinement {
    pub fn new(source: OrderedPartition, target: OrderedPartition, map: Vec<usize>) -> Self {
        Self {
            source,
            target,
            map,
        }
    }

    pub fn identity(partition: &OrderedPartition) -> Self {
        Self::new(
            partition.clone(),
            partition.clone(),
            (0..partition.len()).collect(),
        )
    }

    /// Whether `target[j] = Σ_{map[i]=j} source[i]` for every `j`.
    pub fn check(&self) -> Result<bool> {
        if self.map.len() != self.source.len() {
            return Err(Error::IndexOutOfRange {
                index: self.map.len().min(self.source.len()),
                len: self.map.len().max(self.source.len()),
            });
        }
        let mut sums = vec![0usize; self.target.len()];
        for (i, &j) in self.map.iter().enumerate() {
            if j >= sums.len() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: sums.len(),
                });
            }
            sums[j] += self.source.0[i];
        }
        Ok(sums == self.target.0)
    }

    /// The coarse index a fine spectrum point maps to.
    pub fn apply(&self, i: usize) -> Result<usize> {
        self.map.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.map.len(),
        })
    }

    /// `then ∘ self`: first coarsen along `self`, then along `then`.
    pub fn then(&self, then: &Refinement) -> Result<Refinement> {
        if self.target != then.source {
            return Err(Error::TypeMismatch {
                expected: then.source.0.clone(),
                actual: self.target.0.clone(),
            });
        }
        let map = self
            .map
            .iter()
            .map(|&j| then.apply(j))
            .collect::<Result<_>>()?;
        Ok(Refinement::new(
            self.source.clone(),
            then.target.clone(),
            map,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct RefinementRepr {
    source: Vec<usize>,
    target: Vec<usize>,
    map: Vec<usize>,
}

impl Serialize for Refinement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RefinementRepr {
            source: self.source.0.clone(),
            target: self.target.0.clone(),
            map: self.map.iter().map(|j| j + 1).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Refinement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RefinementRepr::deserialize(d)?;
        let source = OrderedPartition::new(repr.source).map_err(D::Error::custom)?;
        let target = OrderedPartition::new(repr.target).map_err(D::Error::custom)?;
        let map = repr
            .map
            .into_iter()
            .map(|j| {
                j.checked_sub(1)
                    .ok_or_else(|| D::Error::custom("refinement map is 1-based"))
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Refinement::new(source, target, map))
    }
}

/// A complete orthogonal sequence of projectors on ℂ^n.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSystem {
    dim: usize,
    projectors: Vec<CMatrix>,
    ranks: Vec<usize>,
}

impl ProjectorSystem {
    /// The one-element system `[I_n]`.
    pub fn trivial(n: usize) -> Self {
        Self {
            dim: n,
            projectors: vec![CMatrix::identity(n)],
            ranks: vec![n],
        }
    }

    /// Checks idempotence, orthogonality, completeness and integral traces.
    pub fn validate(mats: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let n = mats.first().ok_or(Error::EmptyFamily)?.dim();
        if let Some(bad) = mats.iter().find(|m| m.dim() != n) {
            return Err(Error::DimMismatch {
                expected: n,
                actual: bad.dim(),
            });
        }
        let mut ranks = Vec::with_capacity(mats.len());
        for (i, p) in mats.iter().enumerate() {
            if !p.is_projector(tol) {
                return Err(Error::NotProjector(i));
            }
            let tr = p.trace().re;
            let rank = tr.round();
            if rank < 1.0 || (tr - rank).abs() >= tol.eps * (1.0 + n as f64) {
                return Err(Error::NonIntegerTrace(i));
            }
            ranks.push(rank as usize);
        }
        for i in 0..mats.len() {
            for j in (i + 1)..mats.len() {
                if (&mats[i] * &mats[j]).frobenius_norm() >= tol.eps {
                    return Err(Error::NotOrthogonal(i, j));
                }
            }
        }
        let sum = mats.iter().fold(CMatrix::zeros(n), |acc, p| &acc + p);
        if sum.distance(&CMatrix::identity(n)) >= tol.eps {
            return Err(Error::NotComplete);
        }
        Ok(Self {
            dim: n,
            projectors: mats,
            ranks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn type_of(&self) -> OrderedPartition {
        OrderedPartition(self.ranks.clone())
    }

    /// `Proj(r)`: coarse projector `j` is the sum of the fine projectors
    /// with `r(i) = j`.
    pub fn coarsen(&self, r: &Refinement) -> Result<ProjectorSystem> {
        if r.source.0 != self.ranks {
            return Err(Error::TypeMismatch {
                expected: r.source.0.clone(),
                actual: self.ranks.clone(),
            });
        }
        if !r.check()? {
            return Err(Error::InvalidRefinement);
        }
        let mut projectors = vec![CMatrix::zeros(self.dim); r.target.len()];
        for (p, &j) in self.projectors.iter().zip(&r.map) {
            projectors[j] = &projectors[j] + p;
        }
        Ok(ProjectorSystem {
            dim: self.dim,
            projectors,
            ranks: r.target.0.clone(),
        })
    }

    /// Reorders by descending rank, then by entries quantized to a 1e-6
    /// grid (row-major, real before imaginary).
    pub fn canonicalize(&self) -> ProjectorSystem {
        self.canonicalize_with_permutation().0
    }

    /// Also returns `perm` with `canonical[k] = self[perm[k]]`.
    pub fn canonicalize_with_permutation(&self) -> (ProjectorSystem, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let keys: Vec<_> = self
            .projectors
            .iter()
            .zip(&self.ranks)
            .map(|(p, &r)| (Reverse(r), quantized_entries(p)))
            .collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let system = ProjectorSystem {
            dim: self.dim,
            projectors: order.iter().map(|&k| self.projectors[k].clone()).collect(),
            ranks: order.iter().map(|&k| self.ranks[k]).collect(),
        };
        (system, order)
    }

    /// Same length and every projector within `tol.eps` of its counterpart.
    pub fn approx_eq(&self, other: &ProjectorSystem, tol: &Tolerance) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .projectors
                .iter()
                .zip(&other.projectors)
                .all(|(a, b)| a.distance(b) < tol.eps)
    }

    /// Finds `r` with `fine.coarsen(r) = self`, assigning each fine
    /// projector `D_i` to the unique coarse `C_j` with `C_j D_i = D_i`.
    pub fn find_refinement(&self, fine: &ProjectorSystem, tol: &Tolerance) -> Option<Refinement> {
        if self.dim != fine.dim {
            return None;
        }
        let mut map = Vec::with_capacity(fine.len());
        for d in &fine.projectors {
            let mut absorbing = self
                .projectors
                .iter()
                .enumerate()
                .filter(|(_, c)| (*c * d).distance(d) < tol.eps)
                .map(|(j, _)| j);
            let j = absorbing.next()?;
            if absorbing.next().is_some() {
                return None;
            }
            map.push(j);
        }
        let r = Refinement::new(fine.type_of(), self.type_of(), map);
        matches!(r.check(), Ok(true)).then_some(r)
    }

    pub(crate) fn quantized_key(&self) -> Vec<i64> {
        let mut key = vec![self.dim as i64];
        for (p, &r) in self.projectors.iter().zip(&self.ranks) {
            key.push(r as i64);
            key.extend(quantized_entries(p));
        }
        key
    }
}

fn quantized_entries(p: &CMatrix) -> Vec<i64> {
    p.entries()
        .iter()
        .flat_map(|z| [quantize(z.re), quantize(z.im)])
        .collect()
}

fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    dim: usize,
    projectors: Vec<CMatrix>,
}

impl Serialize for ProjectorSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRepr {
            dim: self.dim,
            projectors: self.projectors.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectorSystem {
    /// Deserialization re-validates with the default tolerance.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SystemRepr::deserialize(d)?;
        let system = ProjectorSystem::validate(repr.projectors, &Tolerance::default())
            .map_err(D::Error::custom)?;
        if system.dim != repr.dim {
            return Err(D::Error::custom(format!(
                "system declares dim {} but projectors have dim {}",
                repr.dim, system.dim
            )));
        }
        Ok(system)
    }
}
