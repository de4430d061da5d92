//! Contexts, their spectra, and finite posets of contexts ordered by
//! inclusion, with the coarse-graining maps between spectra.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{simultaneous_diagonalization, CMatrix, Tolerance};
use crate::projectors::{ProjectorSystem, Refinement};

/// A commutative subalgebra, held as its canonical projector system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Context {
    pub id: String,
    pub system: ProjectorSystem,
}

impl Context {
    /// Canonicalizes `system` and derives the content-hash id.
    pub fn from_system(system: &ProjectorSystem) -> Self {
        let system = system.canonicalize();
        Self {
            id: context_id(&system),
            system,
        }
    }

    /// The trivial context `ℂ·1`.
    pub fn bottom(n: usize) -> Self {
        Self::from_system(&ProjectorSystem::trivial(n))
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            context_id: self.id.clone(),
            size: self.system.len(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.system.len() == 1
    }

    /// `self ⊆ other`, i.e. `other` refines `self`.
    pub fn leq(&self, other: &Context, tol: &Tolerance) -> bool {
        self.system.find_refinement(&other.system, tol).is_some()
    }

    /// The map `Spec(fine) → Spec(self)` sending each fine point to the
    /// coarse projector absorbing it.
    pub fn restriction_from(&self, fine: &Context, tol: &Tolerance) -> Result<Vec<usize>> {
        self.system
            .find_refinement(&fine.system, tol)
            .map(|r| r.map)
            .ok_or(Error::NotComparable)
    }
}

/// Points `0..size` of a context's Gelfand spectrum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub context_id: String,
    pub size: usize,
}

impl Spectrum {
    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

fn context_id(system: &ProjectorSystem) -> String {
    let bytes: Vec<u8> = system
        .quantized_key()
        .iter()
        .flat_map(|k| k.to_le_bytes())
        .collect();
    let hash = hex::encode(Sha256::digest(&bytes));
    let ranks: Vec<String> = system.ranks().iter().map(|r| r.to_string()).collect();
    format!("{}:{}", ranks.join("-"), &hash[..12])
}

/// Joint-eigenspace context of a commuting Hermitian family.
pub fn generate_context(observables: &[CMatrix], tol: &Tolerance) -> Result<Context> {
    let projectors = simultaneous_diagonalization(observables, tol)?;
    let system = ProjectorSystem::validate(projectors, tol)?;
    Ok(Context::from_system(&system))
}

/// Coarsest common coarsening of two contexts.
///
/// `C_i` and `D_j` are linked when `Tr(C_i D_j) > eps`; each connected
/// component of that bipartite graph contributes one projector, the sum of
/// its `C`s (which equals the sum of its `D`s).
pub fn common_coarsening(c: &Context, d: &Context, tol: &Tolerance) -> Result<Context> {
    if c.dim() != d.dim() {
        return Err(Error::DimMismatch {
            expected: c.dim(),
            actual: d.dim(),
        });
    }
    let (cs, ds) = (c.system.projectors(), d.system.projectors());
    let l = cs.len();
    let mut parent: Vec<usize> = (0..l + ds.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, ci) in cs.iter().enumerate() {
        for (j, dj) in ds.iter().enumerate() {
            if (ci * dj).trace().re > tol.eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, l + j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, CMatrix)> = Vec::new();
    for (i, ci) in cs.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, sum)) => *sum = &*sum + ci,
            None => groups.push((root, ci.clone())),
        }
    }
    let system = ProjectorSystem::validate(groups.into_iter().map(|(_, p)| p).collect(), tol)?;
    Ok(Context::from_system(&system))
}

/// One strict order pair `low < high` with its refinement witness.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderPair {
    pub low: usize,
    pub high: usize,
    pub refinement: Refinement,
}

/// A finite poset of contexts containing ⊥. Only strict pairs are stored;
/// reflexivity is implicit.
#[derive(Clone, Debug)]
pub struct ContextPoset {
    dim: usize,
    contexts: Vec<Context>,
    order: Vec<OrderPair>,
}

impl ContextPoset {
    /// Deduplicates the given contexts, adds ⊥, and computes all order
    /// pairs with their witnesses.
    pub fn from_contexts(
        dim: usize,
        contexts: impl IntoIterator<Item = Context>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let mut all = vec![Context::bottom(dim)];
        for c in contexts {
            if c.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: c.dim(),
                });
            }
            push_unique(&mut all, c, tol);
        }
        let mut order = Vec::new();
        for (low, c) in all.iter().enumerate() {
            for (high, d) in all.iter().enumerate() {
                if low == high {
                    continue;
                }
                if let Some(refinement) = c.system.find_refinement(&d.system, tol) {
                    order.push(OrderPair {
                        low,
                        high,
                        refinement,
                    });
                }
            }
        }
        Ok(Self {
            dim,
            contexts: all,
            order,
        })
    }

    /// One context per family, every pairwise common coarsening of those,
    /// and ⊥.
    pub fn build(families: &[Vec<CMatrix>], tol: &Tolerance) -> Result<Self> {
        let dim = families
            .iter()
            .find_map(|f| f.first())
            .ok_or(Error::EmptyFamily)?
            .dim();
        let mut generated: Vec<Context> = Vec::new();
        for family in families {
            if let Some(bad) = family.iter().find(|m| m.dim() != dim) {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: bad.dim(),
                });
            }
            push_unique(&mut generated, generate_context(family, tol)?, tol);
        }
        let mut all = generated.clone();
        for (i, c) in generated.iter().enumerate() {
            for d in &generated[i + 1..] {
                push_unique(&mut all, common_coarsening(c, d, tol)?, tol);
            }
        }
        Self::from_contexts(dim, all, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn order(&self) -> &[OrderPair] {
        &self.order
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.contexts
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownContext(id.to_string()))
    }

    pub fn leq(&self, low: usize, high: usize) -> bool {
        low == high || self.pair(low, high).is_some()
    }

    pub fn pair(&self, low: usize, high: usize) -> Option<&OrderPair> {
        self.order.iter().find(|p| p.low == low && p.high == high)
    }

    /// `Spec(high) → Spec(low)` as an index map.
    pub fn restriction_map(&self, low: usize, high: usize) -> Result<Vec<usize>> {
        if low == high {
            return Ok((0..self.contexts[low].system.len()).collect());
        }
        self.pair(low, high)
            .map(|p| p.refinement.map.clone())
            .ok_or(Error::NotComparable)
    }

    /// Contexts that are below no other context.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.contexts.len())
            .filter(|&i| !self.order.iter().any(|p| p.low == i))
            .collect()
    }

    /// Rebuilds a poset from serialized parts, checking ids, canonical
    /// forms and that each witness realizes its pair.
    pub fn from_parts(
        dim: usize,
        contexts: Vec<Context>,
        order: Vec<OrderPair>,
        tol: &Tolerance,
    ) -> Result<Self> {
        for c in &contexts {
            if c.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: c.dim(),
                });
            }
            let canonical = Context::from_system(&c.system);
            if canonical.id != c.id || canonical.system != c.system {
                return Err(Error::UnknownContext(c.id.clone()));
            }
        }
        if !contexts.iter().any(|c| c.is_bottom()) {
            return Err(Error::UnknownContext("bottom".into()));
        }
        for p in &order {
            let (low, high) = match (contexts.get(p.low), contexts.get(p.high)) {
                (Some(l), Some(h)) => (l, h),
                _ => return Err(Error::NotComparable),
            };
            let coarse = high.system.coarsen(&p.refinement)?;
            if !coarse.approx_eq(&low.system, tol) {
                return Err(Error::NotComparable);
            }
        }
        // ⊥ must come first so that `bottom()` is index 0.
        let mut poset = Self {
            dim,
            contexts,
            order,
        };
        if let Some(b) = poset.contexts.iter().position(|c| c.is_bottom()) {
            if b != 0 {
                poset.contexts.swap(0, b);
                for p in &mut poset.order {
                    for idx in [&mut p.low, &mut p.high] {
                        if *idx == 0 {
                            *idx = b;
                        } else if *idx == b {
                            *idx = 0;
                        }
                    }
                }
            }
        }
        Ok(poset)
    }
}

fn push_unique(list: &mut Vec<Context>, c: Context, tol: &Tolerance) {
    if !list.iter().any(|x| x.system.approx_eq(&c.system, tol)) {
        list.push(c);
    }
}

#[derive(Serialize, Deserialize)]
struct ContextRepr {
    id: String,
    system: ProjectorSystem,
}

#[derive(Serialize, Deserialize)]
struct OrderRepr {
    low: String,
    high: String,
    refinement: Refinement,
}

#[derive(Serialize, Deserialize)]
struct PosetRepr {
    dim: usize,
    contexts: Vec<ContextRepr>,
    order: Vec<OrderRepr>,
}

impl Serialize for ContextPoset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PosetRepr {
            dim: self.dim,
            contexts: self
                .contexts
                .iter()
                .map(|c| ContextRepr {
                    id: c.id.clone(),
                    system: c.system.clone(),
                })
                .collect(),
            order: self
                .order
                .iter()
                .map(|p| OrderRepr {
                    low: self.contexts[p.low].id.clone(),
                    high: self.contexts[p.high].id.clone(),
                    refinement: p.refinement.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContextPoset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PosetRepr::deserialize(d)?;
        let contexts: Vec<Context> = repr
            .contexts
            .into_iter()
            .map(|c| Context {
                id: c.id,
                system: c.system,
            })
            .collect();
        let lookup = |id: &str| {
            contexts
                .iter()
                .position(|c| c.id == id)
                .ok_or_else(|| D::Error::custom(format!("unknown context id {id}")))
        };
        let order = repr
            .order
            .into_iter()
            .map(|o| {
                Ok(OrderPair {
                    low: lookup(&o.low)?,
                    high: lookup(&o.high)?,
                    refinement: o.refinement,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        ContextPoset::from_parts(repr.dim, contexts, order, &Tolerance::default())
            .map_err(D::Error::custom)
    }
}
