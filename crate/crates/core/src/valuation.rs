//! Valuations on finite discrete spaces.
//!
//! Every subset of a finite discrete space is open, and a valuation on it is
//! determined by its values on singletons, so a valuation is stored as one
//! nonnegative weight per point. The measure of an open is the sum of its
//! point weights. [`FiniteValuation::dirac`] and [`FiniteValuation::bind`]
//! give the monad structure; [`FiniteValuation::product`] gives the product
//! valuation used for Fubini.

use std::fmt::Debug;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability valuation.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ValuationRepr<P>",
    bound(deserialize = "P: Deserialize<'de> + PartialEq + Debug")
)]
pub struct FiniteValuation<P> {
    points: Vec<P>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct ValuationRepr<P> {
    points: Vec<P>,
    weights: Vec<f64>,
}

impl<P: PartialEq + Debug> TryFrom<ValuationRepr<P>> for FiniteValuation<P> {
    type Error = Error;

    fn try_from(r: ValuationRepr<P>) -> Result<Self> {
        FiniteValuation::new(r.points, r.weights)
    }
}

impl<P: PartialEq + Debug> FiniteValuation<P> {
    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeight);
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::DuplicatePoint(format!("{p:?}")));
            }
        }
        Ok(Self { points, weights })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (P, f64)>) -> Result<Self> {
        let (points, weights) = pairs.into_iter().unzip();
        Self::new(points, weights)
    }

    /// Point mass at `x` on `space`.
    pub fn dirac(x: &P, space: Vec<P>) -> Result<ProbabilityValuation<P>> {
        if !space.contains(x) {
            return Err(Error::UnknownPoint(format!("{x:?}")));
        }
        let weights = space
            .iter()
            .map(|p| if p == x { 1.0 } else { 0.0 })
            .collect();
        Ok(ProbabilityValuation(Self::new(space, weights)?))
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn weight(&self, x: &P) -> Option<f64> {
        self.position(x).map(|i| self.weights[i])
    }

    fn position(&self, x: &P) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass of the open `subset`; `measure(&[]) = 0`.
    pub fn measure(&self, subset: &[P]) -> Result<f64> {
        subset
            .iter()
            .map(|x| {
                self.weight(x)
                    .ok_or_else(|| Error::UnknownPoint(format!("{x:?}")))
            })
            .sum()
    }

    /// Image valuation: weight of `y` is the sum over its fibre. Target
    /// points appear in order of first occurrence.
    pub fn pushforward<Q: PartialEq + Debug>(&self, f: impl Fn(&P) -> Q) -> FiniteValuation<Q> {
        let mut points: Vec<Q> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in self.iter() {
            let y = f(x);
            match points.iter().position(|p| *p == y) {
                Some(k) => weights[k] += w,
                None => {
                    points.push(y);
                    weights.push(w);
                }
            }
        }
        FiniteValuation { points, weights }
    }

    /// Monad bind: weight of `y` is `Σ_x v(x)·k(x)(y)`. All kernels must
    /// live on the same ordered target space.
    pub fn bind<Q: PartialEq + Debug + Clone>(
        &self,
        k: impl Fn(&P) -> FiniteValuation<Q>,
    ) -> Result<FiniteValuation<Q>> {
        let mut out: Option<FiniteValuation<Q>> = None;
        for (x, w) in self.iter() {
            let kx = k(x);
            match out.as_mut() {
                None => {
                    out = Some(FiniteValuation {
                        weights: kx.weights.iter().map(|v| w * v).collect(),
                        points: kx.points,
                    })
                }
                Some(acc) => {
                    if acc.points != kx.points {
                        return Err(Error::TargetMismatch);
                    }
                    for (a, v) in acc.weights.iter_mut().zip(&kx.weights) {
                        *a += w * v;
                    }
                }
            }
        }
        Ok(out.unwrap_or(FiniteValuation {
            points: Vec::new(),
            weights: Vec::new(),
        }))
    }

    pub fn product<Q: PartialEq + Debug + Clone>(
        &self,
        other: &FiniteValuation<Q>,
    ) -> FiniteValuation<(P, Q)>
    where
        P: Clone,
    {
        let mut points = Vec::with_capacity(self.points.len() * other.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (x, v) in self.iter() {
            for (y, w) in other.iter() {
                points.push((x.clone(), y.clone()));
                weights.push(v * w);
            }
        }
        FiniteValuation { points, weights }
    }

    pub fn normalize(&self) -> Result<ProbabilityValuation<P>>
    where
        P: Clone,
    {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(ProbabilityValuation(FiniteValuation {
            points: self.points.clone(),
            weights: self.weights.iter().map(|w| w / mass).collect(),
        }))
    }

    /// `m(U ∪ V) + m(U ∩ V) = m(U) + m(V)` evaluated directly on subsets.
    pub fn modular_check(&self, u: &[P], v: &[P]) -> Result<bool>
    where
        P: Clone,
    {
        let mut union: Vec<P> = u.to_vec();
        for x in v {
            if !union.contains(x) {
                union.push(x.clone());
            }
        }
        let inter: Vec<P> = u.iter().filter(|x| v.contains(x)).cloned().collect();
        let lhs = self.measure(&union)? + self.measure(&inter)?;
        let rhs = self.measure(u)? + self.measure(v)?;
        Ok((lhs - rhs).abs() <= MASS_TOLERANCE * (1.0 + rhs.abs()))
    }

    /// Largest pointwise weight difference, or `None` if the point sets
    /// differ (order is ignored).
    pub fn max_difference(&self, other: &FiniteValuation<P>) -> Option<f64> {
        if self.points.len() != other.points.len() {
            return None;
        }
        self.iter()
            .map(|(x, w)| other.weight(x).map(|v| (w - v).abs()))
            .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))
    }
}

/// A valuation of total mass 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityValuation<P>(FiniteValuation<P>);

impl<P: PartialEq + Debug> ProbabilityValuation<P> {
    pub fn new(v: FiniteValuation<P>) -> Result<Self> {
        let mass = v.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized(mass));
        }
        Ok(Self(v))
    }

    pub fn into_inner(self) -> FiniteValuation<P> {
        self.0
    }
}

impl<P> Deref for ProbabilityValuation<P> {
    type Target = FiniteValuation<P>;

    fn deref(&self) -> &FiniteValuation<P> {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(a: f64, b: f64) -> FiniteValuation<char> {
        FiniteValuation::new(vec!['a', 'b'], vec![a, b]).unwrap()
    }

    #[test]
    fn measure_examples() {
        let v = ab(0.3, 0.7);
        assert_eq!(v.measure(&[]), Ok(0.0));
        assert_eq!(v.measure(&['a']), Ok(0.3));
        assert_eq!(v.measure(&['a', 'b']), Ok(1.0));
        assert!(matches!(v.measure(&['z']), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            FiniteValuation::new(vec!['a'], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            FiniteValuation::new(vec!['a'], vec![-0.1]),
            Err(Error::InvalidWeight)
        );
        assert_eq!(
            FiniteValuation::new(vec!['a'], vec![f64::NAN]),
            Err(Error::InvalidWeight)
        );
        assert!(matches!(
            FiniteValuation::new(vec!['a', 'a'], vec![0.1, 0.2]),
            Err(Error::DuplicatePoint(_))
        ));
    }

    #[test]
    fn dirac_examples() {
        let d = FiniteValuation::dirac(&'x', vec!['x']).unwrap();
        assert_eq!(d.weights(), &[1.0]);
        let d = FiniteValuation::dirac(&'a', vec!['a', 'b']).unwrap();
        assert_eq!(d.weights(), &[1.0, 0.0]);
        assert_eq!(d.measure(&['b']), Ok(0.0));
        assert!(FiniteValuation::dirac(&'c', vec!['a', 'b']).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let v = FiniteValuation::new(vec![1, 2, 3], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(v.pushforward(|x| *x), v);
        let c = v.pushforward(|_| ());
        assert_eq!(c.points(), &[()]);
        assert!((c.weights()[0] - 1.0).abs() < 1e-15);
        let f = v.pushforward(|x| if *x < 3 { 'a' } else { 'b' });
        assert_eq!(f.points(), &['a', 'b']);
        assert!((f.weights()[0] - 0.5).abs() < 1e-15 && (f.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bind_examples() {
        let space = vec!['a', 'b'];
        let k = |x: &char| match x {
            'a' => FiniteValuation::new(vec![0, 1], vec![1.0, 0.0]).unwrap(),
            _ => FiniteValuation::new(vec![0, 1], vec![0.5, 0.5]).unwrap(),
        };
        let left = FiniteValuation::dirac(&'b', space.clone())
            .unwrap()
            .bind(k)
            .unwrap();
        assert_eq!(left, k(&'b'));
        let v = ab(0.5, 0.5);
        let right = v
            .bind(|x| {
                FiniteValuation::dirac(x, space.clone())
                    .unwrap()
                    .into_inner()
            })
            .unwrap();
        assert_eq!(right, v);
        let mixed = v.bind(k).unwrap();
        assert_eq!(mixed.weights(), &[0.75, 0.25]);

        let bad = v.bind(|x| match x {
            'a' => FiniteValuation::new(vec![0], vec![1.0]).unwrap(),
            _ => FiniteValuation::new(vec![1], vec![1.0]).unwrap(),
        });
        assert_eq!(bad, Err(Error::TargetMismatch));
    }

    #[test]
    fn product_examples() {
        let v = FiniteValuation::new(vec!['a'], vec![2.0]).unwrap();
        let w = FiniteValuation::new(vec!['b'], vec![3.0]).unwrap();
        let p = v.product(&w);
        assert_eq!(p.points(), &[('a', 'b')]);
        assert_eq!(p.weights(), &[6.0]);

        let u = ab(0.5, 0.5);
        assert!(u.product(&u).weights().iter().all(|&x| x == 0.25));

        let one = FiniteValuation::new(vec![()], vec![1.0]).unwrap();
        assert_eq!(
            ab(0.3, 0.7).product(&one).pushforward(|(x, _)| *x),
            ab(0.3, 0.7)
        );
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(ab(2.0, 2.0).normalize().unwrap().weights(), &[0.5, 0.5]);
        let p = ab(0.25, 0.75);
        assert_eq!(p.normalize().unwrap().into_inner(), p);
        let z = FiniteValuation::new(vec!['a'], vec![0.0]).unwrap();
        assert_eq!(z.normalize(), Err(Error::ZeroMass));
    }

    #[test]
    fn modular_examples() {
        let v = FiniteValuation::new(vec![0, 1, 2, 3], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(v.modular_check(&[0, 1], &[2]), Ok(true));
        assert_eq!(v.modular_check(&[1, 3], &[1, 3]), Ok(true));
        assert_eq!(v.modular_check(&[0, 1, 2], &[1, 2, 3]), Ok(true));
        assert!(v.modular_check(&[9], &[]).is_err());
    }

    #[test]
    fn probability_requires_unit_mass() {
        assert!(ProbabilityValuation::new(ab(0.5, 0.5)).is_ok());
        assert!(matches!(
            ProbabilityValuation::new(ab(0.5, 0.6)),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn json_schema() {
        let v = ab(0.25, 0.75);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"points":["a","b"],"weights":[0.25,0.75]}"#);
        assert_eq!(
            serde_json::from_str::<FiniteValuation<char>>(&s).unwrap(),
            v
        );
        assert!(serde_json::from_str::<FiniteValuation<char>>(
            r#"{"points":["a"],"weights":[-1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn max_difference_ignores_order() {
        let v = ab(0.25, 0.75);
        let w = FiniteValuation::new(vec!['b', 'a'], vec![0.75, 0.5]).unwrap();
        assert_eq!(v.max_difference(&w), Some(0.25));
        let x = FiniteValuation::new(vec!['a', 'c'], vec![0.25, 0.75]).unwrap();
        assert_eq!(v.max_difference(&x), None);
    }
}
