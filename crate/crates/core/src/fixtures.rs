//! Seeded generators and named fixtures: random commuting families, Bloch
//! context sets, linked bases in higher dimension, and the Mermin–Peres
//! square in M_4 with its sign-assignment oracle.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::born::PureState;
use crate::context::ContextPoset;
use crate::error::Result;
use crate::linalg::{inner, pauli_x, pauli_y, pauli_z, CMatrix, Tolerance, ZERO};
use crate::projectors::{OrderedPartition, Refinement};
use crate::qubit::BlochVector;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_exists: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_count: Option<usize>,
}

/// Observable families plus what the poset built from them should show.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub families: Vec<Vec<CMatrix>>,
    #[serde(default)]
    pub expected: Expected,
}

impl Fixture {
    pub fn poset(&self, tol: &Tolerance) -> Result<ContextPoset> {
        ContextPoset::build(&self.families, tol)
    }
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-like unitary from Gram–Schmidt on Gaussian complex vectors; the
/// columns are the orthonormal vectors.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        // two passes of projection keep the basis orthonormal to ~1e-16
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        if norm < 1e-8 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    CMatrix::from_columns(&basis)
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut a = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = gaussian_complex(rng);
        }
    }
    (&a + &a.adjoint()).scale_real(0.5)
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> PureState {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        if let Ok(psi) = PureState::new(v) {
            return psi;
        }
    }
}

pub fn random_bloch_vector(rng: &mut impl Rng) -> BlochVector {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return BlochVector::normalized(v[0] / norm, v[1] / norm, v[2] / norm)
                .expect("unit by construction");
        }
    }
}

/// `U diag(d) U†` for each diagonal, with one random unitary `U` drawn
/// from `seed`.
pub fn commuting_family_from_diagonals(diagonals: &[Vec<f64>], seed: u64) -> Vec<CMatrix> {
    let n = diagonals.first().map_or(0, Vec::len);
    let u = random_unitary(n, &mut rng_from_seed(seed));
    let ud = u.adjoint();
    diagonals
        .iter()
        .map(|d| {
            let m = &(&u * &CMatrix::from_real_diagonal(d)) * &ud;
            // exact Hermitian symmetrization removes rounding asymmetry
            (&m + &m.adjoint()).scale_real(0.5)
        })
        .collect()
}

/// `l` commuting observables on ℂ^n. Diagonal entries are integer levels
/// in `0..n`, so degenerate spectra (and coarse contexts) occur often.
pub fn random_commuting_family(n: usize, l: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let diagonals: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..n).map(|_| rng.random_range(0..n) as f64).collect())
        .collect();
    commuting_family_from_diagonals(&diagonals, seed)
}

/// A random surjective coarsening of `source`.
pub fn random_refinement(source: &OrderedPartition, rng: &mut impl Rng) -> Refinement {
    let l = source.len();
    let m = rng.random_range(1..=l);
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(rng);
    let mut map = vec![0; l];
    for (k, &i) in order.iter().enumerate() {
        map[i] = if k < m { k } else { rng.random_range(0..m) };
    }
    let mut target = vec![0; m];
    for (i, &j) in map.iter().enumerate() {
        target[j] += source.parts()[i];
    }
    Refinement::new(
        source.clone(),
        OrderedPartition::new(target).expect("surjective map"),
        map,
    )
}

/// The 3×3 Mermin–Peres square of two-qubit Pauli observables.
pub fn mermin_peres_square() -> [[CMatrix; 3]; 3] {
    let (id, x, y, z) = (CMatrix::identity(2), pauli_x(), pauli_y(), pauli_z());
    [
        [x.kron(&id), id.kron(&x), x.kron(&x)],
        [id.kron(&z), z.kron(&id), z.kron(&z)],
        [x.kron(&z), z.kron(&x), y.kron(&y)],
    ]
}

/// The six commuting triples: three rows, then three columns.
pub fn mermin_peres_lines() -> Vec<[(usize, usize); 3]> {
    let mut lines = Vec::with_capacity(6);
    for r in 0..3 {
        lines.push([(r, 0), (r, 1), (r, 2)]);
    }
    for c in 0..3 {
        lines.push([(0, c), (1, c), (2, c)]);
    }
    lines
}

/// Sign `s` with `A·B·C = s·I` for each line, or `None` if the product is
/// not `±I`.
pub fn mermin_peres_product_signs() -> Vec<Option<i8>> {
    let square = mermin_peres_square();
    let id = CMatrix::identity(4);
    mermin_peres_lines()
        .iter()
        .map(|line| {
            let [a, b, c] = line.map(|(r, k)| &square[r][k]);
            let prod = &(a * b) * c;
            if prod.distance(&id) < 1e-12 {
                Some(1)
            } else if prod.distance(&(-&id)) < 1e-12 {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

/// Counts the ±1 assignments to the nine observables whose product along
/// every line equals that line's operator product sign.
pub fn mermin_peres_sign_oracle() -> usize {
    let signs = mermin_peres_product_signs();
    let lines = mermin_peres_lines();
    (0u32..512)
        .filter(|bits| {
            let value = |(r, c): (usize, usize)| {
                if bits >> (3 * r + c) & 1 == 1 {
                    -1i8
                } else {
                    1
                }
            };
            lines
                .iter()
                .zip(&signs)
                .all(|(line, sign)| Some(line.iter().map(|&p| value(p)).product::<i8>()) == *sign)
        })
        .count()
}

pub fn mermin_peres_fixture() -> Fixture {
    let square = mermin_peres_square();
    let families = mermin_peres_lines()
        .iter()
        .map(|line| line.iter().map(|&(r, c)| square[r][c].clone()).collect())
        .collect();
    Fixture {
        name: "mermin-peres".into(),
        dim: 4,
        seed: None,
        families,
        expected: Expected {
            section_exists: Some(false),
            context_count: Some(16),
        },
    }
}

/// `count` distinct qubit contexts from random Bloch axes, one `a·σ` per
/// family.
pub fn random_bloch_poset(count: usize, seed: u64) -> Fixture {
    let mut rng = rng_from_seed(seed);
    let mut axes: Vec<BlochVector> = Vec::with_capacity(count);
    while axes.len() < count {
        let a = random_bloch_vector(&mut rng);
        if axes.iter().all(|b| a.dot(b).abs() < 1.0 - 1e-6) {
            axes.push(a);
        }
    }
    Fixture {
        name: format!("bloch-{count}"),
        dim: 2,
        seed: Some(seed),
        families: axes.iter().map(|a| vec![a.observable()]).collect(),
        expected: Expected {
            section_exists: Some(true),
            context_count: Some(count + 1),
        },
    }
}

/// `count` orthonormal bases of ℂ^n where each basis keeps one vector of
/// the previous one and re-randomizes the rest. Consecutive maximal
/// contexts therefore meet in a two-element context.
pub fn random_linked_poset(n: usize, count: usize, seed: u64) -> Fixture {
    let mut rng = rng_from_seed(seed);
    let mut basis: Vec<Vec<Complex64>> = {
        let u = random_unitary(n, &mut rng);
        (0..n).map(|k| u.column(k)).collect()
    };
    let levels: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let mut families = Vec::with_capacity(count);
    for step in 0..count {
        if step > 0 {
            let keep = rng.random_range(0..n);
            let rest: Vec<usize> = (0..n).filter(|&k| k != keep).collect();
            let mix = random_unitary(n - 1, &mut rng);
            let mut next = basis.clone();
            for (col, &target) in rest.iter().enumerate() {
                let mut v = vec![ZERO; n];
                for (row, &src) in rest.iter().enumerate() {
                    for (x, y) in v.iter_mut().zip(&basis[src]) {
                        *x += mix[(row, col)] * y;
                    }
                }
                next[target] = v;
            }
            basis = next;
        }
        let obs = basis
            .iter()
            .zip(&levels)
            .fold(CMatrix::zeros(n), |acc, (v, &l)| {
                &acc + &CMatrix::outer(v, v).scale_real(l)
            });
        families.push(vec![(&obs + &obs.adjoint()).scale_real(0.5)]);
    }
    Fixture {
        name: format!("linked-{n}x{count}"),
        dim: n,
        seed: Some(seed),
        families,
        expected: Expected::default(),
    }
}
