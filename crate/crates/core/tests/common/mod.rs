#![allow(dead_code)]

use ctxq::context::{generate_context, Context, ContextPoset};
use ctxq::fixtures::{commuting_family_from_diagonals, random_commuting_family, rng_from_seed};
use ctxq::linalg::Tolerance;
use rand::Rng;

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn random_context(n: usize, seed: u64) -> Context {
    let l = rng_from_seed(seed.wrapping_mul(31)).random_range(1..=n);
    generate_context(&random_commuting_family(n, l, seed), &tol()).unwrap()
}

/// Random context guaranteed to contain a rank-one projector: the first
/// diagonal level is unique.
pub fn context_with_rank_one(n: usize, seed: u64) -> Context {
    let mut rng = rng_from_seed(seed.wrapping_add(7));
    let mut diag: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..n.max(2) - 1) as f64)
        .collect();
    diag[0] = n as f64;
    generate_context(&commuting_family_from_diagonals(&[diag], seed), &tol()).unwrap()
}

/// Counts sections by enumerating the full product of all spectra and
/// checking every order pair. Independent of the branch-on-maximal search.
pub fn brute_force_section_count(poset: &ContextPoset) -> u64 {
    let sizes: Vec<usize> = poset.contexts().iter().map(|c| c.system.len()).collect();
    let mut point = vec![0usize; sizes.len()];
    let mut count = 0;
    loop {
        if poset
            .order()
            .iter()
            .all(|p| point[p.low] == p.refinement.map[point[p.high]])
        {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == sizes.len() {
                return count;
            }
            point[k] += 1;
            if point[k] < sizes[k] {
                break;
            }
            point[k] = 0;
            k += 1;
        }
    }
}

pub fn spectrum_product(poset: &ContextPoset) -> u64 {
    poset
        .contexts()
        .iter()
        .map(|c| c.system.len() as u64)
        .product()
}
