mod common;

use common::{brute_force_section_count, random_context, tol};
use ctxq::born::{pure_state_section, BornTable};
use ctxq::context::{common_coarsening, Context, ContextPoset};
use ctxq::fixtures::{
    random_bloch_poset, random_bloch_vector, random_hermitian, random_linked_poset,
    random_refinement, random_state, random_unitary, rng_from_seed,
};
use ctxq::linalg::{hermitian_eigendecomposition, simultaneous_diagonalization, CMatrix};
use ctxq::projectors::ProjectorSystem;
use ctxq::qubit::{bloch_to_projector, projector_to_bloch, qubit_context};
use ctxq::sections::{check_section, count_global_sections, find_global_section};
use ctxq::valuation::FiniteValuation;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn valuation_strategy() -> impl Strategy<Value = FiniteValuation<usize>> {
    prop::collection::vec(0.0f64..10.0, 1..8)
        .prop_map(|w| FiniteValuation::new((0..w.len()).collect(), w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_is_a_projector_system(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(n, &mut rng);
        let d = hermitian_eigendecomposition(&h, &tol()).unwrap();
        prop_assert!(d.reconstruct().distance(&h) <= 1e-9 * (1.0 + h.frobenius_norm()));
        prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        let system = ProjectorSystem::validate(d.projectors.clone(), &tol());
        prop_assert!(system.is_ok());
        prop_assert_eq!(system.unwrap().ranks().iter().sum::<usize>(), n);
    }

    #[test]
    fn projector_decomposes_into_itself(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let u = random_unitary(n, &mut rng);
        let k = 1 + (seed as usize % (n - 1));
        let cols: Vec<Vec<Complex64>> = (0..k).map(|j| u.column(j)).collect();
        let p = cols.iter().fold(CMatrix::zeros(n), |acc, v| &acc + &CMatrix::outer(v, v));
        let d = hermitian_eigendecomposition(&p, &tol()).unwrap();
        prop_assert_eq!(d.eigenvalues.len(), 2);
        prop_assert!((d.eigenvalues[1] - 1.0).abs() < 1e-9);
        prop_assert!(d.projectors[1].distance(&p) < 1e-9);
    }

    #[test]
    fn simultaneous_diagonalization_commutes_with_family(seed in any::<u64>(), n in 2usize..6, l in 1usize..4) {
        let family = ctxq::fixtures::random_commuting_family(n, l, seed);
        let projectors = simultaneous_diagonalization(&family, &tol()).unwrap();
        let system = ProjectorSystem::validate(projectors.clone(), &tol()).unwrap();
        for a in &family {
            let block_sum = system
                .projectors()
                .iter()
                .fold(CMatrix::zeros(n), |acc, p| &acc + &(&(p * a) * p));
            prop_assert!(block_sum.distance(a) < 1e-8 * (1.0 + a.frobenius_norm()));
        }
    }

    #[test]
    fn coarsening_composes(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let c = random_context(n, seed);
        let r = random_refinement(&c.system.type_of(), &mut rng);
        let mid = c.system.coarsen(&r).unwrap();
        let s = random_refinement(&mid.type_of(), &mut rng);
        let staged = mid.coarsen(&s).unwrap();
        let direct = c.system.coarsen(&r.then(&s).unwrap()).unwrap();
        prop_assert!(staged.approx_eq(&direct, &tol()));
        prop_assert!(c.system.coarsen(&ctxq::projectors::Refinement::identity(&c.system.type_of())).unwrap().approx_eq(&c.system, &tol()));
    }

    #[test]
    fn canonical_form_ignores_order(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let c = random_context(n, seed);
        let mut mats = c.system.projectors().to_vec();
        mats.shuffle(&mut rng);
        let shuffled = ProjectorSystem::validate(mats, &tol()).unwrap();
        let canonical = shuffled.canonicalize();
        prop_assert_eq!(&canonical, &c.system);
        prop_assert_eq!(canonical.canonicalize(), canonical.clone());
        let (again, perm) = shuffled.canonicalize_with_permutation();
        for (k, &old) in perm.iter().enumerate() {
            prop_assert_eq!(&again.projectors()[k], &shuffled.projectors()[old]);
        }
        prop_assert_eq!(Context::from_system(&shuffled).id, c.id);
    }

    #[test]
    fn refinement_is_recovered(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let fine = random_context(n, seed);
        let r = random_refinement(&fine.system.type_of(), &mut rng);
        let coarse = fine.system.coarsen(&r).unwrap();
        let found = coarse.find_refinement(&fine.system, &tol()).unwrap();
        prop_assert_eq!(found.map, r.map);
        let coarse_ctx = Context::from_system(&coarse);
        prop_assert!(coarse_ctx.leq(&fine, &tol()));
        prop_assert!(Context::bottom(n).leq(&fine, &tol()));
    }

    #[test]
    fn meet_is_below_both(seed in any::<u64>(), n in 2usize..5) {
        let c = random_context(n, seed);
        let d = random_context(n, seed ^ 0xabcdef);
        let m = common_coarsening(&c, &d, &tol()).unwrap();
        prop_assert!(m.leq(&c, &tol()) && m.leq(&d, &tol()));
        prop_assert_eq!(common_coarsening(&d, &c, &tol()).unwrap().id, m.id.clone());
        prop_assert_eq!(common_coarsening(&c, &c, &tol()).unwrap().id, c.id.clone());
    }

    #[test]
    fn poset_order_is_transitive_and_functorial(seed in any::<u64>(), count in 2usize..5) {
        let poset = random_linked_poset(3, count, seed).poset(&tol()).unwrap();
        let k = poset.contexts().len();
        prop_assert!(poset.contexts()[poset.bottom()].is_bottom());
        for a in 0..k {
            prop_assert!(poset.leq(poset.bottom(), a));
            for b in 0..k {
                for c in 0..k {
                    if a != b && b != c && poset.leq(a, b) && poset.leq(b, c) {
                        prop_assert!(poset.leq(a, c));
                        let ab = poset.restriction_map(a, b).unwrap();
                        let bc = poset.restriction_map(b, c).unwrap();
                        let ac = poset.restriction_map(a, c).unwrap();
                        let composed: Vec<usize> = bc.iter().map(|&j| ab[j]).collect();
                        prop_assert_eq!(composed, ac);
                    }
                }
            }
        }
        let json = serde_json::to_string(&poset).unwrap();
        let back: ContextPoset = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.contexts().len(), k);
        prop_assert_eq!(back.order().len(), poset.order().len());
    }

    #[test]
    fn born_table_is_bounded_and_transposes(seed in any::<u64>(), n in 2usize..5) {
        let c = random_context(n, seed);
        let d = random_context(n, seed.wrapping_add(1));
        let cd = BornTable::new(&c, &d).unwrap();
        let dc = BornTable::new(&d, &c).unwrap();
        prop_assert!(cd.violations().is_empty());
        for i in 0..c.system.len() {
            for j in 0..d.system.len() {
                let v = cd.get(i, j);
                let bound = c.system.ranks()[i].min(d.system.ranks()[j]) as f64;
                prop_assert!((0.0..=bound + 1e-9).contains(&v));
                prop_assert!((v - dc.get(j, i)).abs() < 1e-12);
            }
        }
        let self_table = BornTable::new(&c, &c).unwrap();
        for i in 0..c.system.len() {
            for j in 0..c.system.len() {
                let expected = if i == j { c.system.ranks()[i] as f64 } else { 0.0 };
                prop_assert!((self_table.get(i, j) - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn born_row_of_a_pure_state_is_its_section(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = rng_from_seed(seed);
        let psi = random_state(n, &mut rng);
        let rho = CMatrix::outer(psi.vector(), psi.vector()).scale_real(1.0 / psi.norm_sqr());
        let state_ctx = Context::from_system(
            &ProjectorSystem::validate(vec![rho.clone(), &CMatrix::identity(n) - &rho], &tol()).unwrap(),
        );
        let row = state_ctx.system.projectors().iter().position(|p| p.distance(&rho) < 1e-9).unwrap();
        let d = random_context(n, seed.wrapping_add(5));
        let table = BornTable::new(&state_ctx, &d).unwrap();
        let section = pure_state_section(&psi, &d).unwrap();
        for j in 0..d.system.len() {
            prop_assert!((table.get(row, j) - section.weights()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_projector_round_trip(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a = random_bloch_vector(&mut rng);
        let back = projector_to_bloch(&bloch_to_projector(&a), &tol()).unwrap();
        for (x, y) in a.components().iter().zip(back.components()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert_eq!(qubit_context(&a).id, qubit_context(&a.antipode()).id);
    }

    #[test]
    fn monad_unit_and_associativity(v in valuation_strategy(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let k_tables: Vec<Vec<f64>> = v.points().iter().map(|_| (0..3).map(|_| rand::Rng::random::<f64>(&mut rng)).collect()).collect();
        let h_tables: Vec<Vec<f64>> = (0..3).map(|_| (0..2).map(|_| rand::Rng::random::<f64>(&mut rng)).collect()).collect();
        let k = |x: &usize| FiniteValuation::new(vec![0, 1, 2], k_tables[*x].clone()).unwrap();
        let h = |y: &usize| FiniteValuation::new(vec![0, 1], h_tables[*y].clone()).unwrap();
        let space = v.points().to_vec();
        let right = v.bind(|p| FiniteValuation::dirac(p, space.clone()).unwrap().into_inner()).unwrap();
        prop_assert!(right.max_difference(&v).unwrap() < 1e-12);
        let left = FiniteValuation::dirac(&0, space.clone()).unwrap().bind(k).unwrap();
        prop_assert!(left.max_difference(&k(&0)).unwrap() < 1e-12);
        let lhs = v.bind(k).unwrap().bind(h).unwrap();
        let rhs = v.bind(|p| k(p).bind(h).unwrap()).unwrap();
        prop_assert!(lhs.max_difference(&rhs).unwrap() < 1e-12);
        prop_assert!((lhs.total_mass() - rhs.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn valuation_is_modular_and_fubini(v in valuation_strategy(), w in valuation_strategy(), mask in any::<u16>()) {
        let u: Vec<usize> = v.points().iter().copied().filter(|p| mask & (1 << p) != 0).collect();
        let x: Vec<usize> = v.points().iter().copied().filter(|p| mask & (1 << (p + 8)) != 0).collect();
        prop_assert!(v.modular_check(&u, &x).unwrap());
        let vw = v.product(&w);
        let swapped = vw.pushforward(|&(a, b)| (b, a));
        prop_assert!(swapped.max_difference(&w.product(&v)).unwrap() < 1e-12);
        prop_assert!((vw.total_mass() - v.total_mass() * w.total_mass()).abs() < 1e-9);
        let id = v.pushforward(|p| *p);
        prop_assert!(id.max_difference(&v).unwrap() < 1e-15);
    }

    #[test]
    fn found_sections_are_sound(seed in any::<u64>(), count in 1usize..6) {
        let poset = random_linked_poset(3, count, seed).poset(&tol()).unwrap();
        let report = find_global_section(&poset);
        let found = report.section.expect("linked bases always admit a section");
        prop_assert!(check_section(&poset, &found).unwrap());
        prop_assert_eq!(count_global_sections(&poset, u64::MAX), brute_force_section_count(&poset));
    }

    #[test]
    fn bloch_section_count_is_a_power_of_two(seed in any::<u64>(), count in 1usize..8) {
        let poset = random_bloch_poset(count, seed).poset(&tol()).unwrap();
        prop_assert_eq!(count_global_sections(&poset, u64::MAX), 1u64 << count);
    }
}
