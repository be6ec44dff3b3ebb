use proptest::prelude::*;

use polygamy_core::concurrence::{pure_concurrence, pure_state_tau_gap, tau_a, two_qubit_coa, wootters_concurrence};
use polygamy_core::linalg::{fidelity, orthonormalize_columns, partial_trace, ComplexMatrix, C64};
use polygamy_core::polygamy::{polygamy_report_general, subspace_sum_diagnostic};
use polygamy_core::states::{
    ensemble_from_isometry, gaussian_matrix, haar_random_pure, random_mixed_state, rng_for, Bipartition, Ket, State,
};

fn dims_strategy(parties: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<usize>> {
    parties.prop_flat_map(|n| prop::collection::vec(2usize..=3, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(d1 in 2usize..=3, d2 in 2usize..=3, r1 in 1usize..=4, r2 in 1usize..=4, seed: u64) {
        let rho = random_mixed_state(&[d1, d2], r1, seed).unwrap();
        let sigma = random_mixed_state(&[d1, d2], r2, seed ^ 0x5555).unwrap();
        let f = fidelity(&rho, &sigma).unwrap();
        let g = fidelity(&sigma, &rho).unwrap();
        prop_assert!((f - g).abs() < 1e-8);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fidelity_with_a_pure_state(d in 2usize..=4, rank in 1usize..=4, seed: u64) {
        let psi = haar_random_pure(&[d], seed).unwrap();
        let sigma = random_mixed_state(&[d], rank.min(d), seed.wrapping_add(1)).unwrap();
        let overlap: C64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| psi.amplitudes()[i].conj() * sigma.matrix()[(i, j)] * psi.amplitudes()[j])
            .sum();
        let f = fidelity(&psi.to_density(), &sigma).unwrap();
        prop_assert!((f - overlap.re.max(0.0).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(dims in dims_strategy(2..=3), rank in 1usize..=3, seed: u64, keep_mask in 1u8..7) {
        let n = dims.len();
        let keep: Vec<usize> = (0..n).filter(|k| keep_mask & (1 << k) != 0).collect();
        prop_assume!(!keep.is_empty());
        let rho = random_mixed_state(&dims, rank, seed).unwrap();
        let reduced = partial_trace(&rho, &keep).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < 1e-10);
        reduced.validate().unwrap();
        if keep.len() == 2 {
            let nested = partial_trace(&reduced, &[0]).unwrap();
            let direct = partial_trace(&rho, &keep[..1]).unwrap();
            prop_assert!(nested.matrix().max_abs_diff(direct.matrix()) < 1e-12);
        }
    }

    #[test]
    fn any_isometry_reproduces_the_state(d1 in 2usize..=3, d2 in 2usize..=3, rank in 1usize..=4, extra in 0usize..=3, seed: u64) {
        let rho = random_mixed_state(&[d1, d2], rank, seed).unwrap();
        let r = rho.rank().unwrap();
        let mut rng = rng_for(seed, 1);
        let w = orthonormalize_columns(&gaussian_matrix(&mut rng, r + extra, r)).unwrap();
        let ensemble = ensemble_from_isometry(&rho, &w).unwrap();
        prop_assert_eq!(ensemble.members.len(), r + extra);
        prop_assert!(ensemble.reconstruct().max_abs_diff(rho.matrix()) < 1e-8);
        prop_assert!((ensemble.weights().iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn concurrence_is_cut_symmetric_and_bounded(dims in dims_strategy(3..=3), seed: u64, focus in 0usize..3) {
        let psi = haar_random_pure(&dims, seed).unwrap();
        let rest: Vec<usize> = (0..3).filter(|&k| k != focus).collect();
        let a = pure_concurrence(&psi, &Bipartition::single(3, focus).unwrap()).unwrap();
        let b = pure_concurrence(&psi, &Bipartition::new(3, &rest).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        let d = dims[focus].min(dims.iter().product::<usize>() / dims[focus]) as f64;
        prop_assert!(a <= (2.0 * (1.0 - 1.0 / d)).sqrt() + 1e-10);
    }

    #[test]
    fn tau_dominates_pure_concurrence(d1 in 2usize..=4, d2 in 2usize..=4, seed: u64) {
        let psi = haar_random_pure(&[d1, d2], seed).unwrap();
        let (c, tau) = pure_state_tau_gap(&psi, &Bipartition::single(2, 0).unwrap()).unwrap();
        prop_assert!(tau >= c - 1e-10);
    }

    #[test]
    fn two_qubit_assistance_dominates_wootters(rank in 1usize..=4, seed: u64) {
        let rho = random_mixed_state(&[2, 2], rank, seed).unwrap();
        let coa = two_qubit_coa(&rho).unwrap();
        prop_assert!(coa >= wootters_concurrence(&rho).unwrap() - 1e-10);
        prop_assert_eq!(coa, tau_a(&rho).unwrap().tau);
    }

    #[test]
    fn polygamy_slack_is_nonnegative(dims in dims_strategy(3..=4), seed: u64, focus in 0usize..4) {
        let focus = focus % dims.len();
        let psi = haar_random_pure(&dims, seed).unwrap();
        let report = polygamy_report_general(&psi, focus).unwrap();
        prop_assert!(report.slack >= -1e-9);
        prop_assert!((report.rhs_terms.iter().sum::<f64>() - report.rhs_squared_sum).abs() < 1e-12);
        let diag = subspace_sum_diagnostic(&psi, focus).unwrap();
        prop_assert!(diag.excess() >= -1e-9);
        prop_assert!((diag.cut_concurrence_sq - report.lhs_squared).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip_is_exact(dims in dims_strategy(1..=3), rank in 1usize..=3, seed: u64) {
        let psi = haar_random_pure(&dims, seed).unwrap();
        let back = State::from_json_str(&State::Pure(psi.clone()).to_json_string()).unwrap();
        prop_assert_eq!(back, State::Pure(psi));
        let rank = rank.min(dims.iter().product());
        let rho = random_mixed_state(&dims, rank, seed).unwrap();
        let back = State::from_json_str(&State::Mixed(rho.clone()).to_json_string()).unwrap();
        prop_assert_eq!(back, State::Mixed(rho));
    }

    #[test]
    fn conjugation_is_an_involution(rows in 1usize..=5, cols in 1usize..=5, seed: u64) {
        let mut rng = rng_for(seed, 0);
        let a: ComplexMatrix = gaussian_matrix(&mut rng, rows, cols);
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        prop_assert_eq!(a.adjoint(), a.conj().transpose());
    }
}

#[test]
fn product_kets_have_zero_concurrence() {
    let psi = Ket::basis(vec![3, 2, 4], &[2, 1, 3]).unwrap();
    for focus in 0..3 {
        assert_eq!(pure_concurrence(&psi, &Bipartition::single(3, focus).unwrap()).unwrap(), 0.0);
    }
}
