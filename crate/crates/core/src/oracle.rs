//! Brute-force lower bound on the concurrence of assistance.
//!
//! Every N×r isometry W gives a valid decomposition of ρ through
//! [`ensemble_from_isometry`](crate::states::ensemble_from_isometry), so the
//! best average concurrence seen during the search is a certified lower bound
//! on C^a(ρ). Nothing here claims to reach the maximum.
//!
//! The search follows a fixed schedule and the budget only truncates it:
//!
//! 1. `RESTART_CANDIDATES` starting isometries are scored: the padded
//!    eigen-ensemble first, then random isometries from the orthonormalized
//!    columns of complex Gaussian matrices.
//! 2. The best `REFINERS` of them are refined round-robin by local moves
//!    `W ← exp(iεH) W` with `H` a random Hermitian direction of unit Frobenius
//!    norm, keeping a move only if it improves the average. ε starts at
//!    `INITIAL_STEP` and halves after `PATIENCE` consecutive rejections.
//!
//! Because a larger budget only extends the schedule, the result is monotone
//! in the budget, and refiners are independent so they run in parallel.

use rand::Rng;
use rayon::prelude::*;

use crate::concurrence::coefficient_concurrence;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, orthonormalize_columns, ComplexMatrix, C64, JACOBI_TOL};
use crate::states::{default_ensemble_size, gaussian_matrix, rng_for, Bipartition, DensityMatrix, Ensemble};

pub const RESTART_CANDIDATES: usize = 16;
pub const REFINERS: usize = 4;
pub const INITIAL_STEP: f64 = 0.05;
pub const PATIENCE: usize = 50;
/// Convergence window and threshold on the best-so-far value.
pub const CONVERGENCE_WINDOW: usize = 200;
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Stream offset separating refiner generators from restart generators.
const REFINER_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Best Σ_i C(ξ_i) found.
    pub best_average: f64,
    /// Decomposition attaining `best_average`, over the flattened two-party dims.
    pub best_ensemble: Ensemble,
    pub iterations_used: usize,
    /// Improvement over the last `CONVERGENCE_WINDOW` iterations below `CONVERGENCE_TOL`.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    /// Decomposition size N; defaults to rank + 2 capped at rank².
    pub ensemble_size: Option<usize>,
    pub budget: usize,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { ensemble_size: None, budget: 5000, seed: 0 }
    }
}

/// Objective: Σ_i C(ξ_i) for ξ_i = Σ_j W_ij b_j, with b_j the eigen-factor columns.
struct Objective {
    d1: usize,
    d2: usize,
    factor: ComplexMatrix,
}

impl Objective {
    fn members(&self, w: &ComplexMatrix) -> ComplexMatrix {
        // Row i of W·Bᵀ holds the amplitudes of ξ_i.
        w * &self.factor.transpose()
    }

    fn value(&self, w: &ComplexMatrix) -> f64 {
        let xi = self.members(w);
        let n = self.d1 * self.d2;
        (0..xi.rows())
            .map(|i| {
                let coeffs = ComplexMatrix::from_vec(self.d1, self.d2, xi.as_slice()[i * n..(i + 1) * n].to_vec())
                    .expect("member amplitudes are finite");
                coefficient_concurrence(&coeffs)
            })
            .sum()
    }
}

fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    loop {
        if let Ok(w) = orthonormalize_columns(&gaussian_matrix(rng, rows, cols)) {
            return w;
        }
    }
}

fn padded_identity(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// exp(iεH) for a random Hermitian H with ‖H‖_F = 1.
fn random_unitary_step<R: Rng + ?Sized>(rng: &mut R, n: usize, step: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n).hermitian_part();
    let h = g.scale_real(1.0 / g.frobenius_norm().max(f64::MIN_POSITIVE));
    let eig = hermitian_eigensystem(&h, JACOBI_TOL).expect("Hermitian by construction");
    let v = &eig.vectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, step * lambda);
        for r in 0..n {
            let vr = v[(r, k)] * phase;
            for c in 0..n {
                out[(r, c)] += vr * v[(c, k)].conj();
            }
        }
    }
    out
}

struct RefinerRun {
    /// Best-so-far after each local step.
    history: Vec<f64>,
    best: f64,
    best_w: ComplexMatrix,
}

fn refine(
    objective: &Objective,
    start: ComplexMatrix,
    start_value: f64,
    steps: usize,
    mut rng: impl Rng,
    observer: &(dyn Fn(f64) + Sync),
) -> RefinerRun {
    let n = start.rows();
    let mut w = start;
    let mut value = start_value;
    let mut step = INITIAL_STEP;
    let mut failures = 0;
    let mut history = Vec::with_capacity(steps);
    for _ in 0..steps {
        let u = random_unitary_step(&mut rng, n, step);
        let candidate = &u * &w;
        let v = objective.value(&candidate);
        observer(v);
        if v > value {
            value = v;
            w = candidate;
            failures = 0;
        } else {
            failures += 1;
            if failures >= PATIENCE {
                step *= 0.5;
                failures = 0;
            }
        }
        history.push(value);
    }
    RefinerRun { history, best: value, best_w: w }
}

/// Searches pure-state decompositions of `rho` (grouped along `cut`) for the
/// largest average concurrence.
pub fn optimize_coa_lower_bound(rho: &DensityMatrix, cut: &Bipartition, params: OracleParams) -> Result<OracleResult> {
    optimize_coa_lower_bound_observed(rho, cut, params, &|_| {})
}

/// As [`optimize_coa_lower_bound`]; `observer` sees the average concurrence of
/// every decomposition evaluated.
pub fn optimize_coa_lower_bound_observed(
    rho: &DensityMatrix,
    cut: &Bipartition,
    params: OracleParams,
    observer: &(dyn Fn(f64) + Sync),
) -> Result<OracleResult> {
    rho.require_normalized()?;
    if params.budget == 0 {
        return Err(Error::Invalid("oracle budget must be at least one iteration".into()));
    }
    let flat = rho.flatten(cut)?;
    let (d1, d2) = (flat.dims()[0], flat.dims()[1]);
    let factor = flat.eigen_factor()?;
    let rank = factor.cols();
    let size = params.ensemble_size.unwrap_or_else(|| default_ensemble_size(rank));
    if size < rank {
        return Err(Error::EnsembleTooSmall { size, rank });
    }
    let objective = Objective { d1, d2, factor };
    let budget = params.budget;

    let restarts = budget.min(RESTART_CANDIDATES);
    let candidates: Vec<(ComplexMatrix, f64)> = (0..restarts)
        .into_par_iter()
        .map(|c| {
            let w = if c == 0 {
                padded_identity(size, rank)
            } else {
                random_isometry(&mut rng_for(params.seed, c as u64), size, rank)
            };
            let v = objective.value(&w);
            observer(v);
            (w, v)
        })
        .collect();
    let mut history: Vec<f64> = Vec::with_capacity(budget);
    for (_, v) in &candidates {
        let prev = history.last().copied().unwrap_or(f64::NEG_INFINITY);
        history.push(prev.max(*v));
    }

    // Stable sort keeps ties in restart order.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].1.total_cmp(&candidates[a].1));
    let refiners = order.len().min(REFINERS);
    let local_budget = budget - restarts;
    let runs: Vec<RefinerRun> = (0..refiners)
        .into_par_iter()
        .map(|k| {
            let steps = if local_budget > k { (local_budget - k - 1) / refiners + 1 } else { 0 };
            let (w, v) = &candidates[order[k]];
            let rng = rng_for(params.seed, REFINER_STREAM + k as u64);
            refine(&objective, w.clone(), *v, steps, rng, observer)
        })
        .collect();

    let phase_a_best = *history.last().expect("at least one restart");
    for t in 0..local_budget {
        let (k, step) = (t % refiners, t / refiners);
        let prev = *history.last().expect("nonempty");
        history.push(prev.max(runs[k].history[step]).max(phase_a_best));
    }

    let mut best_value = candidates[order[0]].1;
    let mut best_w = &candidates[order[0]].0;
    for run in &runs {
        if run.best > best_value {
            best_value = run.best;
            best_w = &run.best_w;
        }
    }
    let iterations_used = history.len();
    let converged = iterations_used > CONVERGENCE_WINDOW
        && history[iterations_used - 1] - history[iterations_used - 1 - CONVERGENCE_WINDOW] < CONVERGENCE_TOL;

    Ok(OracleResult {
        best_average: best_value,
        best_ensemble: Ensemble::from_factor(flat.dims(), &objective.factor, best_w),
        iterations_used,
        converged,
    })
}

/// τᵃ(ρ) minus the oracle's lower bound; negative values beyond the optimizer's
/// rounding would contradict the upper bound.
pub fn bound_consistency_check(rho: &DensityMatrix, cut: &Bipartition, params: OracleParams) -> Result<f64> {
    let tau = crate::concurrence::tau_a_across(rho, cut)?.tau;
    Ok(tau - optimize_coa_lower_bound(rho, cut, params)?.best_average)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concurrence::{pure_concurrence, two_qubit_coa};
    use crate::states::{ghz_state, haar_random_pure, random_mixed_state, w_state, Ket};
    use std::sync::Mutex;

    fn cut() -> Bipartition {
        Bipartition::single(2, 0).unwrap()
    }

    fn params(budget: usize, seed: u64) -> OracleParams {
        OracleParams { ensemble_size: None, budget, seed }
    }

    #[test]
    fn pure_state_is_immediate() {
        let psi = haar_random_pure(&[3, 3], 4).unwrap();
        let c = pure_concurrence(&psi, &cut()).unwrap();
        let r = optimize_coa_lower_bound(&psi.to_density(), &cut(), params(1, 0)).unwrap();
        assert_eq!(r.iterations_used, 1);
        assert!((r.best_average - c).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_two_qubits_reaches_one() {
        let id = DensityMatrix::new(vec![2, 2], ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        let r = optimize_coa_lower_bound(&id, &cut(), params(3000, 1)).unwrap();
        assert!(r.best_average <= 1.0 + 1e-12);
        assert!(r.best_average > 1.0 - 1e-3, "{}", r.best_average);
    }

    #[test]
    fn two_qubit_states_approach_closed_form() {
        for seed in 0..5 {
            let rho = random_mixed_state(&[2, 2], 1 + seed as usize % 4, 300 + seed).unwrap();
            let r = optimize_coa_lower_bound(&rho, &cut(), params(5000, seed)).unwrap();
            let exact = two_qubit_coa(&rho).unwrap();
            assert!((exact - r.best_average).abs() < 1e-3, "seed {seed}: {exact} vs {}", r.best_average);
        }
    }

    #[test]
    fn result_invariants() {
        let rho = random_mixed_state(&[2, 3], 3, 8).unwrap();
        let r = optimize_coa_lower_bound(&rho, &cut(), params(600, 2)).unwrap();
        let recon = r.best_ensemble.reconstruct();
        assert!((&recon - rho.matrix()).frobenius_norm() < 1e-8);
        let recomputed: f64 = r
            .best_ensemble
            .members
            .iter()
            .map(|m| {
                coefficient_concurrence(&ComplexMatrix::from_vec(2, 3, m.amplitudes().to_vec()).unwrap())
            })
            .sum();
        assert!((recomputed - r.best_average).abs() < 1e-10);
        assert_eq!(r.best_ensemble.members.len(), default_ensemble_size(3));
    }

    #[test]
    fn best_so_far_dominates_every_evaluation() {
        let rho = random_mixed_state(&[3, 3], 2, 13).unwrap();
        let seen = Mutex::new(Vec::new());
        let r = optimize_coa_lower_bound_observed(&rho, &cut(), params(400, 3), &|v| seen.lock().unwrap().push(v))
            .unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), 400);
        assert!(seen.iter().all(|&v| v <= r.best_average + 1e-12));
    }

    #[test]
    fn deterministic_and_monotone_in_budget() {
        let rho = random_mixed_state(&[3, 3], 3, 21).unwrap();
        let a = optimize_coa_lower_bound(&rho, &cut(), params(500, 9)).unwrap();
        let b = optimize_coa_lower_bound(&rho, &cut(), params(500, 9)).unwrap();
        assert_eq!(a.best_average, b.best_average);
        assert_eq!(a.best_ensemble.reconstruct(), b.best_ensemble.reconstruct());
        let mut prev = 0.0;
        for budget in [1, 2, 5, 16, 17, 40, 100, 400, 1600] {
            let r = optimize_coa_lower_bound(&rho, &cut(), params(budget, 9)).unwrap();
            assert!(r.best_average >= prev, "budget {budget}");
            prev = r.best_average;
        }
    }

    #[test]
    fn consistency_gap_on_qutrits() {
        for seed in 0..5 {
            let rho = random_mixed_state(&[3, 3], 2, 50 + seed).unwrap();
            let gap = bound_consistency_check(&rho, &cut(), params(800, seed)).unwrap();
            assert!(gap >= -1e-6, "seed {seed}: gap {gap}");
        }
    }

    #[test]
    fn product_with_a_pure_factor_has_nothing_to_distribute() {
        let a = Ket::basis(vec![3], &[1]).unwrap().to_density();
        let b = random_mixed_state(&[3], 3, 2).unwrap();
        let m = crate::linalg::tensor_product(a.matrix(), b.matrix());
        let rho = DensityMatrix::new(vec![3, 3], m).unwrap();
        let tau = crate::concurrence::tau_a(&rho).unwrap().tau;
        let r = optimize_coa_lower_bound(&rho, &cut(), params(300, 0)).unwrap();
        assert!(tau.abs() < 1e-8);
        assert!(r.best_average.abs() < 1e-8);
    }

    #[test]
    fn product_of_mixed_factors_still_respects_bound() {
        // I/2 ⊗ I/2 = I/4 decomposes into Bell states, so assistance is not zero here.
        let a = random_mixed_state(&[2], 2, 1).unwrap();
        let b = random_mixed_state(&[3], 2, 2).unwrap();
        let rho = DensityMatrix::new(vec![2, 3], crate::linalg::tensor_product(a.matrix(), b.matrix())).unwrap();
        let gap = bound_consistency_check(&rho, &cut(), params(500, 0)).unwrap();
        assert!(gap >= -1e-6);
    }

    #[test]
    fn multipartite_input_uses_cut() {
        let w = w_state(3).unwrap().to_density();
        let cut = Bipartition::single(3, 0).unwrap();
        let r = optimize_coa_lower_bound(&w, &cut, params(10, 0)).unwrap();
        assert!((r.best_average - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-10);
    }

    #[test]
    fn errors() {
        let rho = random_mixed_state(&[2, 2], 3, 0).unwrap();
        let small = OracleParams { ensemble_size: Some(2), budget: 10, seed: 0 };
        assert!(matches!(optimize_coa_lower_bound(&rho, &cut(), small), Err(Error::EnsembleTooSmall { .. })));
        assert!(optimize_coa_lower_bound(&rho, &cut(), params(0, 0)).is_err());
        let bell = ghz_state(2, 2).unwrap().to_density();
        assert!(optimize_coa_lower_bound(&bell, &Bipartition::single(3, 0).unwrap(), params(5, 0)).is_err());
    }
}
