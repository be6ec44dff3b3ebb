//! Concurrence, two-qubit assistance and the subspace-sum upper bound τᵃ.
//!
//! A pair `m = (i, j)` with `i < j` selects the two-dimensional subspace
//! span{|i⟩, |j⟩} of one party. For a bipartite operator and pairs `(m, n)`
//! the generalized spin flip is `(L_m ⊗ L_n) ρ* (L_m ⊗ L_n)` with
//! `L_(i,j) = −|i⟩⟨j| + |j⟩⟨i|`, and τᵃ sums the fidelities of ρ with every
//! such flipped operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    fidelity_with_sqrt, hermitian_eigensystem, psd_sqrt, sqrt_spectrum, ComplexMatrix, C64, JACOBI_TOL, ONE,
};
use crate::states::{Bipartition, DensityMatrix, Ket};

/// Projections with trace at or below this give a zero fidelity term.
pub const ZERO_PROJECTION_TOL: f64 = 1e-14;

/// Ordered pairs `(i, j)`, `0 ≤ i < j < d`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndexSpace {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndexSpace {
    pub fn new(d: usize) -> Self {
        let pairs = (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
        PairIndexSpace { d, pairs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// d(d−1)/2.
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn get(&self, m: usize) -> Option<(usize, usize)> {
        self.pairs.get(m).copied()
    }
}

fn check_pair(d: usize, (i, j): (usize, usize)) -> Result<()> {
    if i < j && j < d {
        Ok(())
    } else {
        Err(Error::InvalidPair { d, i, j })
    }
}

/// L = −|i⟩⟨j| + |j⟩⟨i| on a d-dimensional space.
pub fn generator_l(d: usize, pair: (usize, usize)) -> Result<ComplexMatrix> {
    check_pair(d, pair)?;
    let mut l = ComplexMatrix::zeros(d, d);
    l[(pair.0, pair.1)] = -ONE;
    l[(pair.1, pair.0)] = ONE;
    Ok(l)
}

fn require_bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidSubsystems(format!(
            "expected a bipartite state, got {} subsystems; flatten along a cut first",
            dims.len()
        ))),
    }
}

/// √(2(1 − tr ρ_A²)) with ρ_A the reduced state on the first group of `cut`.
pub fn pure_concurrence(psi: &Ket, cut: &Bipartition) -> Result<f64> {
    psi.require_normalized()?;
    let a = psi.coefficient_matrix(cut)?;
    let rho_a = &a * &a.adjoint();
    let purity: f64 = rho_a.as_slice().iter().map(|z| z.norm_sqr()).sum();
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt())
}

/// 2 √(Σ_{i<j} Σ_{k<l} |a_ik a_jl − a_il a_jk|²) over the coefficient matrix.
/// Homogeneous of degree two, so it also applies to subnormalized kets.
pub fn coefficient_concurrence(a: &ComplexMatrix) -> f64 {
    let (rows, cols) = (a.rows(), a.cols());
    let mut sum = 0.0;
    for i in 0..rows {
        for j in (i + 1)..rows {
            for k in 0..cols {
                for l in (k + 1)..cols {
                    sum += (a[(i, k)] * a[(j, l)] - a[(i, l)] * a[(j, k)]).norm_sqr();
                }
            }
        }
    }
    2.0 * sum.sqrt()
}

/// Concurrence from the coefficient (2×2 minor) form.
pub fn pure_concurrence_from_coefficients(psi: &Ket, cut: &Bipartition) -> Result<f64> {
    psi.require_normalized()?;
    Ok(coefficient_concurrence(&psi.coefficient_matrix(cut)?))
}

/// ⟨ψ|(L_m ⊗ L_n)|ψ*⟩ for a bipartite ket; equals 2·conj(a_ik a_jl − a_il a_jk).
pub fn subspace_amplitude(psi: &Ket, m: (usize, usize), n: (usize, usize)) -> Result<C64> {
    let (d1, d2) = require_bipartite(psi.dims())?;
    check_pair(d1, m)?;
    check_pair(d2, n)?;
    let a = psi.amplitudes();
    let at = |x: usize, y: usize| a[x * d2 + y];
    let (i, j) = m;
    let (k, l) = n;
    Ok(2.0 * (at(i, k) * at(j, l) - at(i, l) * at(j, k)).conj())
}

/// |⟨ψ|(L_m ⊗ L_n)|ψ*⟩|², the squared concurrence of ψ projected onto the
/// two-qubit subspace selected by `(m, n)`.
pub fn subspace_term(psi: &Ket, m: (usize, usize), n: (usize, usize)) -> Result<f64> {
    Ok(subspace_amplitude(psi, m, n)?.norm_sqr())
}

/// Composite indices |ik⟩, |il⟩, |jk⟩, |jl⟩ of the pair subspace, the index each
/// one is mapped to by L_m ⊗ L_n, and the sign of that entry.
fn flip_support(d2: usize, (i, j): (usize, usize), (k, l): (usize, usize)) -> [(usize, usize, f64); 4] {
    let ix = |x: usize, y: usize| x * d2 + y;
    [
        (ix(i, k), ix(j, l), 1.0),
        (ix(i, l), ix(j, k), -1.0),
        (ix(j, k), ix(i, l), -1.0),
        (ix(j, l), ix(i, k), 1.0),
    ]
}

fn flipped_matrix(rho: &ComplexMatrix, d2: usize, m: (usize, usize), n: (usize, usize)) -> ComplexMatrix {
    let support = flip_support(d2, m, n);
    let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
    for &(x, px, sx) in &support {
        for &(y, py, sy) in &support {
            out[(x, y)] = rho[(px, py)].conj() * (sx * sy);
        }
    }
    out
}

fn projected_trace(rho: &ComplexMatrix, d2: usize, m: (usize, usize), n: (usize, usize)) -> f64 {
    flip_support(d2, m, n).iter().map(|&(x, _, _)| rho[(x, x)].re).sum()
}

/// (L_m ⊗ L_n) ρ* (L_m ⊗ L_n).
pub fn rho_tilde(rho: &DensityMatrix, m: (usize, usize), n: (usize, usize)) -> Result<DensityMatrix> {
    let (d1, d2) = require_bipartite(rho.dims())?;
    check_pair(d1, m)?;
    check_pair(d2, n)?;
    Ok(DensityMatrix::from_parts(rho.dims().to_vec(), flipped_matrix(rho.matrix(), d2, m, n)))
}

/// Fidelity terms F[ρ, ρ̃_mn] over all pair combinations and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub d1: usize,
    pub d2: usize,
    /// `terms[m][n]`, pairs in lexicographic order.
    pub terms: Vec<Vec<f64>>,
    pub tau: f64,
}

impl TauReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("TauReport serializes")
    }
}

/// τᵃ(ρ) = Σ_{m,n} F[ρ, (L_m ⊗ L_n) ρ* (L_m ⊗ L_n)], an upper bound on the
/// concurrence of assistance of a bipartite state.
pub fn tau_a(rho: &DensityMatrix) -> Result<TauReport> {
    let (d1, d2) = require_bipartite(rho.dims())?;
    rho.require_normalized()?;
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    let pa = PairIndexSpace::new(d1);
    let pb = PairIndexSpace::new(d2);
    let mut terms = Vec::with_capacity(pa.count());
    let mut tau = 0.0;
    for &m in pa.pairs() {
        let mut row = Vec::with_capacity(pb.count());
        for &n in pb.pairs() {
            let term = if projected_trace(rho.matrix(), d2, m, n) <= ZERO_PROJECTION_TOL {
                0.0
            } else {
                fidelity_with_sqrt(&sqrt_rho, &flipped_matrix(rho.matrix(), d2, m, n))?
            };
            tau += term;
            row.push(term);
        }
        terms.push(row);
    }
    Ok(TauReport { d1, d2, terms, tau })
}

/// τᵃ of a multipartite state evaluated across `cut`.
pub fn tau_a_across(rho: &DensityMatrix, cut: &Bipartition) -> Result<TauReport> {
    tau_a(&rho.flatten(cut)?)
}

/// Left-hand side convention for pure states: the concurrence across the cut.
pub fn tau_a_pure_cut(psi: &Ket, cut: &Bipartition) -> Result<f64> {
    pure_concurrence(psi, cut)
}

/// Concurrence of assistance of a two-qubit state, F[ρ, ρ̃].
pub fn two_qubit_coa(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    rho.require_normalized()?;
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    fidelity_with_sqrt(&sqrt_rho, &flipped_matrix(rho.matrix(), 2, (0, 1), (0, 1)))
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::InvalidDims(format!("expected two qubits, got dims {:?}", rho.dims())));
    }
    Ok(())
}

/// Two-qubit concurrence max(0, λ₁ − λ₂ − λ₃ − λ₄), λ the descending square
/// roots of the spectrum of ρ (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y).
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    rho.require_normalized()?;
    let i = C64::new(0.0, 1.0);
    let sy = ComplexMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)])?;
    let yy = crate::linalg::tensor_product(&sy, &sy);
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let s = psd_sqrt(rho.matrix())?;
    // ρρ̃ and √ρ ρ̃ √ρ share their spectrum; the latter is Hermitian.
    let inner = (&(&s * &flipped) * &s).hermitian_part();
    let eig = hermitian_eigensystem(&inner, JACOBI_TOL)?;
    let l = sqrt_spectrum(&eig.values);
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Concurrence and τᵃ of the same pure state across `cut`. The first is the
/// ℓ₂ norm of the subspace amplitudes and the second their ℓ₁ norm.
pub fn pure_state_tau_gap(psi: &Ket, cut: &Bipartition) -> Result<(f64, f64)> {
    let c = pure_concurrence(psi, cut)?;
    let tau = tau_a(&psi.flatten(cut)?.to_density())?.tau;
    Ok((c, tau))
}
