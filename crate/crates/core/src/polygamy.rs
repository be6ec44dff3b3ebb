//! Polygamy inequality checkers for pure multipartite states.
//!
//! Both checkers compare the squared concurrence across `focus | rest` with
//! the sum of squared pairwise assisted quantities between the focus and each
//! other party. Slack is `rhs − lhs` and is never clamped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concurrence::{pure_concurrence, tau_a, tau_a_pure_cut, two_qubit_coa, PairIndexSpace};
use crate::error::{Error, Result};
use crate::linalg::{compose, C64, ZERO};
use crate::states::{Bipartition, Ket};

/// Upper limit on the number of pair tuples the subspace diagnostic enumerates.
pub const MAX_SUBSPACE_TUPLES: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Pairwise terms are (C^a)² from the exact two-qubit formula.
    MultiQubitCoa,
    /// Pairwise terms are (τᵃ)² in arbitrary local dimensions.
    GeneralTau,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::MultiQubitCoa => "multi-qubit-coa",
            Mode::GeneralTau => "general-tau",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi-qubit-coa" => Ok(Mode::MultiQubitCoa),
            "general-tau" => Ok(Mode::GeneralTau),
            other => Err(Error::Invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygamyReport {
    pub mode: Mode,
    pub dims: Vec<usize>,
    pub focus: usize,
    /// C² across `focus | rest`.
    pub lhs_squared: f64,
    /// Partner subsystem of each entry of `rhs_terms`, ascending.
    pub partners: Vec<usize>,
    pub rhs_terms: Vec<f64>,
    pub rhs_squared_sum: f64,
    pub slack: f64,
}

impl PolygamyReport {
    fn assemble(mode: Mode, psi: &Ket, focus: usize, lhs: f64, partners: Vec<usize>, rhs_terms: Vec<f64>) -> Self {
        let rhs_squared_sum: f64 = rhs_terms.iter().sum();
        PolygamyReport {
            mode,
            dims: psi.dims().to_vec(),
            focus,
            lhs_squared: lhs,
            partners,
            rhs_terms,
            rhs_squared_sum,
            slack: rhs_squared_sum - lhs,
        }
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn is_violation(&self, tol: f64) -> bool {
        self.slack < -tol
    }

    pub fn csv_header(&self) -> String {
        let mut cols: Vec<String> =
            ["state_id", "mode", "n", "dims", "focus", "lhs_sq", "rhs_sq_sum", "slack"].map(String::from).to_vec();
        cols.extend(self.partners.iter().map(|k| format!("rhs_sq_{k}")));
        cols.join(",")
    }

    pub fn csv_row(&self, state_id: &str) -> String {
        let mut cols = vec![
            state_id.to_string(),
            self.mode.to_string(),
            self.n().to_string(),
            format_dims(&self.dims),
            self.focus.to_string(),
            format_float(self.lhs_squared),
            format_float(self.rhs_squared_sum),
            format_float(self.slack),
        ];
        cols.extend(self.rhs_terms.iter().map(|&x| format_float(x)));
        cols.join(",")
    }
}

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `2x3x4`.
pub fn format_dims(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

fn check_focus(psi: &Ket, focus: usize) -> Result<()> {
    if focus >= psi.dims().len() {
        return Err(Error::InvalidSubsystems(format!(
            "focus {focus} out of range for {} subsystems",
            psi.dims().len()
        )));
    }
    Ok(())
}

fn require_parties(psi: &Ket, min: usize) -> Result<()> {
    if psi.dims().len() < min {
        return Err(Error::InvalidSubsystems(format!(
            "need at least {min} subsystems, got {}",
            psi.dims().len()
        )));
    }
    Ok(())
}

fn partners(n: usize, focus: usize) -> Vec<usize> {
    (0..n).filter(|&k| k != focus).collect()
}

/// (τᵃ_{A₁(A₂⋯A_n)})² against Σ_k (τᵃ_{A₁A_k})² in arbitrary local dimensions.
pub fn polygamy_report_general(psi: &Ket, focus: usize) -> Result<PolygamyReport> {
    require_parties(psi, 3)?;
    check_focus(psi, focus)?;
    psi.require_normalized()?;
    let n = psi.dims().len();
    let lhs = tau_a_pure_cut(psi, &Bipartition::single(n, focus)?)?.powi(2);
    let ks = partners(n, focus);
    let rhs = ks
        .iter()
        .map(|&k| Ok(tau_a(&psi.reduced(&[focus, k])?)?.tau.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PolygamyReport::assemble(Mode::GeneralTau, psi, focus, lhs, ks, rhs))
}

/// C²_{A₁(A₂⋯A_n)} against Σ_k (C^a_{A₁A_k})² for n qubits.
pub fn polygamy_report_multiqubit(psi: &Ket, focus: usize) -> Result<PolygamyReport> {
    if let Some(d) = psi.dims().iter().find(|&&d| d != 2) {
        return Err(Error::InvalidDims(format!("multi-qubit check needs all dimensions 2, found {d}")));
    }
    require_parties(psi, 2)?;
    check_focus(psi, focus)?;
    psi.require_normalized()?;
    let n = psi.dims().len();
    let lhs = pure_concurrence(psi, &Bipartition::single(n, focus)?)?.powi(2);
    let ks = partners(n, focus);
    let rhs = ks
        .iter()
        .map(|&k| Ok(two_qubit_coa(&psi.reduced(&[focus, k])?)?.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PolygamyReport::assemble(Mode::MultiQubitCoa, psi, focus, lhs, ks, rhs))
}

pub fn polygamy_report(psi: &Ket, focus: usize, mode: Mode) -> Result<PolygamyReport> {
    match mode {
        Mode::GeneralTau => polygamy_report_general(psi, focus),
        Mode::MultiQubitCoa => polygamy_report_multiqubit(psi, focus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDiagnostic {
    /// C² across `focus | rest`.
    pub cut_concurrence_sq: f64,
    /// Σ over all pair tuples (m₁, m₂, …, m_n) of the squared concurrence of
    /// the projected n-qubit state across the same cut.
    pub subspace_sum_sq: f64,
    pub tuples: u64,
}

impl SubspaceDiagnostic {
    pub fn excess(&self) -> f64 {
        self.subspace_sum_sq - self.cut_concurrence_sq
    }
}

/// Enumerates every tuple of local pairs, projects ψ onto the corresponding
/// n-qubit subspace and sums its squared concurrence across `focus | rest`.
pub fn subspace_sum_diagnostic(psi: &Ket, focus: usize) -> Result<SubspaceDiagnostic> {
    require_parties(psi, 3)?;
    check_focus(psi, focus)?;
    psi.require_normalized()?;
    let dims = psi.dims();
    let n = dims.len();
    let spaces: Vec<PairIndexSpace> = dims.iter().map(|&d| PairIndexSpace::new(d)).collect();
    let tuples = spaces.iter().try_fold(1u128, |acc, s| acc.checked_mul(s.count() as u128));
    let tuples = match tuples {
        Some(t) if t <= MAX_SUBSPACE_TUPLES => t as u64,
        Some(t) => return Err(Error::TooManySubspaces(t)),
        None => return Err(Error::TooManySubspaces(u128::MAX)),
    };
    let cut_concurrence_sq = pure_concurrence(psi, &Bipartition::single(n, focus)?)?.powi(2);

    let others = partners(n, focus);
    let rest_states = 1usize << others.len();
    let amps = psi.amplitudes();
    let counts: Vec<usize> = spaces.iter().map(PairIndexSpace::count).collect();
    let mut choice = vec![0usize; n];
    let mut digits = vec![0usize; n];
    let mut u = vec![ZERO; rest_states];
    let mut v = vec![ZERO; rest_states];
    let mut total = 0.0;
    for t in 0..tuples {
        // choice[k] = index of the pair selected on subsystem k
        let mut rem = t as usize;
        for k in (0..n).rev() {
            choice[k] = rem % counts[k];
            rem /= counts[k];
        }
        let pair = |k: usize, bit: usize| {
            let (i, j) = spaces[k].pairs()[choice[k]];
            if bit == 0 {
                i
            } else {
                j
            }
        };
        for (side, target) in [(0usize, &mut u), (1usize, &mut v)] {
            digits[focus] = pair(focus, side);
            for (r, slot) in target.iter_mut().enumerate() {
                for (pos, &k) in others.iter().enumerate() {
                    let bit = (r >> (others.len() - 1 - pos)) & 1;
                    digits[k] = pair(k, bit);
                }
                *slot = amps[compose(&digits, dims)];
            }
        }
        // Squared concurrence of the two-row coefficient matrix [u; v]:
        // 4 (|u|²|v|² − |⟨u, v⟩|²).
        let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let uv: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        total += (4.0 * (uu * vv - uv.norm_sqr())).max(0.0);
    }
    Ok(SubspaceDiagnostic { cut_concurrence_sq, subspace_sum_sq: total, tuples })
}
