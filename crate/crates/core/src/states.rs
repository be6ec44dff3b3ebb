//! Multipartite kets, density matrices and the generators used to sample them.
//!
//! Randomness comes from ChaCha20 seeded through [`rng_for`]: the 64-bit seed
//! picks the key and the stream number splits independent sub-generators, so
//! sample `k` of a sweep always sees the same numbers regardless of how the
//! work is scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_subsystems, hermitian_eigensystem, isometry_defect, split_index_table, ComplexMatrix, C64, JACOBI_TOL,
    NEGATIVE_EIGENVALUE_TOL,
};

pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalues at or below `RANK_TOL · max(1, λ_max)` do not count towards the rank.
pub const RANK_TOL: f64 = 1e-12;
pub const ISOMETRY_TOL: f64 = 1e-8;

/// Seeded ChaCha20 generator; `stream` selects an independent sub-sequence.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!("subsystem dimension {d} < 2")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidDims(format!("total dimension of {dims:?} overflows")))
}

/// A split of the subsystems into an ordered first group and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    n: usize,
    first: Vec<usize>,
    rest: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, first: &[usize]) -> Result<Self> {
        check_subsystems(first, n)?;
        let rest: Vec<usize> = (0..n).filter(|k| !first.contains(k)).collect();
        if rest.is_empty() {
            return Err(Error::InvalidSubsystems("second group of the cut is empty".into()));
        }
        Ok(Bipartition { n, first: first.to_vec(), rest })
    }

    /// `focus | everything else`.
    pub fn single(n: usize, focus: usize) -> Result<Self> {
        Self::new(n, &[focus])
    }

    pub fn subsystems(&self) -> usize {
        self.n
    }

    pub fn first(&self) -> &[usize] {
        &self.first
    }

    pub fn rest(&self) -> &[usize] {
        &self.rest
    }

    fn check_against(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "cut over {} subsystems applied to a state with {}",
                self.n,
                dims.len()
            )));
        }
        Ok(())
    }
}

/// Pure state (possibly unnormalized) over a mixed-radix computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl Ket {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        Ok(Ket { dims, amplitudes, normalized: (norm_sqr - 1.0).abs() <= NORM_TOL })
    }

    /// Computational basis state |digits⟩.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(x, d)| x >= d) {
            return Err(Error::InvalidDims(format!("basis label {digits:?} for dims {dims:?}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[crate::linalg::compose(digits, &dims)] = C64::new(1.0, 0.0);
        Ket::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn total_dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn scaled(&self, s: C64) -> Ket {
        let amplitudes: Vec<C64> = self.amplitudes.iter().map(|z| z * s).collect();
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        Ket { dims: self.dims.clone(), amplitudes, normalized: (norm_sqr - 1.0).abs() <= NORM_TOL }
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    /// Coefficient matrix `a[x][y]` with `x` running over the first group of
    /// the cut and `y` over the rest.
    pub fn coefficient_matrix(&self, cut: &Bipartition) -> Result<ComplexMatrix> {
        cut.check_against(&self.dims)?;
        let (_, _, table) = split_index_table(&self.dims, cut.first());
        let cols = table.first().map_or(0, |r| r.len());
        Ok(ComplexMatrix::from_fn(table.len(), cols, |x, y| self.amplitudes[table[x][y]]))
    }

    /// Regroups the subsystems into the two-party ket `first ⊗ rest`.
    pub fn flatten(&self, cut: &Bipartition) -> Result<Ket> {
        let m = self.coefficient_matrix(cut)?;
        Ok(Ket {
            dims: vec![m.rows(), m.cols()],
            amplitudes: m.as_slice().to_vec(),
            normalized: self.normalized,
        })
    }

    /// |ψ⟩⟨ψ|.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.dims.clone(), ComplexMatrix::outer(&self.amplitudes, &self.amplitudes))
    }

    /// Reduced state on `keep` (in the listed order), computed from the
    /// amplitudes without forming |ψ⟩⟨ψ|.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_subsystems(keep, self.dims.len())?;
        let (keep_dims, _, table) = split_index_table(&self.dims, keep);
        let n = table.len();
        let amps = &self.amplitudes;
        let m = ComplexMatrix::from_fn(n, n, |a, b| {
            table[a].iter().zip(&table[b]).map(|(&x, &y)| amps[x] * amps[y].conj()).sum()
        });
        Ok(DensityMatrix::from_parts(keep_dims, m))
    }

    pub fn to_json(&self) -> KetJson {
        KetJson {
            dims: self.dims.clone(),
            re: self.amplitudes.iter().map(|z| z.re).collect(),
            im: self.amplitudes.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_json(json: &KetJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(Error::Invalid("re and im arrays differ in length".into()));
        }
        let amps = json.re.iter().zip(&json.im).map(|(&r, &i)| C64::new(r, i)).collect();
        Ket::new(json.dims.clone(), amps)
    }
}

/// Hermitian PSD operator with subsystem structure; trace ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, PSD and trace at most one.
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if !matrix.is_square() || matrix.rows() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let rho = DensityMatrix { dims, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// No validation; for operators that are PSD by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        DensityMatrix { dims, matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let eig = hermitian_eigensystem(&self.matrix, JACOBI_TOL)?;
        if let Some(&low) = eig.values.last() {
            if low < -NEGATIVE_EIGENVALUE_TOL {
                return Err(Error::NotPositive(low));
            }
        }
        let tr = self.trace();
        if tr > 1.0 + NORM_TOL {
            return Err(Error::Invalid(format!("trace {tr} exceeds 1")));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn side(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.trace()))
        }
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        (m * m).trace().re
    }

    /// Regroups the subsystems into the two-party operator `first ⊗ rest`.
    pub fn flatten(&self, cut: &Bipartition) -> Result<DensityMatrix> {
        cut.check_against(&self.dims)?;
        let (keep_dims, rest_dims, table) = split_index_table(&self.dims, cut.first());
        let da: usize = keep_dims.iter().product();
        let db: usize = rest_dims.iter().product();
        let orig = |k: usize| table[k / db][k % db];
        let m = &self.matrix;
        let flat = ComplexMatrix::from_fn(da * db, da * db, |r, c| m[(orig(r), orig(c))]);
        Ok(DensityMatrix::from_parts(vec![da, db], flat))
    }

    /// Columns √λ_j |v_j⟩ over the numerical support, so that ρ = B B†.
    pub fn eigen_factor(&self) -> Result<ComplexMatrix> {
        let eig = hermitian_eigensystem(&self.matrix, JACOBI_TOL)?;
        if let Some(&low) = eig.values.last() {
            if low < -NEGATIVE_EIGENVALUE_TOL {
                return Err(Error::NotPositive(low));
            }
        }
        let cutoff = RANK_TOL * eig.values.first().copied().unwrap_or(0.0).max(1.0);
        let rank = eig.values.iter().take_while(|&&x| x > cutoff).count();
        let n = self.side();
        Ok(ComplexMatrix::from_fn(n, rank, |r, c| eig.vectors[(r, c)] * eig.values[c].sqrt()))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.eigen_factor()?.cols())
    }

    pub fn to_json(&self) -> DensityJson {
        let n = self.side();
        DensityJson {
            dims: self.dims.clone(),
            re: (0..n).map(|r| (0..n).map(|c| self.matrix[(r, c)].re).collect()).collect(),
            im: (0..n).map(|r| (0..n).map(|c| self.matrix[(r, c)].im).collect()).collect(),
        }
    }

    pub fn from_json(json: &DensityJson) -> Result<Self> {
        let n = json.re.len();
        if json.im.len() != n || json.re.iter().chain(&json.im).any(|row| row.len() != n) {
            return Err(Error::Invalid("re and im must be square arrays of equal size".into()));
        }
        let m = ComplexMatrix::from_vec(
            n,
            n,
            (0..n * n).map(|k| C64::new(json.re[k / n][k % n], json.im[k / n][k % n])).collect(),
        )?;
        DensityMatrix::new(json.dims.clone(), m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KetJson {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Either state file layout; the shape of `re` decides which.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Ket(KetJson),
    Density(DensityJson),
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(Ket),
    Mixed(DensityMatrix),
}

impl State {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: StateJson =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed state JSON: {e}")))?;
        match parsed {
            StateJson::Ket(k) => Ok(State::Pure(Ket::from_json(&k)?)),
            StateJson::Density(d) => Ok(State::Mixed(DensityMatrix::from_json(&d)?)),
        }
    }

    pub fn to_json_string(&self) -> String {
        let value = match self {
            State::Pure(k) => serde_json::to_string(&k.to_json()),
            State::Mixed(d) => serde_json::to_string(&d.to_json()),
        };
        value.expect("state serialization cannot fail")
    }
}

/// Pure-state decomposition ρ = Σ_i |ξ_i⟩⟨ξ_i| with subnormalized members
/// |ξ_i⟩ = √p_i |ψ_i⟩.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<Ket>,
}

impl Ensemble {
    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(Ket::norm_sqr).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.members.first().map_or(0, Ket::total_dim);
        self.members.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
            &acc + &ComplexMatrix::outer(k.amplitudes(), k.amplitudes())
        })
    }

    /// Members ξ_i = Σ_j W_ij b_j where b_j are the columns of `factor`.
    pub(crate) fn from_factor(dims: &[usize], factor: &ComplexMatrix, w: &ComplexMatrix) -> Ensemble {
        let rows = factor.rows();
        let members = (0..w.rows())
            .map(|i| {
                let amps = (0..rows)
                    .map(|x| (0..factor.cols()).map(|j| w[(i, j)] * factor[(x, j)]).sum())
                    .collect();
                Ket { dims: dims.to_vec(), amplitudes: amps, normalized: false }
            })
            .collect();
        Ensemble { members }
    }
}

/// Haar-random normalized ket (normalized complex Gaussian vector).
pub fn haar_random_pure(dims: &[usize], seed: u64) -> Result<Ket> {
    haar_random_pure_with(dims, &mut rng_for(seed, 0))
}

pub fn haar_random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Ket> {
    let total = check_dims(dims)?;
    let mut amps: Vec<C64> = (0..total).map(|_| complex_gaussian(rng)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    Ket::new(dims.to_vec(), amps)
}

/// Reduced state of a Haar-random purification with an ancilla of dimension `rank`.
pub fn random_mixed_state(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed_state_with(dims, rank, &mut rng_for(seed, 0))
}

pub fn random_mixed_state_with<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let total = check_dims(dims)?;
    if rank == 0 || rank > total {
        return Err(Error::RankOutOfRange { rank, max: total });
    }
    // Rows of g are the system index, columns the ancilla index of the purification.
    let g = gaussian_matrix(rng, total, rank);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    Ok(DensityMatrix::from_parts(dims.to_vec(), rho.scale_real(1.0 / tr).hermitian_part()))
}

/// a₁|10⋯0⟩ + a₂|010⋯0⟩ + ⋯ + a_n|0⋯01⟩.
pub fn w_class_state(amplitudes: &[C64]) -> Result<Ket> {
    let n = amplitudes.len();
    if n == 0 || n >= usize::BITS as usize {
        return Err(Error::InvalidDims(format!("{n} qubits")));
    }
    let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm_sqr));
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for (k, &a) in amplitudes.iter().enumerate() {
        amps[1 << (n - 1 - k)] = a;
    }
    Ket::new(vec![2; n], amps)
}

/// Equal-amplitude W state on `n` qubits.
pub fn w_state(n: usize) -> Result<Ket> {
    let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    w_class_state(&vec![a; n])
}

/// (1/√d) Σ_j |j⟩^{⊗n}.
pub fn ghz_state(n: usize, d: usize) -> Result<Ket> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidDims(format!("GHZ state needs n ≥ 2 and d ≥ 2, got n={n}, d={d}")));
    }
    let dims = vec![d; n];
    let total = check_dims(&dims)?;
    let mut amps = vec![C64::new(0.0, 0.0); total];
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        amps[crate::linalg::compose(&vec![j; n], &dims)] = a;
    }
    Ket::new(dims, amps)
}

/// Decomposition induced by an N×r isometry `w` on the eigen-ensemble of `rho`:
/// |ξ_i⟩ = Σ_j W_ij √λ_j |v_j⟩. Every pure-state decomposition arises this way.
pub fn ensemble_from_isometry(rho: &DensityMatrix, w: &ComplexMatrix) -> Result<Ensemble> {
    let factor = rho.eigen_factor()?;
    if w.cols() != factor.cols() {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} columns but the state has rank {}",
            w.cols(),
            factor.cols()
        )));
    }
    let defect = isometry_defect(w);
    if defect > ISOMETRY_TOL {
        return Err(Error::NotIsometry(defect));
    }
    Ok(Ensemble::from_factor(rho.dims(), &factor, w))
}

/// Default decomposition size: rank + 2, capped at rank².
pub fn default_ensemble_size(rank: usize) -> usize {
    (rank + 2).min(rank * rank).max(rank)
}
