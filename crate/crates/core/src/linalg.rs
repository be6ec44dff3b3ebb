//! Dense complex linear algebra on small matrices.
//!
//! Everything here works on row-major [`ComplexMatrix`] values. Composite
//! indices of multipartite systems are mixed-radix numbers with subsystem 1
//! as the most significant digit, which is also the ordering produced by
//! [`tensor_product`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{DensityMatrix, Ket};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Maximum entrywise deviation from Hermiticity accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as a non-PSD input.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which a Jacobi run is converged.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Relative floor below which an eigenvalue is rounding noise. Square roots
/// amplify noise of size ε to √ε, so such values are dropped before any
/// square root is taken.
const SPECTRAL_FLOOR: f64 = 1e-14;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |A − B|; `f64::INFINITY` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |H − H†| over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// (H + H†)/2, used to strip rounding asymmetry from products that are
    /// Hermitian in exact arithmetic.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| 0.5 * (self[(r, c)] + self[(c, r)].conj()))
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Spectral decomposition H = V Λ V† with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// V f(Λ) V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * v[(c, k)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Converged when the off-diagonal Frobenius norm drops below
/// `tol · max(1, ‖H‖_F)`; gives up after [`JACOBI_MAX_SWEEPS`] sweeps.
pub fn hermitian_eigensystem(h: &ComplexMatrix, tol: f64) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows, cols: h.cols });
    }
    let dev = h.hermiticity_error();
    if !dev.is_finite() {
        return Err(Error::NonFinite);
    }
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = h.rows;
    let mut a = h.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol * h.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= threshold {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One unitary plane rotation annihilating a[p][q]; accumulates into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to the (p, q) plane.
    let u_pp = C64::new(cs, 0.0);
    let u_pq = C64::new(sn, 0.0);
    let u_qp = -sn * phase.conj();
    let u_qq = cs * phase.conj();

    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

fn spectral_floor(values: &[f64]) -> f64 {
    let top = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    SPECTRAL_FLOOR * top.max(1.0)
}

/// Principal square root of a Hermitian PSD matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigensystem(m, JACOBI_TOL)?;
    let floor = spectral_floor(&eig.values);
    if let Some(&low) = eig.values.last() {
        if low < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::NotPositive(low));
        }
    }
    Ok(eig.map_spectrum(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

/// tr√(√ρ σ √ρ) given a precomputed √ρ.
pub fn fidelity_with_sqrt(sqrt_rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if sqrt_rho.rows != sigma.rows || !sigma.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}x{} and {}x{} operators",
            sqrt_rho.rows, sqrt_rho.cols, sigma.rows, sigma.cols
        )));
    }
    let inner = (&(sqrt_rho * sigma) * sqrt_rho).hermitian_part();
    let eig = hermitian_eigensystem(&inner, JACOBI_TOL)?;
    if let Some(&low) = eig.values.last() {
        if low < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::NotPositive(low));
        }
    }
    Ok(sqrt_spectrum(&eig.values).iter().sum())
}

/// Square roots of a PSD spectrum with rounding-level eigenvalues set to zero.
pub fn sqrt_spectrum(values: &[f64]) -> Vec<f64> {
    let floor = spectral_floor(values);
    values.iter().map(|&x| if x > floor { x.sqrt() } else { 0.0 }).collect()
}

/// Uhlmann fidelity tr√(√ρ σ √ρ). `sigma` may be subnormalized.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dims {:?} and {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    fidelity_with_sqrt(&sqrt_rho, sigma.matrix())
}

/// Mixed-radix digits of `index`, most significant first.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Validates a list of distinct subsystem indices below `n`.
pub(crate) fn check_subsystems(keep: &[usize], n: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("empty subsystem set".into()));
    }
    for (pos, &k) in keep.iter().enumerate() {
        if k >= n {
            return Err(Error::InvalidSubsystems(format!("subsystem {k} out of range for {n} subsystems")));
        }
        if keep[..pos].contains(&k) {
            return Err(Error::InvalidSubsystems(format!("subsystem {k} listed twice")));
        }
    }
    Ok(())
}

/// Index table `table[kept][traced]` giving the original composite index,
/// with the kept subsystems in the order listed in `keep`.
pub(crate) fn split_index_table(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let nk: usize = keep_dims.iter().product();
    let nt: usize = traced_dims.iter().product();
    let mut table = vec![vec![0; nt]; nk];
    let mut full = vec![0; dims.len()];
    for (a, row) in table.iter_mut().enumerate() {
        let ka = digits(a, &keep_dims);
        for (slot, &sub) in keep.iter().enumerate() {
            full[sub] = ka[slot];
        }
        for (t, cell) in row.iter_mut().enumerate() {
            let tt = digits(t, &traced_dims);
            for (slot, &sub) in traced.iter().enumerate() {
                full[sub] = tt[slot];
            }
            *cell = compose(&full, dims);
        }
    }
    (keep_dims, traced_dims, table)
}

/// Traces out every subsystem not in `keep`. The result lists the kept
/// subsystems in the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    check_subsystems(keep, dims.len())?;
    let (keep_dims, _, table) = split_index_table(dims, keep);
    let m = rho.matrix();
    let nk = table.len();
    let out = ComplexMatrix::from_fn(nk, nk, |a, b| {
        table[a].iter().zip(&table[b]).map(|(&x, &y)| m[(x, y)]).sum()
    });
    Ok(DensityMatrix::from_parts(keep_dims, out))
}

/// Entrywise complex conjugate in the computational basis.
pub fn conjugate_entrywise(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_parts(rho.dims().to_vec(), rho.matrix().conj())
}

/// Σ_{x,y} conj(a_x) A_{xy} conj(a_y), i.e. ⟨ψ|A|ψ*⟩.
pub fn bilinear_form_value(psi: &Ket, a: &ComplexMatrix) -> Result<C64> {
    let n = psi.amplitudes().len();
    if !a.is_square() || a.rows != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator against a ket of dimension {n}",
            a.rows, a.cols
        )));
    }
    let conj: Vec<C64> = psi.amplitudes().iter().map(|z| z.conj()).collect();
    let av = a.mat_vec(&conj);
    Ok(conj.iter().zip(&av).map(|(x, y)| x * y).sum())
}

/// Modified Gram–Schmidt on the columns of `a` (run twice for stability).
/// Fails when the columns are numerically dependent.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = (a.rows, a.cols);
    if cols > rows {
        return Err(Error::DimensionMismatch(format!("cannot orthonormalize {cols} columns in dimension {rows}")));
    }
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut v = a.column(c);
        let start = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for _ in 0..2 {
            for u in &q {
                let ov: C64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (y, x) in v.iter_mut().zip(u) {
                    *y -= ov * x;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 1e-12 * start.max(f64::MIN_POSITIVE) {
            return Err(Error::NotIsometry(1.0));
        }
        q.push(v.into_iter().map(|z| z / norm).collect());
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| q[c][r]))
}

/// max |W†W − I| over all entries.
pub fn isometry_defect(w: &ComplexMatrix) -> f64 {
    (&w.adjoint() * w).max_abs_diff(&ComplexMatrix::identity(w.cols))
}

/// Kronecker product A ⊗ B.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n, n).hermitian_part()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, n);
        &a.adjoint() * &a
    }

    #[test]
    fn diagonal_spectrum() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, 3.0]);
        let eig = hermitian_eigensystem(&h, JACOBI_TOL).unwrap();
        assert_eq!(eig.values, vec![3.0, 1.0]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let h = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let eig = hermitian_eigensystem(&h, JACOBI_TOL).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 9, 16] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eigensystem(&h, JACOBI_TOL).unwrap();
            let resid = (&eig.reconstruct() - &h).frobenius_norm();
            assert!(resid <= 1e-9 * h.frobenius_norm().max(1.0), "n={n} resid={resid}");
            let vv = &eig.vectors.adjoint() * &eig.vectors;
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigensolver_errors() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigensystem(&rect, JACOBI_TOL), Err(Error::NotSquare { .. })));
        let skew = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, -ONE, ZERO]).unwrap();
        assert!(matches!(hermitian_eigensystem(&skew, JACOBI_TOL), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sqrt_examples() {
        let r = psd_sqrt(&ComplexMatrix::from_real_diagonal(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0])) < 1e-14);
        let id = ComplexMatrix::identity(3);
        assert!(psd_sqrt(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let neg = ComplexMatrix::from_real_diagonal(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&neg), Err(Error::NotPositive(_))));
        // Slightly negative noise is clamped.
        let noisy = ComplexMatrix::from_real_diagonal(&[1.0, -1e-12]);
        assert!(psd_sqrt(&noisy).is_ok());
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 6, 9] {
            let m = random_psd(&mut rng, n);
            let r = psd_sqrt(&m).unwrap();
            assert!(r.hermiticity_error() < 1e-12);
            let resid = (&(&r * &r) - &m).frobenius_norm();
            assert!(resid <= 1e-8 * m.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn sqrt_of_projector_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 5, 2);
        // Orthonormalize two columns by hand to build a rank-2 projector.
        let u0 = a.column(0);
        let n0 = u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u0: Vec<C64> = u0.iter().map(|z| z / n0).collect();
        let mut u1 = a.column(1);
        let ov: C64 = u0.iter().zip(&u1).map(|(x, y)| x.conj() * y).sum();
        for (y, x) in u1.iter_mut().zip(&u0) {
            *y -= ov * x;
        }
        let n1 = u1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let u1: Vec<C64> = u1.iter().map(|z| z / n1).collect();
        let p = &ComplexMatrix::outer(&u0, &u0) + &ComplexMatrix::outer(&u1, &u1);
        assert!(psd_sqrt(&p).unwrap().max_abs_diff(&p) < 1e-9);
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(tensor_product(&a, &b), ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let x = random_matrix(&mut rng, 2, 1).column(0);
        let y = random_matrix(&mut rng, 3, 1).column(0);
        let lhs = tensor_product(&a, &b).mat_vec(&kron_vec(&x, &y));
        let rhs = kron_vec(&a.mat_vec(&x), &b.mat_vec(&y));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn digits_roundtrip() {
        let dims = [3, 2, 4];
        for i in 0..24 {
            assert_eq!(compose(&digits(i, &dims), &dims), i);
        }
        assert_eq!(digits(5, &dims), vec![0, 1, 1]);
    }
}
