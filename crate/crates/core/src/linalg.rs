//! Dense complex vectors and matrices, a cyclic Jacobi eigensolver for
//! Hermitian matrices, and exponentials of anti-Hermitian generators computed
//! through that eigensolver.
//!
//! Storage is row-major throughout. Every operation is a pure function of its
//! inputs; tolerances are passed explicitly.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, Mul};

use num_complex::{Complex64, ComplexFloat};
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

/// Double-precision complex scalar.
pub type Complex = Complex64;

pub const C_ZERO: Complex = Complex::new(0.0, 0.0);
pub const C_ONE: Complex = Complex::new(1.0, 0.0);
pub const C_I: Complex = Complex::new(0.0, 1.0);

/// Default tolerance for Hermiticity / anti-Hermiticity checks, relative to
/// `max(1, ‖A‖_max)`.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius mass falls below this
/// fraction of the full Frobenius norm.
pub const JACOBI_REL_THRESHOLD: f64 = 1e-14;

/// Upper bound on full Jacobi sweeps before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vectors and matrices must have at least one entry")]
    Empty,
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },
    #[error("matrix is not Hermitian: max |H - H^dag| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("generator is not anti-Hermitian: max |K + K^dag| = {deviation:e} exceeds {tol:e}")]
    NotAntiHermitian { deviation: f64, tol: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
}

fn check_finite(data: &[Complex]) -> Result<(), LinalgError> {
    match data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(index) => Err(LinalgError::NonFinite { index }),
        None => Ok(()),
    }
}

/// A state vector or any other dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex>) -> Result<Self, LinalgError> {
        if data.is_empty() {
            return Err(LinalgError::Empty);
        }
        check_finite(&data)?;
        Ok(Self { data })
    }

    /// Internal constructor for results of finite arithmetic on finite data.
    pub(crate) fn from_vec_unchecked(data: Vec<Complex>) -> Self {
        debug_assert!(!data.is_empty());
        Self { data }
    }

    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be at least 1");
        Self {
            data: vec![C_ZERO; dim],
        }
    }

    /// Unit vector `e_k` in dimension `dim`.
    ///
    /// # Panics
    /// If `k >= dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = Self::zeros(dim);
        v.data[k] = C_ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Complex> {
        self.data.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.norm_sqr())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_vec_unchecked(self.data.iter().map(|z| z * s).collect())
    }

    /// Returns the vector rescaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                context: "inner product",
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64, LinalgError> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Squared moduli of the amplitudes.
    pub fn populations(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;

    fn index(&self, i: usize) -> &Complex {
        &self.data[i]
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if rows * cols != data.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix construction",
                left: rows * cols,
                right: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C_ONE; n])
    }

    pub fn from_diagonal(diag: &[Complex]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Builds a matrix entrywise; `f` receives `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self, LinalgError> {
        let cols = columns.len();
        if cols == 0 {
            return Err(LinalgError::Empty);
        }
        let rows = columns[0].dim();
        if let Some(bad) = columns.iter().find(|c| c.dim() != rows) {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix from columns",
                left: rows,
                right: bad.dim(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
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

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::from_vec_unchecked((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        context: &'static str,
        op: impl Fn(Complex, Complex) -> Complex,
    ) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                context,
                left: self.rows * self.cols,
                right: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, "matrix addition", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, "matrix subtraction", |a, b| a - b)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        matmul(self, other)
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if self.cols != v.dim() {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix-vector product",
                left: self.cols,
                right: v.dim(),
            });
        }
        let out = self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        Float::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// `max_ij |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        self.sub(other).map(|d| d.max_abs())
    }

    /// `‖A - A†‖_max`; `None` for non-square input.
    pub fn hermiticity_defect(&self) -> Option<f64> {
        self.symmetry_defect(|a, b| a - b.conj())
    }

    /// `‖A + A†‖_max`; `None` for non-square input.
    pub fn anti_hermiticity_defect(&self) -> Option<f64> {
        self.symmetry_defect(|a, b| a + b.conj())
    }

    fn symmetry_defect(&self, op: impl Fn(Complex, Complex) -> Complex) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max(op(self.data[i * n + j], self.data[j * n + i]).norm());
            }
        }
        Some(worst)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

/// Standard matrix product `A·B`.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            context: "matrix product",
            left: a.cols,
            right: b.rows,
        });
    }
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = vec![C_ZERO; n * m];
    for i in 0..n {
        let row = &mut out[i * m..(i + 1) * m];
        for l in 0..k {
            let ail = a.data[i * k + l];
            if ail == C_ZERO {
                continue;
            }
            for (o, blj) in row.iter_mut().zip(&b.data[l * m..(l + 1) * m]) {
                *o += ail * blj;
            }
        }
    }
    Ok(ComplexMatrix {
        rows: n,
        cols: m,
        data: out,
    })
}

/// Full spectrum of a Hermitian matrix.
///
/// Eigenvalues are ascending (ties keep the order in which the Jacobi
/// diagonal held them); column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    /// Full sweeps the solver needed.
    pub sweeps: usize,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V·diag(g(λ_k))·V†`.
    pub fn apply_function(&self, g: impl Fn(f64) -> Complex) -> ComplexMatrix {
        let weights: Vec<Complex> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        spectral_synthesis(&self.eigenvectors, &weights)
    }

    /// `V·Λ·V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|l| Complex::new(l, 0.0))
    }
}

/// `V·diag(w)·V†` for a square `V` and one weight per column.
///
/// # Panics
/// If `V` is not square or `weights` has the wrong length.
pub fn spectral_synthesis(v: &ComplexMatrix, weights: &[Complex]) -> ComplexMatrix {
    assert!(v.is_square() && weights.len() == v.cols, "weights must match the eigenbasis");
    let n = v.rows;
    let mut out = vec![C_ZERO; n * n];
    for i in 0..n {
        let vi = &v.data[i * n..(i + 1) * n];
        for j in 0..n {
            let vj = &v.data[j * n..(j + 1) * n];
            out[i * n + j] = vi
                .iter()
                .zip(vj)
                .zip(weights)
                .map(|((a, b), w)| a * w * b.conj())
                .sum();
        }
    }
    ComplexMatrix {
        rows: n,
        cols: n,
        data: out,
    }
}

/// Eigen-decomposes a Hermitian matrix with cyclic complex Jacobi rotations.
///
/// `tol` bounds the accepted Hermiticity defect `‖H − H†‖_max`. The solver
/// works on `(H + H†)/2`.
pub fn hermitian_eig(h: &ComplexMatrix, tol: f64) -> Result<HermitianEig, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let deviation = h.hermiticity_defect().unwrap_or(f64::INFINITY);
    if deviation > tol {
        return Err(LinalgError::NotHermitian { deviation, tol });
    }

    let n = h.rows;
    let mut a = vec![C_ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (h.data[i * n + j] + h.data[j * n + i].conj()) * 0.5;
        }
        a[i * n + i].im = 0.0;
    }
    let threshold = JACOBI_REL_THRESHOLD * h.frobenius_norm();
    let (diag, vt, sweeps) = if a.iter().all(|z| z.im == 0.0) {
        let mut ar: Vec<f64> = a.iter().map(|z| z.re).collect();
        let mut vr: Vec<f64> = (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        let sweeps = jacobi(&mut ar, &mut vr, n, threshold)?;
        let diag: Vec<f64> = (0..n).map(|k| ar[k * n + k]).collect();
        (diag, vr.into_iter().map(|x| Complex::new(x, 0.0)).collect::<Vec<_>>(), sweeps)
    } else {
        let mut vt = ComplexMatrix::identity(n).data;
        let sweeps = jacobi(&mut a, &mut vt, n, threshold)?;
        ((0..n).map(|k| a[k * n + k].re).collect(), vt, sweeps)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = ComplexMatrix {
        rows: n,
        cols: n,
        data: (0..n * n).map(|idx| vt[order[idx % n] * n + idx / n]).collect(),
    };
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

fn off_diagonal_mass<T: ComplexFloat<Real = f64>>(a: &[T], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = a[i * n + j];
            sum += z.re() * z.re() + z.im() * z.im();
        }
    }
    Float::sqrt(2.0 * sum)
}

/// Cyclic Jacobi on a Hermitian matrix stored row-major in `a`. Generic so
/// real symmetric input runs in real arithmetic. Returns the sweep count;
/// `a` ends up diagonal and `vt` holds the eigenvectors as rows.
fn jacobi<T>(a: &mut [T], vt: &mut [T], n: usize, threshold: f64) -> Result<usize, LinalgError>
where
    T: ComplexFloat<Real = f64> + Mul<f64, Output = T>,
{
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_mass(a, n);
        if off <= threshold {
            return Ok(sweeps);
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        // Early sweeps only rotate the larger elements.
        let skip_below = if sweeps < 3 {
            let sum: f64 = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].abs())
                .sum();
            0.2 * sum / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p * n + q].abs() > skip_below {
                    jacobi_rotate(a, vt, n, p, q, sweeps > 3);
                }
            }
        }
        sweeps += 1;
    }
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, e^{-iθ})·R(c, s)`
/// acting on coordinates `(p, q)`, where `θ = arg a[p][q]`; then
/// `A ← G†AG`, `V ← VG`.
///
/// Only rows `p`, `q` of `A` are computed; columns are mirrored from them by
/// Hermiticity. `vt` holds `V` transposed so its update is contiguous too.
fn jacobi_rotate<T>(a: &mut [T], vt: &mut [T], n: usize, p: usize, q: usize, late: bool)
where
    T: ComplexFloat<Real = f64> + Mul<f64, Output = T>,
{
    let b = a[p * n + q];
    let babs = b.abs();
    if babs == 0.0 {
        return;
    }
    let app = a[p * n + p].re();
    let aqq = a[q * n + q].re();
    // Negligible against both diagonal entries: drop it outright.
    let g = 100.0 * babs;
    if late && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        a[p * n + q] = T::zero();
        a[q * n + p] = T::zero();
        return;
    }

    let phase = b * (1.0 / babs);
    let tau = (aqq - app) / (2.0 * babs);
    let t = if tau.is_finite() {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + tau.hypot(1.0))
    } else {
        0.0
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let es = phase * s;
    let ec = phase * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        let new_p = apk * c - aqk * es;
        let new_q = apk * s + aqk * ec;
        a[p * n + k] = new_p;
        a[q * n + k] = new_q;
        a[k * n + p] = new_p.conj();
        a[k * n + q] = new_q.conj();
    }
    a[p * n + p] = T::one() * (app - t * babs);
    a[q * n + q] = T::one() * (aqq + t * babs);
    a[p * n + q] = T::zero();
    a[q * n + p] = T::zero();

    // Rows of V^T transform with the conjugate of the column update of V.
    let (ep_c, ep_s) = (ec.conj(), es.conj());
    let (lo, hi) = vt.split_at_mut(q * n);
    let (row_p, row_q) = (&mut lo[p * n..(p + 1) * n], &mut hi[..n]);
    for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (x, y) = (*vp, *vq);
        *vp = x * c - y * ep_s;
        *vq = x * s + y * ep_c;
    }
}

/// Spectrum of the Hermitian matrix `-iK` for an anti-Hermitian generator `K`,
/// so that `exp(tK) = V·diag(e^{itλ_k})·V†`.
///
/// `tol` is relative: the defect `‖K + K†‖_max` must not exceed
/// `tol·max(1, ‖K‖_max)`.
pub fn generator_spectrum(k: &ComplexMatrix, tol: f64) -> Result<HermitianEig, LinalgError> {
    if !k.is_square() {
        return Err(LinalgError::NotSquare {
            rows: k.rows,
            cols: k.cols,
        });
    }
    let bound = tol * k.max_abs().max(1.0);
    let deviation = k.anti_hermiticity_defect().unwrap_or(f64::INFINITY);
    if deviation > bound {
        return Err(LinalgError::NotAntiHermitian {
            deviation,
            tol: bound,
        });
    }
    hermitian_eig(&k.scale(-C_I), bound)
}

/// `exp(tK)` for anti-Hermitian `K`, with the default generator tolerance.
pub fn unitary_from_generator(k: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    unitary_from_generator_tol(k, t, DEFAULT_HERMITIAN_TOL)
}

pub fn unitary_from_generator_tol(
    k: &ComplexMatrix,
    t: f64,
    tol: f64,
) -> Result<ComplexMatrix, LinalgError> {
    let eig = generator_spectrum(k, tol)?;
    Ok(eig.apply_function(|l| Complex::from_polar(1.0, t * l)))
}

/// `‖U†U − I‖_max ≤ tol`. Non-square input is never unitary.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.rows;
    let Ok(gram) = matmul(&u.adjoint(), u) else {
        return false;
    };
    (0..n).all(|i| {
        (0..n).all(|j| {
            let target = if i == j { C_ONE } else { C_ZERO };
            (gram.data[i * n + j] - target).norm() <= tol
        })
    })
}
