//! The phase-estimation readout kernel and the bounds built on it.
//!
//! An eigenvector whose eigenvalue is `e^{2πiω/M}` leaves the index register,
//! after the Fourier transform, in `Σ_j f(ω, j)|j⟩` with
//!
//! ```text
//! f(ω, j) = (1/M) Σ_{l=0}^{M-1} e^{2πi l (ω - j)/M}.
//! ```
//!
//! Its modulus is the Dirichlet ratio `|sin(πω)| / (M |sin(π(ω - j)/M)|)`,
//! bounded below by `|sinc(ω - j)|`.

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::linalg::Complex;
use core::f64::consts::PI;

/// Largest supported index register.
pub const MAX_INDEX_QUBITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("index register needs 1..={MAX_INDEX_QUBITS} qubits, got {0}")]
    QubitCount(u32),
    #[error("eigenphase {omega} outside [0, {dim})")]
    EigenphaseRange { omega: f64, dim: usize },
    #[error("index outcome {j} outside 0..{dim}")]
    OutcomeRange { j: usize, dim: usize },
    #[error("argument {name} = {value} outside its admissible range")]
    ArgumentRange { name: &'static str, value: f64 },
}

/// Size of the index register: `m` qubits, `M = 2^m` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSize {
    qubits: u32,
}

impl IndexSize {
    pub fn new(qubits: u32) -> Result<Self, KernelError> {
        if qubits == 0 || qubits > MAX_INDEX_QUBITS {
            return Err(KernelError::QubitCount(qubits));
        }
        Ok(Self { qubits })
    }

    pub fn qubits(self) -> u32 {
        self.qubits
    }

    /// `M = 2^m`.
    pub fn dim(self) -> usize {
        1usize << self.qubits
    }

    fn dim_f64(self) -> f64 {
        self.dim() as f64
    }
}

/// Eigenphase rescaled to the index grid, `ω = Mφ/2π ∈ [0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Eigenphase(f64);

impl Eigenphase {
    pub fn new(omega: f64, size: IndexSize) -> Result<Self, KernelError> {
        if !(omega.is_finite() && omega >= 0.0 && omega < size.dim_f64()) {
            return Err(KernelError::EigenphaseRange {
                omega,
                dim: size.dim(),
            });
        }
        Ok(Self(omega))
    }

    /// Reduces any finite `omega` modulo `M`.
    ///
    /// # Panics
    /// If `omega` is not finite.
    pub fn wrapped(omega: f64, size: IndexSize) -> Self {
        assert!(omega.is_finite(), "eigenphase must be finite");
        Self(wrap(omega, size.dim_f64()))
    }

    /// From a raw eigenvalue phase `φ` (any real; reduced modulo 2π).
    pub fn from_phase(phi: f64, size: IndexSize) -> Self {
        let phi = wrap(phi, 2.0 * PI);
        Self::wrapped(size.dim_f64() * phi / (2.0 * PI), size)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `x mod period` into `[0, period)`.
pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let mut r = x % period;
    if r < 0.0 {
        r += period;
    }
    if r >= period {
        r = 0.0;
    }
    r
}

/// Kernel value for any real `omega`; `j` is taken as given.
pub(crate) fn kernel_unchecked(omega: f64, j: usize, dim: usize) -> Complex {
    let x = omega - j as f64;
    if x == 0.0 {
        return Complex::new(1.0, 0.0);
    }
    let m = dim as f64;
    let den = m * (PI * x / m).sin();
    if den == 0.0 {
        // x is a nonzero multiple of M: every term of the sum is 1.
        return Complex::new(1.0, 0.0);
    }
    let modulus = (PI * x).sin() / den;
    Complex::from_polar(modulus, PI * x * (m - 1.0) / m)
}

/// Readout amplitude `f(ω, j)`, including the phase the Fourier transform
/// attaches to it. Exactly 1 when `ω == j`.
pub fn f_kernel(omega: Eigenphase, j: usize, size: IndexSize) -> Result<Complex, KernelError> {
    if j >= size.dim() {
        return Err(KernelError::OutcomeRange { j, dim: size.dim() });
    }
    Ok(kernel_unchecked(omega.0, j, size.dim()))
}

/// Modulus of the kernel, `|sin(πω)| / (M |sin(π(ω − j)/M)|)`. The
/// numerator is evaluated as `|sin(π(ω − j))|`, which is equal for integer
/// `j` and keeps full precision when `ω` sits next to `j`.
pub fn kernel_modulus(omega: Eigenphase, j: usize, size: IndexSize) -> Result<f64, KernelError> {
    if j >= size.dim() {
        return Err(KernelError::OutcomeRange { j, dim: size.dim() });
    }
    let x = omega.0 - j as f64;
    if x == 0.0 {
        return Ok(1.0);
    }
    let m = size.dim_f64();
    Ok((PI * x).sin().abs() / (m * (PI * x / m).sin().abs()))
}

/// Normalized sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Grid neighbours of an eigenphase, all reduced modulo `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridNeighbors {
    pub floor: usize,
    pub ceil: usize,
    /// Closest grid point; exact half-way ties go to `floor`.
    pub round: usize,
}

pub fn nearest_grid(omega: Eigenphase, size: IndexSize) -> GridNeighbors {
    let dim = size.dim();
    let base = omega.0.floor();
    let frac = omega.0 - base;
    let floor = (base as usize) % dim;
    if frac == 0.0 {
        return GridNeighbors {
            floor,
            ceil: floor,
            round: floor,
        };
    }
    let ceil = (floor + 1) % dim;
    let round = if frac > 0.5 { ceil } else { floor };
    GridNeighbors { floor, ceil, round }
}

/// Distance between two points on the circle of circumference `M`.
pub fn circ_dist(a: f64, b: f64, size: IndexSize) -> f64 {
    let m = size.dim_f64();
    let d = (a - b).abs() % m;
    d.min(m - d)
}

/// Representative of `a − b` modulo `M` in `(−M/2, M/2]`.
pub fn signed_offset(a: f64, b: f64, size: IndexSize) -> f64 {
    let m = size.dim_f64();
    let d = wrap(a - b, m);
    if d > m / 2.0 {
        d - m
    } else {
        d
    }
}

/// `λ = |f(1.5, 0)|²`, the leakage figure used for eigenphases more than one
/// grid step away from the readout.
pub fn lambda_param(size: IndexSize) -> f64 {
    kernel_unchecked(1.5, 0, size.dim()).norm_sqr()
}

/// Lower bound on the post-measurement overlap `p′` after reading out the
/// grid point closest to `ω_q`:
///
/// ```text
/// p′ ≥ p·F / (p·F + (1 − λ)·G + λ·(1 − p)),   F = |f(ω_q, [ω_q])|²
/// ```
///
/// Accepts `p ∈ [0, 1]`, `G ∈ [0, 1 − p]`, `F ∈ (0.4, 1]`, `λ ∈ (0, 1)`.
pub fn p_prime_lower_bound(p: f64, g: f64, fqq2: f64, lambda: f64) -> Result<f64, KernelError> {
    const SLACK: f64 = 1e-12;
    let check = |name, value: f64, ok: bool| {
        if ok && value.is_finite() {
            Ok(())
        } else {
            Err(KernelError::ArgumentRange { name, value })
        }
    };
    check("p", p, (0.0..=1.0).contains(&p))?;
    check("G", g, g >= 0.0 && g <= 1.0 - p + SLACK)?;
    check("fqq2", fqq2, fqq2 > 0.4 && fqq2 <= 1.0 + SLACK)?;
    check("lambda", lambda, lambda > 0.0 && lambda < 1.0)?;
    let signal = p * fqq2;
    Ok(signal / (signal + (1.0 - lambda) * g + lambda * (1.0 - p)))
}

/// The `G` at which the lower bound on `p′` drops to exactly `p`:
/// `G* = (F − λ)(1 − p)/(1 − λ)`.
pub fn bound_crossing(p: f64, fqq2: f64, lambda: f64) -> f64 {
    (fqq2 - lambda) * (1.0 - p) / (1.0 - lambda)
}
