//! Phase estimation on an index register of `m` qubits coupled to a
//! truncated oscillator.
//!
//! The joint state moves through four stages:
//!
//! 1. `Prepared`: `|0⟩|ψ⟩`
//! 2. `Superposed`: `M^{-1/2} Σ_j |j⟩|ψ⟩`
//! 3. `Controlled`: `M^{-1/2} Σ_j |j⟩ U^j|ψ⟩`
//! 4. `Transformed`: Fourier transform applied to the index register
//!
//! after which the index register is measured. Amplitudes are stored
//! index-major: `|j⟩|n⟩` lives at `j·N + n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::fock::{FockError, FockSpace, TargetState};
use crate::kernel::{wrap, Eigenphase, IndexSize, KernelError};
use crate::linalg::{
    generator_spectrum, is_unitary, spectral_synthesis, Complex, ComplexMatrix, ComplexVector,
    LinalgError, C_ZERO, DEFAULT_HERMITIAN_TOL,
};

/// Unitarity tolerance for target unitaries.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on `‖U v_k − e^{iφ_k} v_k‖`.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Forced outcomes with smaller probability are rejected. Rounding in the
/// joint state leaves probabilities around 1e-30 on outcomes that are
/// exactly forbidden; conditioning on them would amplify noise.
pub const MIN_OUTCOME_PROB: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QpeError {
    #[error("joint state is at stage {found:?}, operation needs {expected:?}")]
    Stage { expected: Stage, found: Stage },
    #[error("unitary acts on dimension {unitary}, target space has {target}")]
    DimensionMismatch { unitary: usize, target: usize },
    #[error("unitary was built for {unitary} index qubits, joint state has {state}")]
    IndexSizeMismatch { unitary: u32, state: u32 },
    #[error("matrix is not unitary within {tol:e}")]
    NotUnitary { tol: f64 },
    #[error("spectrum reproduces the unitary only to {residual:e}")]
    SpectrumMismatch { residual: f64 },
    #[error("outcome {j} has probability {probability:e}; cannot condition on it")]
    ImpossibleOutcome { j: usize, probability: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Eigen-decomposition of a target unitary, with phases mapped onto the
/// index grid of a particular register size.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    size: IndexSize,
    raw_phases: Vec<f64>,
    eigenphases: Vec<Eigenphase>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    fn new(size: IndexSize, raw_phases: Vec<f64>, eigenvectors: ComplexMatrix) -> Self {
        let raw_phases: Vec<f64> = raw_phases.into_iter().map(|p| wrap(p, 2.0 * PI)).collect();
        let eigenphases = raw_phases
            .iter()
            .map(|&p| Eigenphase::from_phase(p, size))
            .collect();
        Self {
            size,
            raw_phases,
            eigenphases,
            eigenvectors,
        }
    }

    pub fn size(&self) -> IndexSize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.raw_phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_phases.is_empty()
    }

    /// `φ_k ∈ [0, 2π)`.
    pub fn raw_phases(&self) -> &[f64] {
        &self.raw_phases
    }

    /// `ω_k = Mφ_k/2π ∈ [0, M)`.
    pub fn eigenphases(&self) -> &[Eigenphase] {
        &self.eigenphases
    }

    /// Orthonormal eigenvectors as columns.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k)
    }
}

/// A unitary on the target space together with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetUnitary {
    matrix: ComplexMatrix,
    spectrum: SpectralDecomposition,
}

impl TargetUnitary {
    /// `U = V·diag(e^{iφ_k})·V†` from phases and orthonormal eigenvectors.
    pub fn from_spectrum(
        raw_phases: Vec<f64>,
        eigenvectors: ComplexMatrix,
        size: IndexSize,
    ) -> Result<Self, QpeError> {
        if !eigenvectors.is_square() || raw_phases.len() != eigenvectors.cols() {
            return Err(QpeError::DimensionMismatch {
                unitary: raw_phases.len(),
                target: eigenvectors.rows(),
            });
        }
        if !is_unitary(&eigenvectors, UNITARY_TOL) {
            return Err(QpeError::NotUnitary { tol: UNITARY_TOL });
        }
        let weights: Vec<Complex> = raw_phases
            .iter()
            .map(|&phi| Complex::from_polar(1.0, phi))
            .collect();
        let matrix = spectral_synthesis(&eigenvectors, &weights);
        Self::checked(matrix, SpectralDecomposition::new(size, raw_phases, eigenvectors))
    }

    fn checked(matrix: ComplexMatrix, spectrum: SpectralDecomposition) -> Result<Self, QpeError> {
        if !is_unitary(&matrix, UNITARY_TOL) {
            return Err(QpeError::NotUnitary { tol: UNITARY_TOL });
        }
        let u = Self { matrix, spectrum };
        let residual = u.eigen_residual();
        if residual > SPECTRUM_TOL {
            return Err(QpeError::SpectrumMismatch { residual });
        }
        Ok(u)
    }

    /// `max_k ‖U v_k − e^{iφ_k} v_k‖₂`.
    pub fn eigen_residual(&self) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.spectrum.eigenvector(k);
                let uv = self.matrix.matvec(&v).expect("square");
                let lambda = Complex::from_polar(1.0, self.spectrum.raw_phases[k]);
                uv.iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a - lambda * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn size(&self) -> IndexSize {
        self.spectrum.size
    }

    /// Same unitary, eigenphases mapped onto a different register size.
    pub fn with_index_size(&self, size: IndexSize) -> Self {
        Self {
            matrix: self.matrix.clone(),
            spectrum: SpectralDecomposition::new(
                size,
                self.spectrum.raw_phases.clone(),
                self.spectrum.eigenvectors.clone(),
            ),
        }
    }

    fn power_weights(&self, j: u64) -> Vec<Complex> {
        // Reduce j·φ modulo 2π before exponentiating.
        self.spectrum
            .raw_phases
            .iter()
            .map(|&phi| Complex::from_polar(1.0, wrap(j as f64 * phi, 2.0 * PI)))
            .collect()
    }

    /// `U^j = V·diag(e^{ijφ_k})·V†`.
    pub fn power(&self, j: u64) -> ComplexMatrix {
        spectral_synthesis(&self.spectrum.eigenvectors, &self.power_weights(j))
    }

    /// `U^j x` through the spectrum, without forming `U^j`.
    pub fn apply_power(&self, j: u64, x: &[Complex]) -> Vec<Complex> {
        let n = self.dim();
        let v = self.spectrum.eigenvectors.as_slice();
        let weights = self.power_weights(j);
        let mut coeffs = vec![C_ZERO; n];
        for (row, xr) in x.iter().enumerate() {
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c += v[row * n + k].conj() * xr;
            }
        }
        for (c, w) in coeffs.iter_mut().zip(&weights) {
            *c *= w;
        }
        (0..n)
            .map(|row| {
                v[row * n..(row + 1) * n]
                    .iter()
                    .zip(&coeffs)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// `U = exp(tK)` for an anti-Hermitian generator `K`. Eigenphases come from
/// the spectrum `λ_k` of `−iK` as `φ_k = tλ_k mod 2π`.
pub fn spectral_decompose(
    generator: &ComplexMatrix,
    t: f64,
    size: IndexSize,
) -> Result<TargetUnitary, QpeError> {
    let eig = generator_spectrum(generator, DEFAULT_HERMITIAN_TOL)?;
    let matrix = eig.apply_function(|l| Complex::from_polar(1.0, wrap(t * l, 2.0 * PI)));
    let phases = eig.eigenvalues.iter().map(|l| t * l).collect();
    TargetUnitary::checked(matrix, SpectralDecomposition::new(size, phases, eig.eigenvectors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Prepared,
    Superposed,
    Controlled,
    Transformed,
}

/// State of index register ⊗ target mode.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    size: IndexSize,
    space: FockSpace,
    amplitudes: Vec<Complex>,
    stage: Stage,
    tail_mass: f64,
}

impl JointState {
    /// `|0⟩|ψ⟩`.
    pub fn initial(psi: &TargetState, size: IndexSize) -> Self {
        let n = psi.space().trunc();
        let mut amplitudes = vec![C_ZERO; size.dim() * n];
        amplitudes[..n].copy_from_slice(psi.vector().as_slice());
        Self {
            size,
            space: psi.space(),
            amplitudes,
            stage: Stage::Prepared,
            tail_mass: psi.tail_mass(),
        }
    }

    pub fn size(&self) -> IndexSize {
        self.size
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    /// Amplitude of `|j⟩|n⟩`.
    pub fn amplitude(&self, j: usize, n: usize) -> Complex {
        self.amplitudes[j * self.space.trunc() + n]
    }

    /// Target-space amplitudes conditioned on index `j` (unnormalized).
    pub fn block(&self, j: usize) -> &[Complex] {
        let n = self.space.trunc();
        &self.amplitudes[j * n..(j + 1) * n]
    }

    fn block_mut(&mut self, j: usize) -> &mut [Complex] {
        let n = self.space.trunc();
        &mut self.amplitudes[j * n..(j + 1) * n]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn expect_stage(&self, expected: Stage) -> Result<(), QpeError> {
        if self.stage != expected {
            return Err(QpeError::Stage {
                expected,
                found: self.stage,
            });
        }
        Ok(())
    }

    fn expect_compatible(&self, u: &TargetUnitary) -> Result<(), QpeError> {
        if u.dim() != self.space.trunc() {
            return Err(QpeError::DimensionMismatch {
                unitary: u.dim(),
                target: self.space.trunc(),
            });
        }
        if u.size() != self.size {
            return Err(QpeError::IndexSizeMismatch {
                unitary: u.size().qubits(),
                state: self.size.qubits(),
            });
        }
        Ok(())
    }
}

/// Hadamard on every index qubit of a `Prepared` state.
pub fn superpose(mut state: JointState) -> Result<JointState, QpeError> {
    state.expect_stage(Stage::Prepared)?;
    let n = state.space.trunc();
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    for bit in 0..state.size.qubits() {
        let stride = 1usize << bit;
        for j in 0..state.size.dim() {
            if j & stride != 0 {
                continue;
            }
            let (lo, hi) = (j * n, (j | stride) * n);
            for t in 0..n {
                let a = state.amplitudes[lo + t];
                let b = state.amplitudes[hi + t];
                state.amplitudes[lo + t] = (a + b) * scale;
                state.amplitudes[hi + t] = (a - b) * scale;
            }
        }
    }
    state.stage = Stage::Superposed;
    Ok(state)
}

/// `M^{-1/2} Σ_j |j⟩|ψ⟩`.
pub fn prepare(psi: &TargetState, size: IndexSize) -> JointState {
    superpose(JointState::initial(psi, size)).expect("fresh state is Prepared")
}

/// `Λ(U)`: block `j` is replaced by `U^j` times itself, each power taken
/// directly from the spectrum.
pub fn apply_lambda_u(mut state: JointState, u: &TargetUnitary) -> Result<JointState, QpeError> {
    state.expect_stage(Stage::Superposed)?;
    state.expect_compatible(u)?;
    for j in 0..state.size.dim() {
        let out = u.apply_power(j as u64, state.block(j));
        state.block_mut(j).copy_from_slice(&out);
    }
    state.stage = Stage::Controlled;
    Ok(state)
}

/// `Λ(U)` assembled qubit by qubit: index bit `b` set ⇒ apply `U^{2^b}`.
pub fn controlled_power_product(
    mut state: JointState,
    u: &TargetUnitary,
) -> Result<JointState, QpeError> {
    state.expect_stage(Stage::Superposed)?;
    state.expect_compatible(u)?;
    for bit in 0..state.size.qubits() {
        let step = u.power(1u64 << bit);
        let mask = 1usize << bit;
        for j in (0..state.size.dim()).filter(|j| j & mask != 0) {
            let x = ComplexVector::new(state.block(j).to_vec())?;
            let y = step.matvec(&x)?;
            state.block_mut(j).copy_from_slice(y.as_slice());
        }
    }
    state.stage = Stage::Controlled;
    Ok(state)
}

/// Fourier transform of the index register,
/// `|l⟩ ↦ M^{-1/2} Σ_j e^{−2πi jl/M} |j⟩`, which sends the pattern
/// `M^{-1/2} Σ_l e^{2πi lω/M}|l⟩` to `Σ_j f(ω, j)|j⟩`.
pub fn qft_index(mut state: JointState) -> Result<JointState, QpeError> {
    state.expect_stage(Stage::Controlled)?;
    let dim = state.size.dim();
    let n = state.space.trunc();
    let norm = 1.0 / (dim as f64).sqrt();
    let twiddle: Vec<Complex> = (0..dim).map(|k| twiddle(k, dim) * norm).collect();
    let mut out = vec![C_ZERO; dim * n];
    for j in 0..dim {
        let row = &mut out[j * n..(j + 1) * n];
        for l in 0..dim {
            let w = twiddle[(j * l) % dim];
            for (o, a) in row.iter_mut().zip(&state.amplitudes[l * n..(l + 1) * n]) {
                *o += w * a;
            }
        }
    }
    state.amplitudes = out;
    state.stage = Stage::Transformed;
    Ok(state)
}

/// `e^{−2πik/M}`, exact at quarter turns.
fn twiddle(k: usize, dim: usize) -> Complex {
    if (4 * k) % dim == 0 {
        return match 4 * k / dim {
            0 => Complex::new(1.0, 0.0),
            1 => Complex::new(0.0, -1.0),
            2 => Complex::new(-1.0, 0.0),
            _ => Complex::new(0.0, 1.0),
        };
    }
    Complex::from_polar(1.0, -2.0 * PI * k as f64 / dim as f64)
}

/// `P(j) = Σ_n |⟨j, n|Ψ⟩|²` after the transform.
pub fn index_distribution(state: &JointState) -> Result<Vec<f64>, QpeError> {
    state.expect_stage(Stage::Transformed)?;
    Ok((0..state.size.dim())
        .map(|j| state.block(j).iter().map(|z| z.norm_sqr()).sum())
        .collect())
}

/// Seed for a sampled measurement. ChaCha20 seeded from `seed`, on stream
/// `stream`, so independent runs of a batch share a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplingSeed {
    pub seed: u64,
    pub stream: u64,
}

impl SamplingSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Uniform draw in `[0, 1)` from the top 53 bits of the first output
    /// word.
    pub fn uniform(self) -> f64 {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomePolicy {
    /// Condition on a chosen outcome.
    Forced(usize),
    /// Draw the outcome from `P(j)`.
    Sampled(SamplingSeed),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    /// `(block j)/√P(j)`.
    pub post: TargetState,
}

/// Measures the index register and collapses the target.
pub fn measure_index(state: &JointState, policy: OutcomePolicy) -> Result<Measurement, QpeError> {
    let dist = index_distribution(state)?;
    let j = match policy {
        OutcomePolicy::Forced(j) => {
            if j >= dist.len() {
                return Err(KernelError::OutcomeRange { j, dim: dist.len() }.into());
            }
            j
        }
        OutcomePolicy::Sampled(seed) => sample(&dist, seed.uniform()),
    };
    let probability = dist[j];
    if probability < MIN_OUTCOME_PROB {
        return Err(QpeError::ImpossibleOutcome { j, probability });
    }
    let block = ComplexVector::new(state.block(j).to_vec())?;
    let post = TargetState::with_tail(state.space, block, state.tail_mass)?;
    Ok(Measurement {
        outcome: j,
        probability,
        post,
    })
}

fn sample(dist: &[f64], u: f64) -> usize {
    let total: f64 = dist.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (j, &p) in dist.iter().enumerate() {
        acc += p;
        if target < acc && p > 0.0 {
            return j;
        }
    }
    // Rounding left target at the very top: take the last populated outcome.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// One pass of the algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct QpeRun {
    pub distribution: Vec<f64>,
    pub measurement: Measurement,
    pub populations_before: Vec<f64>,
    pub populations_after: Vec<f64>,
}

/// Prepare, apply the controlled powers qubit by qubit, transform, measure.
pub fn run_qpe(
    u: &TargetUnitary,
    psi: &TargetState,
    size: IndexSize,
    policy: OutcomePolicy,
) -> Result<QpeRun, QpeError> {
    let state = prepare(psi, size);
    let state = controlled_power_product(state, u)?;
    let state = qft_index(state)?;
    let distribution = index_distribution(&state)?;
    let measurement = measure_index(&state, policy)?;
    Ok(QpeRun {
        populations_before: psi.populations(),
        populations_after: measurement.post.populations(),
        distribution,
        measurement,
    })
}
