//! Figures of merit for one target state against one target unitary.
//!
//! Expanding `|ψ⟩ = Σ_k c_k|φ_k⟩` in the eigenbasis of `U` and singling out
//! an eigenvector `q`, the remaining eigenvectors are split by how close
//! their eigenphase lies to the readout grid point `[ω_q]`:
//!
//! * `G`: `k ≠ q` with circular distance `|ω_k − [ω_q]| ≤ 1`
//! * `H`: everything farther than 1
//!
//! `G = Σ_{g∈G}|c_g|²` predicts whether measuring `[ω_q]` improves the
//! overlap `p = |c_q|²`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fock::TargetState;
use crate::kernel::{
    circ_dist, kernel_unchecked, nearest_grid, Eigenphase, IndexSize, KernelError,
};
use crate::linalg::{Complex, ComplexVector, LinalgError};
use crate::qpe::TargetUnitary;

/// Two `|c_k|²` closer than this count as a tie for the argmax rule.
pub const ARGMAX_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("state has dimension {state}, unitary acts on {unitary}")]
    DimensionMismatch { state: usize, unitary: usize },
    #[error("eigenvector index {k} out of range ({len} eigenvectors)")]
    EigenIndex { k: usize, len: usize },
    #[error("requested phase {0} is not finite")]
    NonFinitePhase(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How to pick the designated eigenvector `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRule {
    Explicit(usize),
    /// Largest `|c_k|²`; ties go to the lower `k` and are flagged.
    ArgMax,
    /// Eigenphase circularly nearest to this `ω` (ties: lower `k`).
    NearestPhase(f64),
    /// Eigenvector with the largest weight on Fock level `n` (ties: lower `k`).
    BasisState(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapEntry {
    pub k: usize,
    /// Raw eigenvalue phase `φ_k ∈ [0, 2π)`.
    pub phase: f64,
    pub omega: Eigenphase,
    /// `c_k = ⟨φ_k|ψ⟩`.
    pub c: Complex,
}

/// The pairs `(ω_k, c_k)` of a target state, with the designated `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapProfile {
    size: IndexSize,
    entries: Vec<OverlapEntry>,
    q: usize,
    q_vector: ComplexVector,
    tie: bool,
}

impl OverlapProfile {
    pub fn size(&self) -> IndexSize {
        self.size
    }

    pub fn entries(&self) -> &[OverlapEntry] {
        &self.entries
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn q_entry(&self) -> &OverlapEntry {
        &self.entries[self.q]
    }

    /// `|φ_q⟩`.
    pub fn q_vector(&self) -> &ComplexVector {
        &self.q_vector
    }

    /// `p = |c_q|²`.
    pub fn p(&self) -> f64 {
        self.q_entry().c.norm_sqr()
    }

    /// Whether the argmax rule had to break a tie.
    pub fn argmax_tie(&self) -> bool {
        self.tie
    }

    /// `Σ_k |c_k|²`.
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.c.norm_sqr()).sum()
    }

    /// `ω_k` on the grid of `size`, which need not be the profile's own.
    fn omega(&self, k: usize, size: IndexSize) -> f64 {
        if size == self.size {
            self.entries[k].omega.value()
        } else {
            Eigenphase::from_phase(self.entries[k].phase, size).value()
        }
    }

    fn q_omega(&self, size: IndexSize) -> Eigenphase {
        Eigenphase::wrapped(self.omega(self.q, size), size)
    }
}

/// Expands `psi` in the eigenbasis of `u` and picks `q` by `rule`.
pub fn overlaps(
    u: &TargetUnitary,
    psi: &TargetState,
    rule: QRule,
) -> Result<OverlapProfile, DiagnosticsError> {
    let spectrum = u.spectrum();
    let len = spectrum.len();
    if psi.vector().dim() != u.dim() {
        return Err(DiagnosticsError::DimensionMismatch {
            state: psi.vector().dim(),
            unitary: u.dim(),
        });
    }
    let vectors = spectrum.eigenvectors();
    let entries: Vec<OverlapEntry> = (0..len)
        .map(|k| {
            let c = psi
                .vector()
                .iter()
                .enumerate()
                .map(|(n, x)| vectors[(n, k)].conj() * x)
                .sum();
            OverlapEntry {
                k,
                phase: spectrum.raw_phases()[k],
                omega: spectrum.eigenphases()[k],
                c,
            }
        })
        .collect();

    let (q, tie) = match rule {
        QRule::Explicit(k) => {
            if k >= len {
                return Err(DiagnosticsError::EigenIndex { k, len });
            }
            (k, false)
        }
        QRule::ArgMax => argmax_with_tie(entries.iter().map(|e| e.c.norm_sqr())),
        QRule::NearestPhase(target) => {
            if !target.is_finite() {
                return Err(DiagnosticsError::NonFinitePhase(target));
            }
            let size = spectrum.size();
            let scores = entries
                .iter()
                .map(|e| -circ_dist(e.omega.value(), target, size));
            (argmax_with_tie(scores).0, false)
        }
        QRule::BasisState(n) => {
            if n >= u.dim() {
                return Err(DiagnosticsError::EigenIndex { k: n, len: u.dim() });
            }
            (argmax_with_tie((0..len).map(|k| vectors[(n, k)].norm_sqr())).0, false)
        }
    };

    Ok(OverlapProfile {
        size: spectrum.size(),
        q_vector: spectrum.eigenvector(q),
        entries,
        q,
        tie,
    })
}

/// First index of the maximum, and whether another score came within
/// [`ARGMAX_TIE_TOL`] of it.
fn argmax_with_tie(scores: impl Iterator<Item = f64>) -> (usize, bool) {
    let scores: Vec<f64> = scores.collect();
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    let tie = scores
        .iter()
        .enumerate()
        .any(|(k, &s)| k != best && (scores[best] - s).abs() <= ARGMAX_TIE_TOL);
    (best, tie)
}

/// Classification of the eigenvectors around the readout `[ω_q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SetPartition {
    pub q: usize,
    /// `[ω_q]`.
    pub readout: usize,
    pub g_set: Vec<usize>,
    pub h_set: Vec<usize>,
    /// `G = Σ_{g∈G} |c_g|²`.
    pub g_value: f64,
    /// `|f(ω_q, [ω_q])|²`.
    pub fqq2: f64,
}

pub fn partition(profile: &OverlapProfile, size: IndexSize) -> SetPartition {
    let omega_q = profile.q_omega(size);
    let readout = nearest_grid(omega_q, size).round;
    let (mut g_set, mut h_set) = (Vec::new(), Vec::new());
    for e in &profile.entries {
        if e.k == profile.q {
            continue;
        }
        if circ_dist(profile.omega(e.k, size), readout as f64, size) <= 1.0 {
            g_set.push(e.k);
        } else {
            h_set.push(e.k);
        }
    }
    let g_value = g_set.iter().map(|&k| profile.entries[k].c.norm_sqr()).sum();
    let fqq2 = kernel_unchecked(omega_q.value(), readout, size.dim()).norm_sqr();
    SetPartition {
        q: profile.q,
        readout,
        g_set,
        h_set,
        g_value,
        fqq2,
    }
}

/// `p′ = |⟨φ_q|ψ′⟩|²`.
pub fn p_prime_actual(
    post: &TargetState,
    profile: &OverlapProfile,
) -> Result<f64, DiagnosticsError> {
    Ok(profile.q_vector.fidelity(post.vector())?)
}

/// `P(j) = Σ_k |c_k f(ω_k, j)|²` for every outcome.
pub fn spectral_distribution(profile: &OverlapProfile, size: IndexSize) -> Vec<f64> {
    (0..size.dim())
        .map(|j| outcome_probability(profile, size, j))
        .collect()
}

fn outcome_probability(profile: &OverlapProfile, size: IndexSize, j: usize) -> f64 {
    profile
        .entries
        .iter()
        .map(|e| (e.c * kernel_unchecked(profile.omega(e.k, size), j, size.dim())).norm_sqr())
        .sum()
}

/// Eigenbasis amplitudes after reading `j`: `c′_k = c_k f(ω_k, j)/√𝒩` with
/// `𝒩 = Σ_k |c_k f(ω_k, j)|²`. Returns `(c′, 𝒩)`.
pub fn post_measurement_amplitudes(
    profile: &OverlapProfile,
    size: IndexSize,
    j: usize,
) -> Result<(Vec<Complex>, f64), DiagnosticsError> {
    if j >= size.dim() {
        return Err(KernelError::OutcomeRange { j, dim: size.dim() }.into());
    }
    let raw: Vec<Complex> = profile
        .entries
        .iter()
        .map(|e| e.c * kernel_unchecked(profile.omega(e.k, size), j, size.dim()))
        .collect();
    let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    let scale = if norm > 0.0 { 1.0 / norm.sqrt() } else { 0.0 };
    Ok((raw.into_iter().map(|z| z * scale).collect(), norm))
}

/// `P(⌊ω_q⌋) + P(⌈ω_q⌉)`; a single term when `ω_q` sits on the grid.
pub fn success_window_prob(profile: &OverlapProfile, size: IndexSize) -> f64 {
    let grid = nearest_grid(profile.q_omega(size), size);
    let lower = outcome_probability(profile, size, grid.floor);
    if grid.floor == grid.ceil {
        lower
    } else {
        lower + outcome_probability(profile, size, grid.ceil)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakProbability {
    /// `P([ω_q])`.
    pub total: f64,
    /// `|c_q f(ω_q, [ω_q])|²`, the part contributed by `φ_q` alone.
    pub q_share: f64,
}

pub fn peak_outcome_prob(profile: &OverlapProfile, size: IndexSize) -> PeakProbability {
    let omega_q = profile.q_omega(size);
    let readout = nearest_grid(omega_q, size).round;
    let q_share = (profile.q_entry().c * kernel_unchecked(omega_q.value(), readout, size.dim()))
        .norm_sqr();
    PeakProbability {
        total: outcome_probability(profile, size, readout),
        q_share,
    }
}
