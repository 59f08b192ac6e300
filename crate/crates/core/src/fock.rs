//! Truncated Fock space of a single bosonic mode.
//!
//! Operators are truncated at the generator level and then exponentiated, so
//! every evolution stays exactly unitary on the truncated space. States that
//! cannot be written down in closed form are built on a padded working space
//! and projected back; the discarded weight is kept as `tail_mass`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::linalg::{
    unitary_from_generator, Complex, ComplexMatrix, ComplexVector, LinalgError, C_ZERO,
};

/// Largest discarded norm tolerated by constructors that enforce a ceiling.
pub const DEFAULT_TAIL_CEILING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FockError {
    #[error("a truncated Fock space needs at least 2 levels, got {0}")]
    TooSmall(usize),
    #[error("Fock level {n} outside a space truncated at {trunc}")]
    LevelRange { n: usize, trunc: usize },
    #[error("state dimension {got} does not match the Fock space ({trunc})")]
    DimensionMismatch { got: usize, trunc: usize },
    #[error("truncation discards {tail:e} of the norm, above the ceiling {ceiling:e}")]
    TailMass { tail: f64, ceiling: f64 },
    #[error("state has no weight inside the truncated space")]
    ZeroNorm,
    #[error("non-finite parameter {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Levels `|0⟩ … |trunc − 1⟩` of one oscillator mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    trunc: usize,
}

impl FockSpace {
    pub fn new(trunc: usize) -> Result<Self, FockError> {
        if trunc < 2 {
            return Err(FockError::TooSmall(trunc));
        }
        Ok(Self { trunc })
    }

    pub fn trunc(self) -> usize {
        self.trunc
    }

    /// Space used to build states before projecting them onto `self`.
    fn padded(self) -> Self {
        Self {
            trunc: self.trunc + (self.trunc / 2).max(16),
        }
    }
}

/// Normalized state of the target mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    space: FockSpace,
    vec: ComplexVector,
    tail_mass: f64,
}

impl TargetState {
    /// Normalizes `vec` and records no tail.
    pub fn from_vector(space: FockSpace, vec: ComplexVector) -> Result<Self, FockError> {
        Self::with_tail(space, vec, 0.0)
    }

    /// Normalizes `vec`, carrying over a tail mass discarded elsewhere.
    pub(crate) fn with_tail(
        space: FockSpace,
        vec: ComplexVector,
        tail_mass: f64,
    ) -> Result<Self, FockError> {
        if vec.dim() != space.trunc {
            return Err(FockError::DimensionMismatch {
                got: vec.dim(),
                trunc: space.trunc,
            });
        }
        let vec = vec.normalized().ok_or(FockError::ZeroNorm)?;
        Ok(Self {
            space,
            vec,
            tail_mass,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vec
    }

    /// Weight removed by truncation before renormalizing.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Fock-level populations `|⟨n|ψ⟩|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.vec.populations()
    }

    /// `⟨n̂⟩`.
    pub fn mean_number(&self) -> f64 {
        self.vec
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum()
    }

    pub fn fidelity(&self, other: &TargetState) -> Result<f64, FockError> {
        Ok(self.vec.fidelity(&other.vec)?)
    }
}

/// Lowering operator, `⟨n−1|a|n⟩ = √n`.
pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    let n = space.trunc;
    ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            Complex::new((j as f64).sqrt(), 0.0)
        } else {
            C_ZERO
        }
    })
}

pub fn creation(space: FockSpace) -> ComplexMatrix {
    annihilation(space).adjoint()
}

/// `a†a = diag(0, 1, …, trunc − 1)`.
pub fn number_op(space: FockSpace) -> ComplexMatrix {
    let diag: Vec<Complex> = (0..space.trunc)
        .map(|n| Complex::new(n as f64, 0.0))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

pub fn fock_state(space: FockSpace, n: usize) -> Result<TargetState, FockError> {
    if n >= space.trunc {
        return Err(FockError::LevelRange {
            n,
            trunc: space.trunc,
        });
    }
    Ok(TargetState {
        space,
        vec: ComplexVector::basis(space.trunc, n),
        tail_mass: 0.0,
    })
}

fn check_finite(z: Complex, name: &'static str) -> Result<(), FockError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(FockError::NonFinite(name))
    }
}

/// Untruncated coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!` for
/// `n < len`, evaluated in log space so large `|α|` does not underflow the
/// leading terms.
fn coherent_amplitudes(alpha: Complex, len: usize) -> Vec<Complex> {
    let r = alpha.norm();
    if r == 0.0 {
        return (0..len)
            .map(|n| if n == 0 { Complex::new(1.0, 0.0) } else { C_ZERO })
            .collect();
    }
    let (ln_r, theta) = (r.ln(), alpha.arg());
    let mut ln_mod = -0.5 * r * r;
    (0..len)
        .map(|n| {
            if n > 0 {
                ln_mod += ln_r - 0.5 * (n as f64).ln();
            }
            Complex::from_polar(ln_mod.exp(), n as f64 * theta)
        })
        .collect()
}

/// Coherent state `|α⟩` truncated to `space` and renormalized.
pub fn coherent_state(space: FockSpace, alpha: Complex) -> Result<TargetState, FockError> {
    check_finite(alpha, "alpha")?;
    let amps = coherent_amplitudes(alpha, space.trunc);
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let vec = ComplexVector::new(amps)?;
    TargetState::with_tail(space, vec, (1.0 - kept).max(0.0))
}

/// `αa† − α*a`, truncated.
pub fn displacement_generator(space: FockSpace, alpha: Complex) -> ComplexMatrix {
    let a = annihilation(space);
    let ad = a.adjoint();
    ad.scale(alpha)
        .sub(&a.scale(alpha.conj()))
        .expect("operators share the space")
}

/// `D(α) = exp(αa† − α*a)` on the truncated space.
pub fn displacement_matrix(space: FockSpace, alpha: Complex) -> Result<ComplexMatrix, FockError> {
    check_finite(alpha, "alpha")?;
    if alpha == C_ZERO {
        return Ok(ComplexMatrix::identity(space.trunc));
    }
    // In the frame P = diag(e^{iβn}) with β = arg α − π/2 the generator is
    // i|α|(a + a†), whose Hermitian part is real.
    let beta = alpha.arg() - FRAC_PI_2;
    let a = annihilation(space);
    let k = a.add(&a.adjoint())?.scale(Complex::new(0.0, alpha.norm()));
    Ok(phase_frame(&unitary_from_generator(&k, 1.0)?, beta))
}

/// `½(ε*a² − εa†²)`, truncated.
pub fn squeeze_generator(space: FockSpace, epsilon: Complex) -> ComplexMatrix {
    let a = annihilation(space);
    let a2 = a.matmul(&a).expect("square operators");
    let ad2 = a2.adjoint();
    a2.scale(epsilon.conj() * 0.5)
        .sub(&ad2.scale(epsilon * 0.5))
        .expect("operators share the space")
}

/// `S(ε) = exp(½(ε*a² − εa†²))` on the truncated space. For real `ε = r > 0`
/// it contracts the position quadrature `(a + a†)/√2` by `e^{−r}`.
///
/// The generator only couples levels of equal parity, so the even and odd
/// sectors are exponentiated separately.
pub fn squeeze_matrix(space: FockSpace, epsilon: Complex) -> Result<ComplexMatrix, FockError> {
    check_finite(epsilon, "epsilon")?;
    let n = space.trunc;
    if epsilon == C_ZERO {
        return Ok(ComplexMatrix::identity(n));
    }
    // In the frame P = diag(e^{iβn}) with 2β = arg ε + π/2 the generator is
    // (i|ε|/2)(a² + a†²), whose Hermitian part is real.
    let beta = (epsilon.arg() + FRAC_PI_2) / 2.0;
    let a2 = annihilation(space).matmul(&annihilation(space))?;
    let k = a2.add(&a2.adjoint())?.scale(Complex::new(0.0, epsilon.norm() / 2.0));
    // Level `l` sits at position `l / 2` of the sector with parity `l % 2`.
    let sector = |parity: usize| {
        let len = (n - parity).div_ceil(2);
        let block = ComplexMatrix::from_fn(len, len, |i, j| k[(2 * i + parity, 2 * j + parity)]);
        unitary_from_generator(&block, 1.0)
    };
    let blocks = [sector(0)?, sector(1)?];
    let rotated = ComplexMatrix::from_fn(n, n, |i, j| {
        if i % 2 == j % 2 {
            blocks[i % 2][(i / 2, j / 2)]
        } else {
            C_ZERO
        }
    });
    Ok(phase_frame(&rotated, beta))
}

/// `P·U·P†` for `P = diag(e^{iβn})`.
fn phase_frame(u: &ComplexMatrix, beta: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.rows(), u.cols(), |m, n| {
        u[(m, n)] * Complex::from_polar(1.0, beta * (m as f64 - n as f64))
    })
}

/// Squeezed coherent state `S(ε)D(α)|0⟩` with the default tail ceiling.
pub fn squeezed_coherent(
    space: FockSpace,
    alpha: Complex,
    epsilon: Complex,
) -> Result<TargetState, FockError> {
    squeezed_coherent_with_ceiling(space, alpha, epsilon, DEFAULT_TAIL_CEILING)
}

/// Builds `S(ε)D(α)|0⟩` on a padded space, projects it onto `space` and
/// renormalizes. Fails if more than `ceiling` of the norm lies above the
/// truncation.
pub fn squeezed_coherent_with_ceiling(
    space: FockSpace,
    alpha: Complex,
    epsilon: Complex,
    ceiling: f64,
) -> Result<TargetState, FockError> {
    check_finite(alpha, "alpha")?;
    check_finite(epsilon, "epsilon")?;
    let work = space.padded();
    let displaced = ComplexVector::new(coherent_amplitudes(alpha, work.trunc))?;
    let full = if epsilon == C_ZERO {
        displaced
    } else {
        squeeze_matrix(work, epsilon)?.matvec(&displaced)?
    };
    project(space, &full, ceiling)
}

/// Keeps the first `space.trunc` amplitudes of a padded-space vector.
fn project(space: FockSpace, full: &ComplexVector, ceiling: f64) -> Result<TargetState, FockError> {
    let total = full.norm_sqr();
    let kept_amps: Vec<Complex> = full.as_slice()[..space.trunc].to_vec();
    let kept: f64 = kept_amps.iter().map(|z| z.norm_sqr()).sum();
    let tail = ((total - kept) / total).max(0.0);
    if tail > ceiling {
        return Err(FockError::TailMass { tail, ceiling });
    }
    TargetState::with_tail(space, ComplexVector::new(kept_amps)?, tail)
}

/// How far `D(v)` moves a state out of `space`: applies the displacement
/// on a padded space and reports the norm that ends up above the
/// truncation. The padding covers the largest shift in `n` that `D(v)` can
/// cause from below `trunc`, `|v|² + 2|v|√trunc`, so the working boundary
/// stays out of reach.
pub fn displaced_tail_mass(state: &TargetState, v: Complex) -> Result<f64, FockError> {
    check_finite(v, "displacement")?;
    let space = state.space;
    let shift = v.norm() * (2.0 * (space.trunc as f64).sqrt() + v.norm());
    let work = FockSpace {
        trunc: space.padded().trunc.max(space.trunc + shift.ceil() as usize + 16),
    };
    let mut padded: Vec<Complex> = state.vec.as_slice().to_vec();
    padded.resize(work.trunc, C_ZERO);
    let moved = displacement_matrix(work, v)?.matvec(&ComplexVector::new(padded)?)?;
    let total = moved.norm_sqr();
    let above: f64 = moved.as_slice()[space.trunc..]
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    Ok(above / total)
}

/// Overlap of a squeezed coherent state with its image under a displacement
/// along the anti-squeezed quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCheck {
    /// `1 − |w|` with `w = ⟨α,r| D(id) |α,r⟩`.
    pub residual: f64,
    /// `arg w`.
    pub phase: f64,
}

/// Measures how nearly `|α, r⟩ = S(r)D(α)|0⟩` is an eigenvector of the
/// displacement `D(id)`, for real `α ≥ 0`, `r` and `d`.
pub fn approx_eigen_check(
    space: FockSpace,
    alpha: f64,
    r: f64,
    d: f64,
) -> Result<EigenCheck, FockError> {
    Ok(approx_eigen_sweep(space, alpha, &[r], d)?[0])
}

/// [`approx_eigen_check`] over several squeezing strengths, building
/// `D(id)` once.
pub fn approx_eigen_sweep(
    space: FockSpace,
    alpha: f64,
    rs: &[f64],
    d: f64,
) -> Result<Vec<EigenCheck>, FockError> {
    let states = rs
        .iter()
        .map(|&r| squeezed_coherent(space, Complex::new(alpha, 0.0), Complex::new(r, 0.0)))
        .collect::<Result<Vec<_>, _>>()?;
    if d == 0.0 {
        return Ok(states
            .iter()
            .map(|_| EigenCheck {
                residual: 0.0,
                phase: 0.0,
            })
            .collect());
    }
    let shift = displacement_matrix(space, Complex::new(0.0, d))?;
    states
        .iter()
        .map(|state| {
            let w = state.vec.inner(&shift.matvec(&state.vec)?)?;
            Ok(EigenCheck {
                residual: 1.0 - w.norm(),
                phase: w.arg(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, matmul, C_ONE};

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn space_needs_two_levels() {
        assert_eq!(FockSpace::new(1), Err(FockError::TooSmall(1)));
    }

    #[test]
    fn ladder_entries() {
        let a = annihilation(space(2));
        assert_eq!(a.as_slice(), &[C_ZERO, C_ONE, C_ZERO, C_ZERO]);
        assert_eq!(annihilation(space(6))[(3, 4)], Complex::new(2.0, 0.0));
    }

    #[test]
    fn number_operator_is_ad_a() {
        let s = space(7);
        let a = annihilation(s);
        let n = matmul(&a.adjoint(), &a).unwrap();
        assert!(n.max_abs_diff(&number_op(s)).unwrap() < 1e-15);
        assert_eq!(number_op(space(3)), ComplexMatrix::from_diagonal(&[C_ZERO, C_ONE, Complex::new(2.0, 0.0)]));
    }

    #[test]
    fn number_evolution_is_diagonal_phase() {
        let s = space(8);
        let theta = 0.731;
        let u = unitary_from_generator(&number_op(s).scale(Complex::new(0.0, -theta)), 1.0).unwrap();
        let expect = ComplexMatrix::from_diagonal(
            &(0..8).map(|n| Complex::from_polar(1.0, -theta * n as f64)).collect::<Vec<_>>(),
        );
        assert!(u.max_abs_diff(&expect).unwrap() < 1e-13);
    }

    #[test]
    fn fock_states() {
        let v = fock_state(space(64), 9).unwrap();
        assert_eq!(v.vector()[9], C_ONE);
        assert_eq!(v.tail_mass(), 0.0);
        assert_eq!(v.mean_number(), 9.0);
        assert_eq!(fock_state(space(4), 4), Err(FockError::LevelRange { n: 4, trunc: 4 }));
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = space(10);
        assert_eq!(coherent_state(s, C_ZERO).unwrap(), fock_state(s, 0).unwrap());
    }

    #[test]
    fn coherent_three_population_at_nine() {
        let psi = coherent_state(space(64), Complex::new(3.0, 0.0)).unwrap();
        // e^{-9} 9^9 / 9!
        let poisson = (-9.0f64).exp() * 9f64.powi(9) / 362_880.0;
        assert!((psi.populations()[9] - poisson).abs() < 1e-13);
        assert!((poisson - 0.1318).abs() < 1e-4);
        assert!((psi.vector().norm() - 1.0).abs() < 1e-12);
        assert!(psi.tail_mass() < 1e-12);
    }

    #[test]
    fn coherent_rejects_nan() {
        assert!(matches!(
            coherent_state(space(4), Complex::new(f64::NAN, 0.0)),
            Err(FockError::NonFinite(_))
        ));
    }

    #[test]
    fn zero_displacement_and_squeeze_are_identity() {
        let s = space(12);
        let id = ComplexMatrix::identity(12);
        assert!(displacement_matrix(s, C_ZERO).unwrap().max_abs_diff(&id).unwrap() < 1e-15);
        assert!(squeeze_matrix(s, C_ZERO).unwrap().max_abs_diff(&id).unwrap() < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_has_even_parity() {
        let s = space(40);
        let sv = squeeze_matrix(s, Complex::new(0.8, 0.0))
            .unwrap()
            .matvec(&ComplexVector::basis(40, 0))
            .unwrap();
        for n in (1..40).step_by(2) {
            assert!(sv[n].norm() < 1e-10);
        }
        assert!(is_unitary(&squeeze_matrix(s, Complex::new(0.8, 0.3)).unwrap(), 1e-10));
    }

    #[test]
    fn squeezed_coherent_trivial_case_is_vacuum() {
        let s = space(16);
        let psi = squeezed_coherent(s, C_ZERO, C_ZERO).unwrap();
        assert!((psi.fidelity(&fock_state(s, 0).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squeezed_coherent_reports_excess_tail() {
        let err = squeezed_coherent(space(8), Complex::new(3.0, 0.0), Complex::new(1.0, 0.0));
        assert!(matches!(err, Err(FockError::TailMass { .. })));
    }

    #[test]
    fn eigen_check_trivial_displacement() {
        let c = approx_eigen_check(space(32), 1.0, 0.5, 0.0).unwrap();
        assert_eq!((c.residual, c.phase), (0.0, 0.0));
    }
}
