mod common;

use std::f64::consts::{PI, TAU};

use common::*;
use eigenforge_core::diagnostics::{overlaps, spectral_distribution};
use eigenforge_core::fock::{fock_state, number_op};
use eigenforge_core::linalg::{C_I, C_ZERO};
use eigenforge_core::qpe::{
    apply_lambda_u, controlled_power_product, index_distribution, measure_index, prepare, qft_index, run_qpe,
    spectral_decompose, QpeError, Stage,
};
use eigenforge_core::{Complex, ComplexMatrix, OutcomePolicy, QRule, SamplingSeed, TargetUnitary};
use rand::Rng;

fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `Σ_l F[j,l]·U^l ψ/√M` with `F[j,l] = e^{−2πijl/M}/√M`, powers by repeated
/// multiplication.
fn dense_reference(u: &ComplexMatrix, psi: &[Complex], dim: usize) -> Vec<Complex> {
    let n = psi.len();
    let mut powers = vec![psi.to_vec()];
    for _ in 1..dim {
        powers.push(naive_matvec(u, powers.last().unwrap()));
    }
    let norm = 1.0 / dim as f64;
    let mut out = vec![C_ZERO; dim * n];
    for j in 0..dim {
        for (l, block) in powers.iter().enumerate() {
            let w = Complex::from_polar(norm, -TAU * ((j * l) % dim) as f64 / dim as f64);
            for i in 0..n {
                out[j * n + i] += w * block[i];
            }
        }
    }
    out
}

#[test]
fn controlled_powers_match_lambda_u() {
    let mut r = rng(21);
    for _ in 0..40 {
        let m = r.random_range(1..=4);
        let n = r.random_range(2..=32);
        let u = random_unitary(&mut r, n, m);
        let psi = random_state(&mut r, n);
        let a = apply_lambda_u(prepare(&psi, size(m)), &u).unwrap();
        let b = controlled_power_product(prepare(&psi, size(m)), &u).unwrap();
        assert!(max_diff(a.amplitudes(), b.amplitudes()) < 1e-9);
        assert_eq!(a.stage(), Stage::Controlled);
    }
}

#[test]
fn spectral_powers_match_repeated_products() {
    let mut r = rng(22);
    for _ in 0..10 {
        let n = r.random_range(2..=32);
        let u = random_unitary(&mut r, n, 4);
        let mut acc = ComplexMatrix::identity(n);
        for j in 0..16u64 {
            assert!(u.power(j).max_abs_diff(&acc).unwrap() < 1e-8, "j={j}");
            acc = naive_matmul(&acc, u.matrix());
        }
    }
}

#[test]
fn pipeline_matches_dense_reference() {
    let mut r = rng(23);
    for _ in 0..20 {
        let m = r.random_range(1..=4);
        let n = r.random_range(2..=16);
        let u = random_unitary(&mut r, n, m);
        let psi = random_state(&mut r, n);
        let state = qft_index(controlled_power_product(prepare(&psi, size(m)), &u).unwrap()).unwrap();
        let oracle = dense_reference(u.matrix(), psi.vector().as_slice(), 1 << m);
        assert!(max_diff(state.amplitudes(), &oracle) < 1e-9);
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn statevector_distribution_matches_spectral_formula() {
    let mut r = rng(24);
    for _ in 0..50 {
        let m = r.random_range(1..=4);
        let n = r.random_range(2..=32);
        let u = random_unitary(&mut r, n, m);
        let psi = random_state(&mut r, n);
        let run = run_qpe(&u, &psi, size(m), OutcomePolicy::Forced(0)).unwrap();
        let profile = overlaps(&u, &psi, QRule::ArgMax).unwrap();
        let spectral = spectral_distribution(&profile, size(m));
        for (a, b) in run.distribution.iter().zip(&spectral) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((run.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fock_states_read_out_exactly() {
    for m in 2..=4u32 {
        let dim = 1usize << m;
        let s = space(32);
        let omega_t = TAU * (1.0 - 1.0 / dim as f64);
        let u = spectral_decompose(&number_op(s).scale(-C_I), omega_t, size(m)).unwrap();
        for n in 0..32 {
            let psi = fock_state(s, n).unwrap();
            let run = run_qpe(&u, &psi, size(m), OutcomePolicy::Forced(n % dim)).unwrap();
            assert!(run.measurement.probability >= 1.0 - 1e-9, "m={m} n={n}");
            assert!(run.measurement.post.fidelity(&psi).unwrap() >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn integer_eigenphase_is_recovered() {
    // φ = 2πk/M for a single eigenvector reads out k with certainty.
    let mut r = rng(25);
    let m = 3;
    let n = 6;
    let v = random_orthonormal(&mut r, n);
    let phases: Vec<f64> = (0..n).map(|k| TAU * (k + 1) as f64 / 8.0).collect();
    let u = TargetUnitary::from_spectrum(phases, v.clone(), size(m)).unwrap();
    for k in 0..n {
        let psi = eigenforge_core::TargetState::from_vector(space(n), v.column(k)).unwrap();
        let dist = index_distribution(
            &qft_index(controlled_power_product(prepare(&psi, size(m)), &u).unwrap()).unwrap(),
        )
        .unwrap();
        assert!((dist[k + 1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn degenerate_phases_collapse_to_their_eigenspace() {
    let mut r = rng(26);
    let n = 8;
    let v = random_orthonormal(&mut r, n);
    // Two eigenvectors share phase 2π·3/8, the rest sit far from it.
    let phases = vec![TAU * 3.0 / 8.0, TAU * 3.0 / 8.0, 0.0, PI, 0.3, 4.0, 5.5, 1.0];
    let u = TargetUnitary::from_spectrum(phases, v.clone(), size(3)).unwrap();
    let psi = random_state(&mut r, n);
    let run = run_qpe(&u, &psi, size(3), OutcomePolicy::Forced(3)).unwrap();
    let c: Vec<Complex> = (0..2).map(|k| v.column(k).inner(psi.vector()).unwrap()).collect();
    let shared = c[0].norm_sqr() + c[1].norm_sqr();
    let post = run.measurement.post.vector();
    let inside: f64 = (0..2).map(|k| v.column(k).inner(post).unwrap().norm_sqr()).sum();
    assert!(run.measurement.probability >= shared - 1e-12);
    assert!(inside > 0.5);
    // Relative weights inside the degenerate pair are untouched by the kernel.
    let d: Vec<Complex> = (0..2).map(|k| v.column(k).inner(post).unwrap()).collect();
    assert!((d[0] * c[1] - d[1] * c[0]).norm() < 1e-10);
}

#[test]
fn stage_order_is_enforced() {
    let mut r = rng(27);
    let u = random_unitary(&mut r, 4, 2);
    let psi = random_state(&mut r, 4);
    let err = qft_index(prepare(&psi, size(2))).unwrap_err();
    assert!(matches!(err, QpeError::Stage { .. }));
    let err = controlled_power_product(prepare(&psi, size(3)), &u).unwrap_err();
    assert!(matches!(err, QpeError::IndexSizeMismatch { .. }));
    let err = run_qpe(&u, &psi, size(2), OutcomePolicy::Forced(9)).unwrap_err();
    assert!(matches!(err, QpeError::Kernel(_)));
}

#[test]
fn sampling_is_reproducible_and_follows_the_distribution() {
    let mut r = rng(28);
    let u = random_unitary(&mut r, 6, 2);
    let psi = random_state(&mut r, 6);
    let state = qft_index(controlled_power_product(prepare(&psi, size(2)), &u).unwrap()).unwrap();
    let dist = index_distribution(&state).unwrap();
    let draw = |seed, stream| {
        measure_index(&state, OutcomePolicy::Sampled(SamplingSeed { seed, stream }))
            .unwrap()
            .outcome
    };
    assert_eq!(draw(7, 0), draw(7, 0));
    let trials = 4000;
    let mut counts = [0usize; 4];
    for stream in 0..trials {
        counts[draw(99, stream)] += 1;
    }
    for (c, p) in counts.iter().zip(&dist) {
        let expect = p * trials as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - expect).abs() < 5.0 * sd + 1.0, "{counts:?} vs {dist:?}");
    }
}
