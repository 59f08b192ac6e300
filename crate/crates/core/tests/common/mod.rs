#![allow(dead_code)]

use eigenforge_core::fock::FockSpace;
use eigenforge_core::{Complex, ComplexMatrix, ComplexVector, IndexSize, TargetState, TargetUnitary};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn size(m: u32) -> IndexSize {
    IndexSize::new(m).unwrap()
}

pub fn space(n: usize) -> FockSpace {
    FockSpace::new(n).unwrap()
}

pub fn random_complex(rng: &mut StdRng) -> Complex {
    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    a.add(&a.adjoint()).unwrap().scale(Complex::new(0.5, 0.0))
}

/// Modified Gram–Schmidt on random columns; independent of the eigensolver.
pub fn random_orthonormal(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex> = (0..n).map(|_| random_complex(rng)).collect();
        for c in &cols {
            let proj: Complex = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

pub fn random_phases(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

pub fn random_unitary(rng: &mut StdRng, n: usize, m: u32) -> TargetUnitary {
    let phases = random_phases(rng, n);
    let v = random_orthonormal(rng, n);
    TargetUnitary::from_spectrum(phases, v, size(m)).unwrap()
}

pub fn random_state(rng: &mut StdRng, n: usize) -> TargetState {
    let v = ComplexVector::new((0..n).map(|_| random_complex(rng)).collect()).unwrap();
    TargetState::from_vector(space(n), v).unwrap()
}

/// Textbook triple loop.
pub fn naive_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

pub fn naive_matvec(a: &ComplexMatrix, x: &[Complex]) -> Vec<Complex> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|k| a[(i, k)] * x[k]).sum())
        .collect()
}

/// `exp(A)` by scaling and squaring a truncated Taylor series.
pub fn taylor_exp(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.frobenius_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(Complex::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..30 {
        term = naive_matmul(&term, &scaled).scale(Complex::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term).unwrap();
    }
    for _ in 0..squarings {
        sum = naive_matmul(&sum, &sum);
    }
    sum
}

/// Explicit geometric sum `(1/M) Σ_l e^{2πil(ω−j)/M}`.
pub fn kernel_sum(omega: f64, j: usize, m_dim: usize) -> Complex {
    let mf = m_dim as f64;
    (0..m_dim)
        .map(|l| Complex::from_polar(1.0, std::f64::consts::TAU * l as f64 * (omega - j as f64) / mf))
        .sum::<Complex>()
        / mf
}
