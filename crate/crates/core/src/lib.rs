//! Eigenstate generation with the phase-estimation algorithm, simulated for a
//! register of index qubits coupled to one truncated bosonic mode.
//!
//! * [`linalg`]: dense complex algebra, Hermitian Jacobi eigensolver,
//!   spectral exponentials
//! * [`fock`]: ladder operators, Fock/coherent/squeezed states, displacement
//!   and squeeze unitaries
//! * [`kernel`]: the readout kernel `f(ω, j)` and the bounds built on it
//! * [`qpe`]: the statevector pipeline, from preparation to measurement
//! * [`diagnostics`]: overlaps, the `G`/`H` partition, `p` and `p′`
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod fock;
pub mod kernel;
pub mod linalg;
pub mod qpe;

pub use diagnostics::{OverlapProfile, QRule, SetPartition};
pub use fock::{FockSpace, TargetState};
pub use kernel::{Eigenphase, IndexSize};
pub use linalg::{Complex, ComplexMatrix, ComplexVector};
pub use qpe::{JointState, OutcomePolicy, SamplingSeed, TargetUnitary};
