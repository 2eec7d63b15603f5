//! Schmidt-number certification of bipartite pure states from random Pauli
//! correlation data.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! runner and the command line live in the `schmidt-cert` companion crate.
//!
//! Conventions used throughout:
//!
//! * basis indices are integers with qubit 0 as the most significant bit;
//! * in a bipartite state the A-subsystem qubits are the high-order bits, so
//!   amplitude `a * d_B + b` belongs to `|a>_A |b>_B`;
//! * Pauli operators are stored as `(x, z)` bit masks in the same convention.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certify;
pub mod cm;
mod error;
mod linalg;
pub mod pauli;
pub mod random_unitary;
pub mod seed;
pub mod state;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex;

/// Double-precision complex scalar used for amplitudes and operators.
pub type C64 = Complex<f64>;

pub use certify::{
    certify, certify_cm, noise_threshold, numerical_rank, singular_spectrum, CertificationReport,
    CertifyConfig, Rotation,
};
pub use cm::{build_full_cm, build_projected_cm, sample_pauli_set, NoiseModel, PauliSet, ProjectedCm};
pub use pauli::PauliOp;
pub use random_unitary::{brickwork_circuit, haar_unitary, BrickworkCircuit, LocalUnitary};
pub use state::{SchmidtData, StateVector};
