//! Randomized quantum Krylov diagonalization (rQKD) for double-factorized
//! electronic-structure Hamiltonians.
//!
//! The crate covers the full simulation pipeline:
//!
//! * [`ingest`] — FCIDUMP parsing and active-space coefficient assembly,
//! * [`xdf`] — two-step eigendecomposition of the electron-repulsion tensor
//!   into an explicitly double-factorized (XDF) Hamiltonian,
//! * [`statevector`] — a dense statevector engine over `2 * n_orb` qubits with
//!   fast-forwardable primitives (Givens networks, diagonal evolutions),
//! * [`evolution`] — deterministic Trotter-Suzuki and stochastic (single- and
//!   triple-depth) time-evolution protocols with importance-sampling weights,
//! * [`measurement`] — finite-shot Hadamard-test emulation of subspace matrix
//!   elements,
//! * [`krylov`] — assembly and regularized solution of the generalized
//!   eigenproblem, with energy-vs-subspace-size series,
//! * [`depth`] — static CNOT count/depth accounting for each protocol,
//! * [`reference`] — brute-force oracles (dense many-body Hamiltonians, FCI,
//!   exact propagation, dense orbital rotations, simplex weight optimization).
//!
//! Everything is deterministic for a fixed seed: stochastic components draw
//! from counter-based RNG streams keyed by (seed, domain, id), so results are
//! independent of thread count and scheduling.

// Force the link against the system OpenBLAS that backs ndarray-linalg.
extern crate openblas_src;

pub mod depth;
pub mod error;
pub mod evolution;
pub mod ingest;
pub mod krylov;
pub mod linalg;
pub mod measurement;
pub mod parallel;
pub mod reference;
pub mod rng;
pub mod statevector;
pub mod xdf;

pub use error::Error;
pub use ingest::{ActiveHamiltonian, IntegralSet};
pub use statevector::State;
pub use xdf::XdfHamiltonian;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
