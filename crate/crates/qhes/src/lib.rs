//! Statevector simulation and classical verification of a Heaviside-filter
//! quantum eigensolver.
//!
//! The library provides the full stack described in the README: a dense
//! statevector simulator with named registers, exact Pauli-Hamiltonian
//! evolution, quantum phase estimation, the coin-toss (Dirac) and
//! Heaviside-filter oracles with freezing-operator qubit recycling,
//! fixed-point amplitude amplification, and the top-level quantum judge /
//! quantum selector that solve eigenvalues by dichotomy and extract
//! eigenstates. A brute-force reference oracle cross-checks every amplitude
//! the circuits produce.
//!
//! Entry points to start with: [`solver::dichotomy_lowest`],
//! [`solver::quantum_selector`], and the runnable programs under `examples/`.

pub mod amplify;
pub mod error;
pub mod hamiltonian;
pub mod phase;
pub mod state;

pub use error::{Error, Result};
