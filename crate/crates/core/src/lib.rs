//! Exact diagonalization of two trapped interacting bosons plus a single
//! impurity atom in one dimension, with sudden-quench dynamics of the
//! inter-species coupling and the observables derived from it: densities,
//! reduced density matrices, entanglement entropies, Loschmidt echoes, and
//! the broadened spectral function.
//!
//! Everything is expressed in harmonic-oscillator trap units
//! (ħ = m = ω = a_ho = 1). The pipeline runs basis → fock → hamiltonian →
//! solver → quench → observables, with `oracle` holding slow independent
//! cross-checks.

pub mod basis;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod observables;
pub mod oracle;
pub mod quench;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
