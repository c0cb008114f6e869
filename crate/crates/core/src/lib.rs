//! Digital quantum simulation of the Fenna–Matthews–Olson (FMO) complex.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense complex linear algebra, Pauli embeddings, density
//!   matrices and Bloch vectors.
//! * [`circuit`]: a gate-level program IR with statevector and density-matrix
//!   simulators, exact unitary reconstruction and a line-oriented text format.
//! * [`hamiltonians`]: the FMO and NMR (longitudinal Ising) Hamiltonians and
//!   the first-order Trotter propagator.
//! * [`nmr`]: Hadamard sign matrices and the X-pulse re/decoupling compiler.
//! * [`channels`]: single-qubit channel algebra, the dissipation and dephasing
//!   Kraus pairs, the damping-basis closed form and the one-ancilla circuit.
//! * [`dynamics`]: Lindblad integration and the Trotter + Kraus digital
//!   pipeline for the full register.
//! * [`config`]: the JSON run configuration consumed by the command-line tool.
//!
//! # Basis conventions
//!
//! Sites and qubits are labelled `1..=n` at every public boundary. Qubit 1 is
//! the most significant bit of a computational-basis index, so for `n = 3` the
//! index `0b100` is `|100⟩` with qubit 1 set. `σ^z|0⟩ = +|0⟩`. An excitation on
//! a site is the `|1⟩` state of that qubit; relaxation drives it back to `|0⟩`.

pub mod channels;
pub mod circuit;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod nmr;
pub mod qcore;
pub mod tol;

pub use error::{Error, Result};
pub use qcore::{CMatrix, CVector, C64};
