//! X-pulse re/decoupling compiler for the longitudinal Ising register
//! `H_NMR = Σ (ω_l/2) σ^z_l + Σ J_l σ^z_l σ^z_{l+1}`.
//!
//! The register evolves under `H_NMR` at all times. Flipping a qubit with an
//! X pulse reverses the sign of every term containing its `σ^z`, so a
//! [`SignMatrix`] (one row per qubit, one column per interval) fixes which
//! terms survive a cycle: a term's weight is the row sum (single-qubit
//! terms) or the dot product of two rows (couplings). Decoupling keeps only
//! one `σ^z_l`; recoupling keeps only one `σ^z_l σ^z_{l+1}`.
//!
//! [`schedule_from_sign_matrix`] turns a sign matrix into a
//! [`PulseSchedule`] with interval length `τ / m`, cancels doubled pulses and
//! merges intervals across empty layers. The `compile_*` functions pick the
//! sign matrix for a target and check the reconstructed unitary against the
//! dense target before returning.

mod compile;
mod schedule;
mod sign;

pub use compile::{
    compile, compile_single_z, compile_xy, compile_zz, verify_against_target, verify_schedule, SignSource, VerifyReport,
};
pub use schedule::{
    free_evolution, schedule_from_sign_matrix, Basis, Conjugation, EffectiveHamiltonian, Lowering, PulseSchedule,
    Target, TargetKind,
};
pub use sign::{
    compact_decoupling_sign_matrix, compact_recoupling_sign_matrix, decoupling_sign_matrix, hadamard_matrix,
    recoupling_sign_matrix, SignMatrix, MAX_HADAMARD_ORDER,
};
