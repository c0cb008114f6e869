//! Numerical tolerances shared across the crate.

/// `‖A − A†‖_max` allowed for a matrix treated as Hermitian.
pub const HERMITIAN: f64 = 1e-12;
/// `‖U†U − I‖_max` allowed for a matrix treated as unitary.
pub const UNITARY: f64 = 1e-10;
/// Trace of a density matrix must equal one within this.
pub const TRACE: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix.
pub const POSITIVITY: f64 = 1e-10;
/// `|r|` may exceed one by this much for a physical Bloch vector.
pub const BLOCH_NORM: f64 = 1e-10;
/// `‖Σ K†K − I‖_max` below which a Kraus set is CPTP.
pub const CPTP: f64 = 1e-10;
/// Operator-norm error accepted by schedule verification.
pub const SCHEDULE: f64 = 1e-8;
/// Slack for the sampled Bloch-ball containment test of an affine channel.
pub const BLOCH_BALL: f64 = 1e-9;
/// Per-state trace drift tolerated along an exact trajectory.
pub const TRAJECTORY_TRACE_EXACT: f64 = 1e-8;
/// Per-state trace drift tolerated along a Trotter trajectory.
pub const TRAJECTORY_TRACE_TROTTER: f64 = 1e-6;
