//! Target evolutions to pulse schedules, and exact verification.

use serde::Serialize;

use crate::circuit::{unitary_of, MAX_UNITARY_QUBITS};
use crate::error::{Error, Result};
use crate::hamiltonians::NmrParameters;
use crate::qcore::{operator_norm, phase_align, CMatrix};
use crate::tol;

use super::schedule::{schedule_from_sign_matrix, Basis, Conjugation, Lowering, PulseSchedule, Target, TargetKind};
use super::sign::{
    compact_decoupling_sign_matrix, compact_recoupling_sign_matrix, decoupling_sign_matrix, recoupling_sign_matrix,
};

/// Which family of sign matrices drives the compiler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignSource {
    /// Four columns from the order-4 Hadamard matrix, any register size.
    #[default]
    Compact,
    /// Rows of the smallest Sylvester matrix covering the register (8
    /// columns for 5 to 8 qubits).
    Hadamard,
}

fn adjacent(pair: (usize, usize), n: usize) -> Result<()> {
    let (a, b) = pair;
    for q in [a, b] {
        if q == 0 || q > n {
            return Err(Error::QubitOutOfRange { qubit: q, n });
        }
    }
    if b != a + 1 {
        return Err(Error::NonAdjacentPair(a, b));
    }
    Ok(())
}

/// Compiles `kind` for time `tau` under `params`. The result is checked
/// against the dense target before it is returned (for registers up to
/// [`MAX_UNITARY_QUBITS`]); a mismatch is reported as
/// [`Error::Verification`].
pub fn compile(kind: TargetKind, tau: f64, params: &NmrParameters, source: SignSource) -> Result<PulseSchedule> {
    params.validate()?;
    if !tau.is_finite() {
        return Err(Error::InvalidArgument("evolution time must be finite".into()));
    }
    let n = params.n_qubits();
    let coefficient = kind.coefficient_in(params)?;
    let mut schedule = match kind {
        TargetKind::Z(q) => {
            let s = match source {
                SignSource::Compact => compact_decoupling_sign_matrix(n, q)?,
                SignSource::Hadamard => decoupling_sign_matrix(n, q)?,
            };
            schedule_from_sign_matrix(&s, tau)
        }
        TargetKind::Zz(a, b) | TargetKind::Xy(a, b) => {
            adjacent((a, b), n)?;
            let s = match source {
                SignSource::Compact => compact_recoupling_sign_matrix(n, (a, b))?,
                SignSource::Hadamard => recoupling_sign_matrix(n, (a, b))?,
            };
            let mut sch = schedule_from_sign_matrix(&s, tau);
            if matches!(kind, TargetKind::Xy(..)) && tau != 0.0 {
                sch.conjugations = vec![
                    Conjugation {
                        basis: Basis::X,
                        qubits: vec![a, b],
                    },
                    Conjugation {
                        basis: Basis::Y,
                        qubits: vec![a, b],
                    },
                ];
            }
            sch
        }
    };
    schedule.target = Some(Target { kind, tau, coefficient });
    if n <= MAX_UNITARY_QUBITS {
        let report = verify_against_target(&schedule, params)?;
        if !report.pass {
            return Err(Error::Verification(report.norm_error));
        }
    }
    Ok(schedule)
}

/// `u^z_l(τ) = e^{−i(τ/2) ω_l σ^z_l}`.
pub fn compile_single_z(l: usize, tau: f64, params: &NmrParameters) -> Result<PulseSchedule> {
    compile(TargetKind::Z(l), tau, params, SignSource::default())
}

/// `e^{−iτ J_l σ^z_l σ^z_{l+1}}` for an adjacent pair.
pub fn compile_zz(pair: (usize, usize), tau: f64, params: &NmrParameters) -> Result<PulseSchedule> {
    compile(TargetKind::Zz(pair.0, pair.1), tau, params, SignSource::default())
}

/// `e^{−iτ J_l (σ^xσ^x + σ^yσ^y)}` for an adjacent pair: the σ^zσ^z schedule
/// run once in the X basis and once in the Y basis (the two terms commute).
pub fn compile_xy(pair: (usize, usize), tau: f64, params: &NmrParameters) -> Result<PulseSchedule> {
    compile(TargetKind::Xy(pair.0, pair.1), tau, params, SignSource::default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Operator-norm distance after global-phase alignment.
    pub norm_error: f64,
    /// `|tr(U_target† U)| / 2^n`.
    pub fidelity: f64,
    pub pass: bool,
    /// Set when the parameters differ from the coefficient recorded in the
    /// schedule's target descriptor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mismatch: Option<String>,
}

/// Reconstructs the schedule's unitary under `params` and compares it with
/// `target` up to a global phase.
pub fn verify_schedule(s: &PulseSchedule, target: &CMatrix, params: &NmrParameters) -> Result<VerifyReport> {
    if s.n_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "verification is limited to {MAX_UNITARY_QUBITS} qubits"
        )));
    }
    let dim = 1usize << s.n_qubits;
    if target.nrows() != dim || target.ncols() != dim {
        return Err(Error::Dimension(format!(
            "target is {}x{}, schedule needs {dim}x{dim}",
            target.nrows(),
            target.ncols()
        )));
    }
    let u = unitary_of(&s.to_program(params, Lowering::Opaque)?)?;
    let aligned = phase_align(target, &u);
    let norm_error = operator_norm(&(&aligned - target));
    let fidelity = (target.adjoint() * &u).trace().norm() / dim as f64;
    Ok(VerifyReport {
        norm_error,
        fidelity,
        pass: norm_error <= tol::SCHEDULE,
        target_mismatch: None,
    })
}

/// Verifies against the evolution named in the schedule's target descriptor.
pub fn verify_against_target(s: &PulseSchedule, params: &NmrParameters) -> Result<VerifyReport> {
    let target = s
        .target
        .ok_or_else(|| Error::InvalidArgument("schedule carries no target descriptor".into()))?;
    let mut report = verify_schedule(s, &target.unitary(s.n_qubits)?, params)?;
    let current = target.kind.coefficient_in(params)?;
    if current != target.coefficient {
        report.target_mismatch = Some(format!(
            "{} was compiled for coefficient {:?} but the parameters give {:?}",
            target.kind, target.coefficient, current
        ));
    }
    Ok(report)
}
