//! Single-qubit channels.
//!
//! A channel on one qubit is handled in two equivalent forms: the operator sum
//! `ρ → Σ_k K_k ρ K_k†` ([`KrausChannel`]) and the affine action `r → M r + m`
//! on Bloch vectors ([`AffineChannel`]). Every channel in scope is built from
//! two angles `(υ, μ)` through
//!
//! ```text
//! α = (μ + υ)/2,  β = (μ − υ)/2
//! K1 = diag(cos β, cos α),  K2 = [[0, sin α], [sin β, 0]]
//! ```
//!
//! whose Bloch map is `diag(cos υ, cos μ, cos υ cos μ)` with shift
//! `(0, 0, sin υ sin μ)`.
//!
//! # Noise conventions
//!
//! The lowering operator is `σ^- = σ^x + iσ^y = 2|0⟩⟨1|`, so the dissipator
//! `Γ(−σ^+σ^-ρ − ρσ^+σ^- + 2σ^-ρσ^+)` relaxes `|1⟩ → |0⟩`: coherences decay
//! as `e^{−4Γt}` and the excited population as `e^{−8Γt}`. In Bloch
//! coordinates (`r_z = +1` is `|0⟩`) the exact solution is
//!
//! ```text
//! r_x' = r_x e^{−4Γt},  r_y' = r_y e^{−4Γt},  r_z' = 1 − e^{−8Γt}(1 − r_z)
//! ```
//!
//! which is what [`dissipation_kraus`] and [`damping_basis_solution`] produce.
//!
//! Pure dephasing uses the excitation projector `n = |1⟩⟨1|`:
//! `γ(2nρn − nρ − ρn)` damps coherences as `e^{−γt}` and leaves populations
//! alone ([`dephasing_kraus_corrected`]). The alternative pair
//! [`dephasing_kraus_paper`] is kept verbatim for comparison; it is not trace
//! preserving and carries a [`CptpStatus::Violated`] flag.

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, Instruction, Program};
use crate::error::{Error, Result};
use crate::qcore::{conjugate, density_to_bloch, max_abs, r, BlochVector, CMatrix, DensityMatrix, Pauli};
use crate::tol;

/// Outcome of the completeness audit `Σ K†K = I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CptpStatus {
    Verified,
    /// `deficit = ‖Σ K†K − I‖_max`.
    Violated {
        deficit: f64,
    },
    Unchecked,
}

impl CptpStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CptpStatus::Verified => "verified",
            CptpStatus::Violated { .. } => "violated",
            CptpStatus::Unchecked => "unchecked",
        }
    }
}

/// Where a Kraus set came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Angles { upsilon: f64, mu: f64 },
    Dissipation { rate: f64, time: f64 },
    DephasingPaper { rate: f64, time: f64 },
    DephasingCorrected { rate: f64, time: f64 },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    cptp: CptpStatus,
    provenance: Provenance,
}

impl KrausChannel {
    /// Builds a single-qubit channel and audits its completeness relation.
    pub fn new(ops: Vec<CMatrix>, provenance: Provenance) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument(
                "a channel needs at least one Kraus operator".into(),
            ));
        }
        if ops.iter().any(|k| k.nrows() != 2 || k.ncols() != 2) {
            return Err(Error::Dimension("single-qubit Kraus operators must be 2x2".into()));
        }
        let deficit = completeness_deficit(&ops);
        let cptp = if deficit <= tol::CPTP {
            CptpStatus::Verified
        } else {
            CptpStatus::Violated { deficit }
        };
        Ok(Self { ops, cptp, provenance })
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn cptp(&self) -> CptpStatus {
        self.cptp
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> CMatrix {
        completeness(&self.ops)
    }

    pub fn deficit(&self) -> f64 {
        completeness_deficit(&self.ops)
    }

    pub fn affine(&self) -> AffineChannel {
        AffineChannel::from_kraus(self)
    }
}

fn completeness(ops: &[CMatrix]) -> CMatrix {
    ops.iter().fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k)
}

fn completeness_deficit(ops: &[CMatrix]) -> f64 {
    max_abs(&(completeness(ops) - CMatrix::identity(2, 2)))
}

fn check_rate_time(rate: f64, time: f64) -> Result<()> {
    if !(rate.is_finite() && time.is_finite()) || rate < 0.0 || time < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rate and time must be finite and non-negative (got {rate}, {time})"
        )));
    }
    Ok(())
}

fn m2(a: f64, b: f64, c_: f64, d: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(a), r(b), r(c_), r(d)])
}

fn angle_ops(alpha: f64, beta: f64) -> Vec<CMatrix> {
    vec![
        m2(beta.cos(), 0.0, 0.0, alpha.cos()),
        m2(0.0, alpha.sin(), beta.sin(), 0.0),
    ]
}

/// The two-Kraus channel of angles `(υ, μ)`.
pub fn kraus_from_angles(upsilon: f64, mu: f64) -> KrausChannel {
    let (alpha, beta) = (0.5 * (mu + upsilon), 0.5 * (mu - upsilon));
    let ops = angle_ops(alpha, beta);
    let deficit = completeness_deficit(&ops);
    debug_assert!(deficit <= tol::CPTP, "angle channel deficit {deficit}");
    KrausChannel {
        ops,
        cptp: CptpStatus::Verified,
        provenance: Provenance::Angles { upsilon, mu },
    }
}

/// Amplitude damping over `t` at rate `Γ`: `K1 = diag(1, e^{−4Γt})`,
/// `K2 = [[0, √(1 − e^{−8Γt})], [0, 0]]`.
pub fn dissipation_kraus(gamma: f64, t: f64) -> Result<KrausChannel> {
    check_rate_time(gamma, t)?;
    let e4 = (-4.0 * gamma * t).exp();
    let ops = vec![
        m2(1.0, 0.0, 0.0, e4),
        m2(0.0, (-(-8.0 * gamma * t).exp_m1()).sqrt(), 0.0, 0.0),
    ];
    KrausChannel::new(ops, Provenance::Dissipation { rate: gamma, time: t })
}

/// The dephasing pair with `e = e^{−2γt}`:
/// `K1 = diag(−e/2, e/2)`, `K2 = [[0, √(1 − e/2)], [√(1 + e/2), 0]]`.
///
/// `Σ K†K = diag(1 + e/2 + e²/4, 1 − e/2 + e²/4)`, so the audit always
/// reports a violation; [`crate::circuit::run_density`] and
/// [`apply_kraus`] refuse it unless explicitly overridden.
pub fn dephasing_kraus_paper(gamma: f64, t: f64) -> Result<KrausChannel> {
    check_rate_time(gamma, t)?;
    let e = (-2.0 * gamma * t).exp();
    let ops = vec![
        m2(-0.5 * e, 0.0, 0.0, 0.5 * e),
        m2(0.0, (1.0 - 0.5 * e).sqrt(), (1.0 + 0.5 * e).sqrt(), 0.0),
    ];
    KrausChannel::new(ops, Provenance::DephasingPaper { rate: gamma, time: t })
}

/// Phase damping: `K1 = cos(μ/2) I`, `K2 = sin(μ/2) σ^z` with `cos μ = e^{−γt}`.
pub fn dephasing_kraus_corrected(gamma: f64, t: f64) -> Result<KrausChannel> {
    check_rate_time(gamma, t)?;
    let half = 0.5 * dephasing_angle(gamma, t);
    let ops = vec![
        m2(half.cos(), 0.0, 0.0, half.cos()),
        m2(half.sin(), 0.0, 0.0, -half.sin()),
    ];
    KrausChannel::new(ops, Provenance::DephasingCorrected { rate: gamma, time: t })
}

fn dephasing_angle(gamma: f64, t: f64) -> f64 {
    (-gamma * t).exp().acos()
}

/// Affine Bloch map `r → M r + m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineChannel {
    pub m: [[f64; 3]; 3],
    pub shift: [f64; 3],
}

const BLOCH_AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn pauli_expectations(rho: &CMatrix) -> [f64; 3] {
    BLOCH_AXES.map(|p| (p.matrix() * rho).trace().re)
}

impl AffineChannel {
    /// Map induced by `(υ, μ)`.
    pub fn from_angles(upsilon: f64, mu: f64) -> Self {
        let (cu, cm) = (upsilon.cos(), mu.cos());
        Self {
            m: [[cu, 0.0, 0.0], [0.0, cm, 0.0], [0.0, 0.0, cu * cm]],
            shift: [0.0, 0.0, upsilon.sin() * mu.sin()],
        }
    }

    /// Reads `M` and `m` off the action of the Kraus set on `I/2` and `σ_k/2`.
    pub fn from_kraus(ch: &KrausChannel) -> Self {
        let act = |x: &CMatrix| -> CMatrix {
            ch.ops()
                .iter()
                .fold(CMatrix::zeros(2, 2), |acc, k| acc + k * x * k.adjoint())
        };
        let shift = pauli_expectations(&act(&(CMatrix::identity(2, 2) * r(0.5))));
        let mut m = [[0.0; 3]; 3];
        for (col, p) in BLOCH_AXES.iter().enumerate() {
            let image = pauli_expectations(&act(&(p.matrix() * r(0.5))));
            for row in 0..3 {
                m[row][col] = image[row];
            }
        }
        Self { m, shift }
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.m[0][0], self.m[1][1], self.m[2][2]]
    }

    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        let mut out = self.shift;
        for (row, o) in out.iter_mut().enumerate() {
            *o += (0..3).map(|k| self.m[row][k] * v.0[k]).sum::<f64>();
        }
        BlochVector(out)
    }

    /// Checks `|M r + m| ≤ 1` on `samples` points of the unit sphere
    /// (Fibonacci lattice) with [`tol::BLOCH_BALL`] slack. Affine maps reach
    /// their maximum norm on the boundary, so the sphere suffices.
    pub fn maps_ball_into_ball(&self, samples: usize) -> bool {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..samples.max(1)).all(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / samples.max(1) as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            let v = BlochVector::new(rho * phi.cos(), rho * phi.sin(), z);
            self.apply(&v).norm() <= 1.0 + tol::BLOCH_BALL
        })
    }
}

/// `Σ_k K_k ρ K_k†` with each 2×2 `K_k` acting on `qubit` of an `n`-qubit state.
pub fn apply_ops_on(rho: &CMatrix, ops: &[CMatrix], qubit: usize, n: usize) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for k in ops {
        let mut term = rho.clone();
        conjugate(k, &[qubit], n, &mut term)?;
        out += term;
    }
    Ok(out)
}

/// Result of [`apply_kraus_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOutput {
    pub state: DensityMatrix,
    pub trace: f64,
    /// `false` when the output trace differs from the input trace by more
    /// than [`tol::TRACE`].
    pub trace_preserved: bool,
}

/// Applies a single-qubit channel; refuses channels whose audit failed.
pub fn apply_kraus(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    apply_kraus_with(rho, ch, false).map(|out| out.state)
}

/// Applies a single-qubit channel. With `allow_non_cptp` a violated channel is
/// applied anyway and the trace change is reported instead of rejected.
pub fn apply_kraus_with(rho: &DensityMatrix, ch: &KrausChannel, allow_non_cptp: bool) -> Result<KrausOutput> {
    if let CptpStatus::Violated { deficit } = ch.cptp() {
        if !allow_non_cptp {
            return Err(Error::NotCptp { deficit });
        }
    }
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected a single-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let mat = apply_ops_on(rho.matrix(), ch.ops(), 1, 1)?;
    let trace = mat.trace().re;
    Ok(KrausOutput {
        trace_preserved: (trace - rho.trace()).abs() <= tol::TRACE,
        trace,
        state: DensityMatrix::new_unchecked(mat),
    })
}

/// One eigenmode `(L_k, R_k, λ_k)` of a single-qubit Lindblad generator:
/// `ρ(t) = Σ_k tr(L_k ρ0) e^{λ_k t} R_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingMode {
    pub left: CMatrix,
    pub right: CMatrix,
    pub eigenvalue: f64,
}

/// Damping basis of the single-qubit dissipator at rate `Γ`.
///
/// Right eigen-operators: the fixed point `|0⟩⟨0|` (λ = 0), the population
/// imbalance `|1⟩⟨1| − |0⟩⟨0|` (λ = −8Γ) and the coherences `|0⟩⟨1|`,
/// `|1⟩⟨0|` (λ = −4Γ). The left operators are the dual basis under
/// `tr(L_j R_k) = δ_jk`.
pub fn damping_basis(gamma: f64) -> Vec<DampingMode> {
    let p0 = m2(1.0, 0.0, 0.0, 0.0);
    let p1 = m2(0.0, 0.0, 0.0, 1.0);
    let up = m2(0.0, 1.0, 0.0, 0.0); // |0⟩⟨1|
    let down = m2(0.0, 0.0, 1.0, 0.0); // |1⟩⟨0|
    vec![
        DampingMode {
            left: CMatrix::identity(2, 2),
            right: p0.clone(),
            eigenvalue: 0.0,
        },
        DampingMode {
            left: p1.clone(),
            right: &p1 - &p0,
            eigenvalue: -8.0 * gamma,
        },
        DampingMode {
            left: down.clone(),
            right: up.clone(),
            eigenvalue: -4.0 * gamma,
        },
        DampingMode {
            left: up,
            right: down,
            eigenvalue: -4.0 * gamma,
        },
    ]
}

/// Closed-form solution of the single-qubit dissipator through its damping basis.
pub fn damping_basis_solution(gamma: f64, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_rate_time(gamma, t)?;
    if rho0.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected a single-qubit state, got dimension {}",
            rho0.dim()
        )));
    }
    let mut out = CMatrix::zeros(2, 2);
    for mode in damping_basis(gamma) {
        let weight = (&mode.left * rho0.matrix()).trace() * (mode.eigenvalue * t).exp();
        out += mode.right * weight;
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// Angles `(α, β)` and basis-change slot gates realising a channel with
/// the one-ancilla circuit.
fn circuit_parameters(ch: &KrausChannel) -> Result<(f64, f64, Option<Gate>)> {
    match *ch.provenance() {
        Provenance::Angles { upsilon, mu } => Ok((0.5 * (mu + upsilon), 0.5 * (mu - upsilon), None)),
        Provenance::Dissipation { rate, time } => Ok(((-4.0 * rate * time).exp().acos(), 0.0, None)),
        Provenance::DephasingCorrected { rate, time } => {
            let half = 0.5 * dephasing_angle(rate, time);
            // H maps the σ^z Kraus pair onto the antidiagonal form.
            Ok((half, half, Some(Gate::H(1))))
        }
        Provenance::DephasingPaper { .. } => Err(Error::UnsupportedChannel(
            "the printed dephasing pair is not a valid channel".into(),
        )),
        Provenance::Custom => Err(Error::UnsupportedChannel(
            "only angle, dissipation and corrected dephasing channels have a circuit".into(),
        )),
    }
}

/// Ancilla rotation angles `(2δ1, 2δ2)` for Kraus angles `(α, β)`.
pub fn ancilla_angles(alpha: f64, beta: f64) -> (f64, f64) {
    let half_pi = std::f64::consts::FRAC_PI_2;
    (beta - alpha + half_pi, beta + alpha - half_pi)
}

/// Two-qubit program realising `ch` on qubit 1 with qubit 2 as an ancilla
/// prepared in `|0⟩`:
///
/// ```text
/// [U] RY(2δ1)₂ H₂ CZ H₂ RY(2δ2)₂ H₁ CZ H₁ [U†] MEASURE_DISCARD 2
/// ```
///
/// The first CZ block is a CNOT from system to ancilla, the second a CNOT
/// back. Outcome `0` of the ancilla applies `diag(cos β, cos α)`, outcome `1`
/// applies `[[0, sin α], [sin β, 0]]`. The optional `U` slot is a basis change
/// on the system; it is only needed for dephasing, whose Kraus pair is
/// diagonal rather than antidiagonal.
pub fn channel_circuit(ch: &KrausChannel) -> Result<Program> {
    let (alpha, beta, frame) = circuit_parameters(ch)?;
    let (two_d1, two_d2) = ancilla_angles(alpha, beta);
    let mut body: Vec<Instruction> = Vec::new();
    body.extend(frame.clone().map(Instruction::from));
    body.extend(
        [
            Gate::Ry(two_d1, 2),
            Gate::H(2),
            Gate::Cz(1, 2),
            Gate::H(2),
            Gate::Ry(two_d2, 2),
            Gate::H(1),
            Gate::Cz(1, 2),
            Gate::H(1),
        ]
        .map(Instruction::from),
    );
    body.extend(frame.map(|g| Instruction::from(g.adjoint())));
    body.push(Instruction::MeasureDiscard(2));
    Program::from_instructions(2, body)
}

/// Channel summary emitted by the command-line tool.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelReport {
    pub provenance: Provenance,
    /// `kraus[k][row][col] = [re, im]`.
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
    pub cptp_status: String,
    pub deficit_norm: f64,
    pub bloch_diag: [f64; 3],
    pub bloch_shift: [f64; 3],
}

impl ChannelReport {
    pub fn new(ch: &KrausChannel) -> Self {
        let affine = ch.affine();
        Self {
            provenance: *ch.provenance(),
            kraus: ch
                .ops()
                .iter()
                .map(|k| {
                    (0..2)
                        .map(|i| (0..2).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
            cptp_status: ch.cptp().label().to_string(),
            deficit_norm: ch.deficit(),
            bloch_diag: affine.diagonal(),
            bloch_shift: affine.shift,
        }
    }
}

/// Bloch vector of the image of `v` under the operator sum, without any
/// trace renormalisation.
pub fn image_bloch(ch: &KrausChannel, v: &BlochVector) -> Result<BlochVector> {
    let rho = v.to_density();
    density_to_bloch(&apply_ops_on(rho.matrix(), ch.ops(), 1, 1)?)
}
