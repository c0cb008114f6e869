//! Pulse schedules: free evolutions under `H_NMR` separated by layers of X
//! pulses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, Instruction, Program};
use crate::error::{Error, Result};
use crate::hamiltonians::NmrParameters;
use crate::qcore::{matexp_hermitian, pauli_string, r, CMatrix, Pauli, C64, ZERO};

use super::sign::SignMatrix;

/// The evolution a schedule is meant to realise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    /// `e^{−i(τ/2) ω_l σ^z_l}`
    Z(usize),
    /// `e^{−iτ J_l σ^z_l σ^z_{l+1}}`
    Zz(usize, usize),
    /// `e^{−iτ J_l (σ^x_l σ^x_{l+1} + σ^y_l σ^y_{l+1})}`
    Xy(usize, usize),
}

impl TargetKind {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            TargetKind::Z(q) => vec![q],
            TargetKind::Zz(a, b) | TargetKind::Xy(a, b) => vec![a, b],
        }
    }

    fn coefficient_name(&self) -> &'static str {
        match self {
            TargetKind::Z(_) => "omega",
            _ => "J",
        }
    }

    /// Coefficient the current parameters assign to this target.
    pub fn coefficient_in(&self, params: &NmrParameters) -> Result<f64> {
        let n = params.n_qubits();
        match *self {
            TargetKind::Z(q) => {
                if q == 0 || q > n {
                    return Err(Error::QubitOutOfRange { qubit: q, n });
                }
                Ok(params.omega[q - 1])
            }
            TargetKind::Zz(a, b) | TargetKind::Xy(a, b) => {
                for q in [a, b] {
                    if q == 0 || q > n {
                        return Err(Error::QubitOutOfRange { qubit: q, n });
                    }
                }
                if b != a + 1 {
                    return Err(Error::NonAdjacentPair(a, b));
                }
                Ok(params.j[a - 1])
            }
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetKind::Z(q) => write!(f, "z:{q}"),
            TargetKind::Zz(a, b) => write!(f, "zz:{a},{b}"),
            TargetKind::Xy(a, b) => write!(f, "xy:{a},{b}"),
        }
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("`{s}` is not a target (expected z:l, zz:l,m or xy:l,m)"));
        let (kind, qubits) = s.split_once(':').ok_or_else(bad)?;
        let qubits: Vec<usize> = qubits
            .split(',')
            .map(|q| q.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind, qubits.as_slice()) {
            ("z", [q]) => Ok(TargetKind::Z(*q)),
            ("zz", [a, b]) => Ok(TargetKind::Zz(*a, *b)),
            ("xy", [a, b]) => Ok(TargetKind::Xy(*a, *b)),
            _ => Err(bad()),
        }
    }
}

/// Target kind with evolution time and the coefficient it was compiled for,
/// written `z:1 tau=1.0 omega=1.0` or `zz:3,4 tau=1.0 J=0.2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub kind: TargetKind,
    pub tau: f64,
    pub coefficient: f64,
}

impl Target {
    /// Dense `2^n × 2^n` target unitary.
    pub fn unitary(&self, n: usize) -> Result<CMatrix> {
        let h = match self.kind {
            TargetKind::Z(q) => pauli_string(&[(Pauli::Z, q)], n)? * r(0.5 * self.coefficient),
            TargetKind::Zz(a, b) => pauli_string(&[(Pauli::Z, a), (Pauli::Z, b)], n)? * r(self.coefficient),
            TargetKind::Xy(a, b) => {
                (pauli_string(&[(Pauli::X, a), (Pauli::X, b)], n)? + pauli_string(&[(Pauli::Y, a), (Pauli::Y, b)], n)?)
                    * r(self.coefficient)
            }
        };
        matexp_hermitian(&h, C64::new(0.0, -self.tau))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} tau={:?} {}={:?}",
            self.kind,
            self.tau,
            self.kind.coefficient_name(),
            self.coefficient
        )
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("target descriptor `{s}`: {msg}"));
        let mut parts = s.split_whitespace();
        let kind: TargetKind = parts.next().ok_or_else(|| bad("empty"))?.parse()?;
        let (mut tau, mut coefficient) = (None, None);
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let value: f64 = value.parse().map_err(|_| bad("value is not a number"))?;
            match key {
                "tau" => tau = Some(value),
                k if k == kind.coefficient_name() => coefficient = Some(value),
                _ => return Err(bad("unknown key")),
            }
        }
        Ok(Self {
            kind,
            tau: tau.ok_or_else(|| bad("missing tau"))?,
            coefficient: coefficient.ok_or_else(|| bad("missing coefficient"))?,
        })
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
}

/// Runs the whole pulse sequence once with `qubits` rotated into `basis`:
/// `H` on each qubit for X, `RX(−π/2)` before and `RX(π/2)` after for Y. A
/// σ^zσ^z evolution inside becomes σ^xσ^x or σ^yσ^y.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjugation {
    pub basis: Basis,
    pub qubits: Vec<usize>,
}

impl Conjugation {
    fn gates_before(&self) -> Vec<Gate> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        self.qubits
            .iter()
            .map(|&q| match self.basis {
                Basis::X => Gate::H(q),
                Basis::Y => Gate::Rx(-half_pi, q),
            })
            .collect()
    }

    fn gates_after(&self) -> Vec<Gate> {
        self.gates_before().iter().map(Gate::adjoint).collect()
    }
}

/// How free-evolution intervals become circuit instructions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Lowering {
    /// One register-wide `UNITARY` block `e^{−i d H_NMR}` per interval.
    #[default]
    Opaque,
    /// `RZ(ω_l d)` on each qubit and `CNOT · RZ(2 J_l d) · CNOT` per bond.
    Gates,
}

/// Intervals of `H_NMR` evolution separated by X-pulse layers.
///
/// `pulse_layers[0]` acts before the first interval, `pulse_layers[k]`
/// between intervals `k` and `k + 1`, and the last layer after the final
/// interval. Interval `k` lasts `interval_weights[k] · interval_duration`,
/// so merged intervals keep their original granularity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSchedule {
    pub n_qubits: usize,
    pub interval_duration: f64,
    pub intervals: usize,
    pub interval_weights: Vec<u32>,
    pub pulse_layers: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugations: Vec<Conjugation>,
    pub target: Option<Target>,
}

/// Coefficients of `Σ_l z_l σ^z_l + Σ_l zz_l σ^z_l σ^z_{l+1}` accumulated over
/// one pass of the sequence (already multiplied by time).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    pub z: Vec<f64>,
    pub zz: Vec<f64>,
}

impl EffectiveHamiltonian {
    /// `exp(−i(Σ z_l σ^z_l + Σ zz_l σ^z_l σ^z_{l+1}))`.
    pub fn unitary(&self) -> CMatrix {
        let n = self.z.len();
        let params = NmrParameters {
            omega: self.z.iter().map(|z| 2.0 * z).collect(),
            j: self.zz.clone(),
        };
        let d = params.diagonal();
        CMatrix::from_fn(
            1 << n,
            1 << n,
            |i, j| if i == j { C64::new(0.0, -d[i]).exp() } else { ZERO },
        )
    }
}

fn parity_set(layer: &[usize]) -> Vec<usize> {
    let mut sorted = layer.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<usize> = Vec::new();
    for q in sorted {
        if out.last() == Some(&q) {
            out.pop();
        } else {
            out.push(q);
        }
    }
    out
}

fn frame(s: &SignMatrix, k: usize) -> Vec<usize> {
    (1..=s.n_rows()).filter(|&q| s.get(q, k) < 0).collect()
}

impl PulseSchedule {
    /// Zero-length schedule.
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            interval_duration: 0.0,
            intervals: 0,
            interval_weights: Vec::new(),
            pulse_layers: vec![Vec::new()],
            conjugations: Vec::new(),
            target: None,
        }
    }

    /// Frame-by-frame schedule before any simplification: column `k` of `S`
    /// is entered with `X` on its `−1` rows and left with the same pulses, so
    /// inner layers hold both and may list a qubit twice.
    pub fn from_sign_matrix_raw(s: &SignMatrix, tau: f64) -> Self {
        let n = s.n_rows();
        if tau == 0.0 {
            return Self::identity(n);
        }
        let m = s.n_cols();
        let mut layers = vec![frame(s, 0)];
        for k in 1..m {
            let mut layer = frame(s, k - 1);
            layer.extend(frame(s, k));
            layers.push(layer);
        }
        layers.push(frame(s, m - 1));
        Self {
            n_qubits: n,
            interval_duration: tau / m as f64,
            intervals: m,
            interval_weights: vec![1; m],
            pulse_layers: layers,
            conjugations: Vec::new(),
            target: None,
        }
    }

    /// Cancels repeated X pulses within a layer and merges intervals that are
    /// separated by an empty layer.
    pub fn compress(&self) -> Self {
        let layers: Vec<Vec<usize>> = self.pulse_layers.iter().map(|l| parity_set(l)).collect();
        let mut out_layers = vec![layers[0].clone()];
        let mut weights: Vec<u32> = Vec::new();
        for (k, (layer, &w)) in layers.iter().zip(&self.interval_weights).enumerate() {
            if k > 0 && layer.is_empty() {
                *weights.last_mut().expect("interval before an inner layer") += w;
            } else {
                if k > 0 {
                    out_layers.push(layer.clone());
                }
                weights.push(w);
            }
        }
        if self.intervals > 0 {
            out_layers.push(layers[self.intervals].clone());
        }
        Self {
            intervals: weights.len(),
            interval_weights: weights,
            pulse_layers: out_layers,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::InvalidArgument(format!("malformed schedule: {msg}"));
        if self.n_qubits == 0 {
            return Err(bad("no qubits".into()));
        }
        if self.interval_weights.len() != self.intervals {
            return Err(bad(format!(
                "{} weights for {} intervals",
                self.interval_weights.len(),
                self.intervals
            )));
        }
        if self.pulse_layers.len() != self.intervals + 1 {
            return Err(bad(format!(
                "{} pulse layers for {} intervals",
                self.pulse_layers.len(),
                self.intervals
            )));
        }
        if !self.interval_duration.is_finite() {
            return Err(bad("interval duration is not finite".into()));
        }
        let all = self
            .pulse_layers
            .iter()
            .flatten()
            .chain(self.conjugations.iter().flat_map(|c| &c.qubits));
        for &q in all {
            if q == 0 || q > self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    pub fn durations(&self) -> Vec<f64> {
        self.interval_weights
            .iter()
            .map(|&w| f64::from(w) * self.interval_duration)
            .collect()
    }

    /// Total free-evolution time of one pass.
    pub fn total_time(&self) -> f64 {
        self.durations().iter().sum()
    }

    pub fn pulse_count(&self) -> usize {
        self.pulse_layers.iter().map(Vec::len).sum::<usize>() * self.conjugations.len().max(1)
    }

    /// Frame sign of every qubit during every interval, recovered from the
    /// pulse layers (`rows[q − 1][k]`).
    pub fn frames(&self) -> Vec<Vec<i8>> {
        let mut sign = vec![1i8; self.n_qubits];
        let mut rows = vec![Vec::with_capacity(self.intervals); self.n_qubits];
        for k in 0..self.intervals {
            for &q in &self.pulse_layers[k] {
                sign[q - 1] = -sign[q - 1];
            }
            for (row, s) in rows.iter_mut().zip(&sign) {
                row.push(*s);
            }
        }
        rows
    }

    /// True when the pulses leave every qubit in its original frame.
    pub fn closes_frame(&self) -> bool {
        let mut count = vec![0usize; self.n_qubits];
        for &q in self.pulse_layers.iter().flatten() {
            count[q - 1] += 1;
        }
        count.iter().all(|c| c % 2 == 0)
    }

    /// Effective diagonal Hamiltonian of one pass, from frame signs:
    /// `z_l = (ω_l/2) Σ_k d_k s_l(k)` and `zz_l = J_l Σ_k d_k s_l(k) s_{l+1}(k)`.
    /// For schedules with conjugations this describes the sequence between
    /// the basis changes.
    pub fn predict(&self, params: &NmrParameters) -> Result<EffectiveHamiltonian> {
        self.validate()?;
        self.check_register(params)?;
        if !self.closes_frame() {
            return Err(Error::InvalidArgument(
                "pulse layers do not return every qubit to its frame".into(),
            ));
        }
        let n = self.n_qubits;
        let frames = self.frames();
        let durations = self.durations();
        let z = (0..n)
            .map(|q| {
                0.5 * params.omega[q]
                    * durations
                        .iter()
                        .enumerate()
                        .map(|(k, d)| d * f64::from(frames[q][k]))
                        .sum::<f64>()
            })
            .collect();
        let zz = (0..n - 1)
            .map(|q| {
                params.j[q]
                    * durations
                        .iter()
                        .enumerate()
                        .map(|(k, d)| d * f64::from(frames[q][k] * frames[q + 1][k]))
                        .sum::<f64>()
            })
            .collect();
        Ok(EffectiveHamiltonian { z, zz })
    }

    fn check_register(&self, params: &NmrParameters) -> Result<()> {
        if params.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "schedule has {} qubits, parameters describe {}",
                self.n_qubits,
                params.n_qubits()
            )));
        }
        Ok(())
    }

    /// Circuit for the schedule under `params`.
    pub fn to_program(&self, params: &NmrParameters, lowering: Lowering) -> Result<Program> {
        self.validate()?;
        self.check_register(params)?;
        let n = self.n_qubits;
        let mut body: Vec<Instruction> = Vec::new();
        let durations = self.durations();
        for (k, layer) in self.pulse_layers.iter().enumerate() {
            body.extend(layer.iter().map(|&q| Instruction::from(Gate::X(q))));
            if let Some(&d) = durations.get(k) {
                body.extend(free_evolution(params, d, lowering));
            }
        }
        let mut program = Program::new(n);
        if self.conjugations.is_empty() {
            for ins in body {
                program.push(ins)?;
            }
        } else {
            for c in &self.conjugations {
                for g in c.gates_before() {
                    program.push(g)?;
                }
                for ins in &body {
                    program.push(ins.clone())?;
                }
                for g in c.gates_after() {
                    program.push(g)?;
                }
            }
        }
        Ok(program)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let schedule: Self = serde_json::from_str(s)?;
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Schedule of the sign matrix `s` for total time `tau`, with duplicate
/// pulses cancelled and intervals merged across empty layers. Each column
/// lasts `tau / m`.
pub fn schedule_from_sign_matrix(s: &SignMatrix, tau: f64) -> PulseSchedule {
    PulseSchedule::from_sign_matrix_raw(s, tau).compress()
}

/// `e^{−i d H_NMR}` as instructions.
pub fn free_evolution(params: &NmrParameters, d: f64, lowering: Lowering) -> Vec<Instruction> {
    let n = params.n_qubits();
    match lowering {
        Lowering::Opaque => {
            let diag = params.diagonal();
            let matrix = CMatrix::from_fn(1 << n, 1 << n, |i, j| {
                if i == j {
                    C64::new(0.0, -d * diag[i]).exp()
                } else {
                    ZERO
                }
            });
            vec![Gate::Unitary {
                matrix,
                qubits: (1..=n).collect(),
            }
            .into()]
        }
        Lowering::Gates => {
            let mut out: Vec<Instruction> = Vec::new();
            for (q, &w) in params.omega.iter().enumerate() {
                if w != 0.0 {
                    out.push(Gate::Rz(w * d, q + 1).into());
                }
            }
            for (q, &j) in params.j.iter().enumerate() {
                if j != 0.0 {
                    let (control, target) = (q + 1, q + 2);
                    out.push(Gate::Cnot { control, target }.into());
                    out.push(Gate::Rz(2.0 * j * d, target).into());
                    out.push(Gate::Cnot { control, target }.into());
                }
            }
            out
        }
    }
}
