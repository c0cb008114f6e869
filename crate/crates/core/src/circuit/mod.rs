//! Gate-level program IR.
//!
//! A [`Program`] is an ordered list of gates, single-qubit Kraus channels and
//! measure-and-discard steps on a register of `n_qubits` qubits labelled
//! `1..=n_qubits`. Programs are simulated by [`run_statevector`],
//! [`run_density`] and [`unitary_of`], and serialised with [`export_text`] /
//! [`parse_text`].

mod sim;
mod text;

use std::f64::consts::FRAC_1_SQRT_2;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::qcore::{c, r, CMatrix, C64, ONE, ZERO};
use crate::tol;

pub use sim::{partial_trace, run_density, run_statevector, unitary_of, InitialState, RunOptions};
pub use text::{export_text, parse_text};

/// Largest register [`unitary_of`] will reconstruct.
pub const MAX_UNITARY_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    /// `exp(−iθσ^x/2)`
    Rx(f64, usize),
    /// `exp(−iθσ^y/2)`
    Ry(f64, usize),
    /// `exp(−iθσ^z/2)`
    Rz(f64, usize),
    Cz(usize, usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// `diag(1, 1, 1, e^{iθ})` on the two qubits.
    Cphase(f64, usize, usize),
    /// Arbitrary unitary on `qubits`; the first listed qubit is the most
    /// significant local bit.
    Unitary {
        matrix: CMatrix,
        qubits: Vec<usize>,
    },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::H(_) => "H",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Cz(..) => "CZ",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cphase(..) => "CPHASE",
            Gate::Unitary { .. } => "UNITARY",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(_, q) | Gate::Ry(_, q) | Gate::Rz(_, q) => vec![*q],
            Gate::Cz(a, b) | Gate::Cphase(_, a, b) => vec![*a, *b],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Unitary { qubits, .. } => qubits.clone(),
        }
    }

    /// Local matrix on [`Gate::qubits`].
    pub fn matrix(&self) -> CMatrix {
        match self {
            Gate::X(_) => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Gate::H(_) => CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, -ONE]) * r(FRAC_1_SQRT_2),
            Gate::Rx(theta, _) => {
                let (s, co) = (0.5 * theta).sin_cos();
                CMatrix::from_row_slice(2, 2, &[r(co), c(0.0, -s), c(0.0, -s), r(co)])
            }
            Gate::Ry(theta, _) => {
                let (s, co) = (0.5 * theta).sin_cos();
                CMatrix::from_row_slice(2, 2, &[r(co), r(-s), r(s), r(co)])
            }
            Gate::Rz(theta, _) => {
                let h = 0.5 * theta;
                CMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -h), ZERO, ZERO, C64::from_polar(1.0, h)])
            }
            Gate::Cz(..) => diag4(ONE, ONE, ONE, -ONE),
            Gate::Cphase(theta, ..) => diag4(ONE, ONE, ONE, C64::from_polar(1.0, *theta)),
            Gate::Cnot { .. } => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 1)] = ONE;
                m[(2, 3)] = ONE;
                m[(3, 2)] = ONE;
                m
            }
            Gate::Unitary { matrix, .. } => matrix.clone(),
        }
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::X(_) | Gate::H(_) | Gate::Cz(..) | Gate::Cnot { .. } => self.clone(),
            Gate::Rx(t, q) => Gate::Rx(-t, *q),
            Gate::Ry(t, q) => Gate::Ry(-t, *q),
            Gate::Rz(t, q) => Gate::Rz(-t, *q),
            Gate::Cphase(t, a, b) => Gate::Cphase(-t, *a, *b),
            Gate::Unitary { matrix, qubits } => Gate::Unitary {
                matrix: matrix.adjoint(),
                qubits: qubits.clone(),
            },
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q == 0 || q > n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "{} targets qubit {q} twice",
                    self.name()
                )));
            }
        }
        if let Gate::Unitary { matrix, qubits } = self {
            let dim = 1usize << qubits.len();
            if qubits.is_empty() || matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "UNITARY on {} qubit(s) needs a {dim}x{dim} matrix, got {}x{}",
                    qubits.len(),
                    matrix.nrows(),
                    matrix.ncols()
                )));
            }
            if crate::qcore::unitary_deviation(matrix) > tol::UNITARY {
                return Err(Error::InvalidArgument("UNITARY block is not unitary".into()));
            }
        }
        Ok(())
    }
}

fn diag4(a: C64, b: C64, c: C64, d: C64) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = a;
    m[(1, 1)] = b;
    m[(2, 2)] = c;
    m[(3, 3)] = d;
    m
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate(Gate),
    /// Single-qubit channel `ρ → Σ_k K_k ρ K_k†` on `qubit`.
    Kraus {
        channel: KrausChannel,
        qubit: usize,
    },
    /// Dephase `qubit` in the computational basis and trace it out.
    MeasureDiscard(usize),
}

impl Instruction {
    pub fn is_unitary(&self) -> bool {
        matches!(self, Instruction::Gate(_))
    }

    fn describe(&self) -> String {
        match self {
            Instruction::Gate(g) => g.name().to_string(),
            Instruction::Kraus { qubit, .. } => format!("KRAUS on qubit {qubit}"),
            Instruction::MeasureDiscard(q) => format!("MEASURE_DISCARD on qubit {q}"),
        }
    }
}

impl From<Gate> for Instruction {
    fn from(g: Gate) -> Self {
        Instruction::Gate(g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    n_qubits: usize,
    instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            instructions: Vec::new(),
        }
    }

    pub fn from_instructions(n_qubits: usize, instructions: Vec<Instruction>) -> Result<Self> {
        let mut p = Self::new(n_qubits);
        for ins in instructions {
            p.push(ins)?;
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, ins: impl Into<Instruction>) -> Result<&mut Self> {
        let ins = ins.into();
        let touched = match &ins {
            Instruction::Gate(g) => g.qubits(),
            Instruction::Kraus { qubit, .. } | Instruction::MeasureDiscard(qubit) => vec![*qubit],
        };
        if let Some(q) = touched.iter().find(|q| self.is_discarded(**q)) {
            return Err(Error::InvalidArgument(format!("qubit {q} was already discarded")));
        }
        match &ins {
            Instruction::Gate(g) => g.validate(self.n_qubits)?,
            Instruction::Kraus { channel, qubit } => {
                if *qubit == 0 || *qubit > self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: *qubit,
                        n: self.n_qubits,
                    });
                }
                if channel.ops().iter().any(|k| k.nrows() != 2 || k.ncols() != 2) {
                    return Err(Error::Dimension("Kraus instructions take 2x2 operators".into()));
                }
            }
            Instruction::MeasureDiscard(q) => {
                if *q == 0 || *q > self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: *q,
                        n: self.n_qubits,
                    });
                }
            }
        }
        self.instructions.push(ins);
        Ok(self)
    }

    /// Appends every instruction of `other` (same register width).
    pub fn append(&mut self, other: &Program) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension(format!(
                "appending a {}-qubit program to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        for ins in &other.instructions {
            self.push(ins.clone())?;
        }
        Ok(self)
    }

    fn is_discarded(&self, qubit: usize) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::MeasureDiscard(d) if *d == qubit))
    }

    pub fn is_unitary(&self) -> bool {
        self.instructions.iter().all(Instruction::is_unitary)
    }

    /// Gates in reverse order, each replaced by its inverse.
    pub fn adjoint(&self) -> Result<Program> {
        let mut out = Program::new(self.n_qubits);
        for ins in self.instructions.iter().rev() {
            match ins {
                Instruction::Gate(g) => {
                    out.push(g.adjoint())?;
                }
                other => return Err(Error::NonUnitaryProgram(other.describe())),
            }
        }
        Ok(out)
    }

    pub(crate) fn first_non_unitary(&self) -> Option<&Instruction> {
        self.instructions.iter().find(|i| !i.is_unitary())
    }
}
