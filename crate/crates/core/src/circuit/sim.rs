use crate::channels::{apply_ops_on, CptpStatus};
use crate::error::{Error, Result};
use crate::qcore::{apply_left, apply_left_slice, conjugate, qubit_bit, CMatrix, CVector, DensityMatrix, ONE, ZERO};
use crate::tol;

use super::{Instruction, Program, MAX_UNITARY_QUBITS};

/// Input state for [`run_statevector`].
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// Computational basis state by index (qubit 1 is the most significant bit).
    Basis(usize),
    /// Bit string such as `"0100000"`, qubit 1 first.
    Label(String),
    Amplitudes(CVector),
}

impl InitialState {
    fn amplitudes(&self, n: usize) -> Result<CVector> {
        let dim = 1usize << n;
        let v = match self {
            InitialState::Basis(index) => {
                if *index >= dim {
                    return Err(Error::InvalidArgument(format!("basis index {index} on {n} qubits")));
                }
                let mut v = CVector::zeros(dim);
                v[*index] = ONE;
                v
            }
            InitialState::Label(bits) => {
                if bits.len() != n || !bits.chars().all(|ch| ch == '0' || ch == '1') {
                    return Err(Error::InvalidArgument(format!("`{bits}` is not a {n}-bit label")));
                }
                let index = usize::from_str_radix(bits, 2).expect("validated bit string");
                let mut v = CVector::zeros(dim);
                v[index] = ONE;
                v
            }
            InitialState::Amplitudes(v) => {
                if v.len() != dim {
                    return Err(Error::Dimension(format!("{} amplitudes for {n} qubits", v.len())));
                }
                if (v.norm() - 1.0).abs() > tol::TRACE {
                    return Err(Error::InvalidArgument(format!(
                        "amplitude vector has norm {}",
                        v.norm()
                    )));
                }
                v.clone()
            }
        };
        Ok(v)
    }
}

/// Options for [`run_density`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Apply Kraus instructions whose channel failed the CPTP audit.
    pub allow_non_cptp: bool,
}

/// Output amplitudes of a unitary-only program.
pub fn run_statevector(p: &Program, init: &InitialState) -> Result<CVector> {
    if let Some(ins) = p.first_non_unitary() {
        return Err(Error::NonUnitaryProgram(ins.describe()));
    }
    let n = p.n_qubits();
    let mut psi = init.amplitudes(n)?;
    for ins in p.instructions() {
        if let Instruction::Gate(g) = ins {
            apply_left_slice(&g.matrix(), &g.qubits(), n, psi.as_mut_slice(), 1)?;
        }
    }
    Ok(psi)
}

/// Evolves a density matrix through every instruction of `p`.
///
/// Gates act by conjugation, Kraus instructions by their operator sum, and
/// `MeasureDiscard` removes the qubit from the register. The output lives on
/// the remaining qubits in ascending label order.
pub fn run_density(p: &Program, rho0: &DensityMatrix, opts: RunOptions) -> Result<DensityMatrix> {
    let n = p.n_qubits();
    if rho0.dim() != 1usize << n {
        return Err(Error::Dimension(format!(
            "{}-dimensional state for a {n}-qubit program",
            rho0.dim()
        )));
    }
    let mut alive: Vec<usize> = (1..=n).collect();
    let mut rho = rho0.matrix().clone();
    let position = |alive: &[usize], q: usize| -> Result<usize> {
        alive
            .iter()
            .position(|&a| a == q)
            .map(|i| i + 1)
            .ok_or_else(|| Error::InvalidArgument(format!("qubit {q} was discarded")))
    };
    for ins in p.instructions() {
        let cur = alive.len();
        match ins {
            Instruction::Gate(g) => {
                let targets = g
                    .qubits()
                    .iter()
                    .map(|&q| position(&alive, q))
                    .collect::<Result<Vec<_>>>()?;
                conjugate(&g.matrix(), &targets, cur, &mut rho)?;
            }
            Instruction::Kraus { channel, qubit } => {
                if let CptpStatus::Violated { deficit } = channel.cptp() {
                    if !opts.allow_non_cptp {
                        return Err(Error::NotCptp { deficit });
                    }
                }
                rho = apply_ops_on(&rho, channel.ops(), position(&alive, *qubit)?, cur)?;
            }
            Instruction::MeasureDiscard(q) => {
                let pos = position(&alive, *q)?;
                dephase(&mut rho, pos, cur);
                let keep: Vec<usize> = (1..=cur).filter(|&k| k != pos).collect();
                if keep.is_empty() {
                    return Err(Error::InvalidArgument("cannot discard the last qubit".into()));
                }
                rho = partial_trace_matrix(&rho, &keep, cur)?;
                alive.remove(pos - 1);
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(rho))
}

fn dephase(rho: &mut CMatrix, qubit: usize, n: usize) {
    let dim = 1usize << n;
    for j in 0..dim {
        for i in 0..dim {
            if qubit_bit(i, qubit, n) != qubit_bit(j, qubit, n) {
                rho[(i, j)] = ZERO;
            }
        }
    }
}

/// Full `2ⁿ × 2ⁿ` unitary of a gate-only program.
pub fn unitary_of(p: &Program) -> Result<CMatrix> {
    if let Some(ins) = p.first_non_unitary() {
        return Err(Error::NonUnitaryProgram(ins.describe()));
    }
    let n = p.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "unitary reconstruction limited to {MAX_UNITARY_QUBITS} qubits, program has {n}"
        )));
    }
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim, dim);
    for ins in p.instructions() {
        if let Instruction::Gate(g) = ins {
            apply_left(&g.matrix(), &g.qubits(), n, &mut u)?;
        }
    }
    Ok(u)
}

fn partial_trace_matrix(rho: &CMatrix, keep: &[usize], n: usize) -> Result<CMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "partial trace must keep at least one qubit".into(),
        ));
    }
    for (i, &q) in keep.iter().enumerate() {
        if q == 0 || q > n {
            return Err(Error::QubitOutOfRange { qubit: q, n });
        }
        if keep[..i].contains(&q) {
            return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
        }
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (1..=n).filter(|q| !kept.contains(q)).collect();
    let spread = |bits: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .map(|(i, &q)| ((bits >> (k - 1 - i)) & 1) << (n - q))
            .sum()
    };
    let kept_idx: Vec<usize> = (0..1usize << kept.len()).map(|a| spread(a, &kept)).collect();
    let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|t| spread(t, &traced)).collect();
    let dk = kept_idx.len();
    Ok(CMatrix::from_fn(dk, dk, |a, b| {
        traced_idx.iter().map(|t| rho[(kept_idx[a] | t, kept_idx[b] | t)]).sum()
    }))
}

/// Reduced state on the qubits in `keep`, ordered by ascending label.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = crate::qcore::qubit_count(rho.dim())?;
    Ok(DensityMatrix::new_unchecked(partial_trace_matrix(
        rho.matrix(),
        keep,
        n,
    )?))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::channels::{dephasing_kraus_paper, dissipation_kraus};
    use crate::circuit::Gate;
    use crate::qcore::{max_abs, r, trace_distance, BlochVector};

    #[test]
    fn empty_program_is_identity() {
        let p = Program::new(3);
        let out = run_statevector(&p, &InitialState::Basis(0)).unwrap();
        assert_eq!(out[0], ONE);
        assert_eq!(out.iter().filter(|z| **z != ZERO).count(), 1);
        let rho = DensityMatrix::basis_state(3, 5);
        assert_eq!(run_density(&p, &rho, RunOptions::default()).unwrap(), rho);
    }

    #[test]
    fn hadamard_on_zero() {
        let mut p = Program::new(1);
        p.push(Gate::H(1)).unwrap();
        let out = run_statevector(&p, &InitialState::Label("0".into())).unwrap();
        assert!((out[0] - r(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((out[1] - r(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn involution_and_cnot_identity() {
        let mut p = Program::new(1);
        p.push(Gate::X(1)).unwrap().push(Gate::X(1)).unwrap();
        assert_eq!(unitary_of(&p).unwrap(), CMatrix::identity(2, 2));

        let mut p = Program::new(2);
        p.push(Gate::H(2))
            .unwrap()
            .push(Gate::Cz(1, 2))
            .unwrap()
            .push(Gate::H(2))
            .unwrap();
        let cnot = Gate::Cnot { control: 1, target: 2 }.matrix();
        assert!(max_abs(&(unitary_of(&p).unwrap() - cnot)) < 1e-15);
    }

    #[test]
    fn statevector_rejects_kraus() {
        let mut p = Program::new(1);
        p.push(Instruction::Kraus {
            channel: dissipation_kraus(1.0, 0.1).unwrap(),
            qubit: 1,
        })
        .unwrap();
        assert!(matches!(
            run_statevector(&p, &InitialState::Basis(0)),
            Err(Error::NonUnitaryProgram(_))
        ));
        assert!(matches!(unitary_of(&p), Err(Error::NonUnitaryProgram(_))));
    }

    #[test]
    fn strong_damping_drives_to_ground() {
        let mut p = Program::new(1);
        p.push(Instruction::Kraus {
            channel: dissipation_kraus(1.0, 50.0).unwrap(),
            qubit: 1,
        })
        .unwrap();
        for v in [
            BlochVector::new(0.0, 0.0, -1.0),
            BlochVector::new(0.6, 0.0, 0.8),
            BlochVector::new(0.0, 0.0, 0.0),
        ] {
            let out = run_density(&p, &v.to_density(), RunOptions::default()).unwrap();
            assert!(trace_distance(&out, &DensityMatrix::basis_state(1, 0)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn non_cptp_channel_needs_override() {
        let mut p = Program::new(1);
        p.push(Instruction::Kraus {
            channel: dephasing_kraus_paper(1.0, 1.0).unwrap(),
            qubit: 1,
        })
        .unwrap();
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(matches!(
            run_density(&p, &rho, RunOptions::default()),
            Err(Error::NotCptp { .. })
        ));
        let out = run_density(&p, &rho, RunOptions { allow_non_cptp: true }).unwrap();
        assert!((out.trace() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn partial_trace_examples() {
        let a = BlochVector::new(0.2, -0.3, 0.5).to_density();
        let b = BlochVector::new(0.0, 0.6, -0.1).to_density();
        let ab = a.tensor(&b);
        assert!(max_abs(&(partial_trace(&ab, &[1]).unwrap().matrix() - a.matrix())) < 1e-15);
        assert!(max_abs(&(partial_trace(&ab, &[2]).unwrap().matrix() - b.matrix())) < 1e-15);

        let mut bell = CVector::zeros(4);
        bell[0] = r(FRAC_1_SQRT_2);
        bell[3] = r(FRAC_1_SQRT_2);
        let bell = DensityMatrix::pure(&bell);
        let half = DensityMatrix::maximally_mixed(1);
        for q in [1, 2] {
            assert!(max_abs(&(partial_trace(&bell, &[q]).unwrap().matrix() - half.matrix())) < 1e-15);
        }

        let s01 = DensityMatrix::basis_state(2, 0b01);
        assert_eq!(partial_trace(&s01, &[2]).unwrap(), DensityMatrix::basis_state(1, 1));
        assert!(partial_trace(&s01, &[]).is_err());
        assert!(partial_trace(&s01, &[3]).is_err());
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = DensityMatrix::maximally_mixed(4);
        let red = partial_trace(&rho, &[2, 4]).unwrap();
        assert!((red.trace() - 1.0).abs() < 1e-12);
        assert_eq!(red.dim(), 4);
    }

    #[test]
    fn measure_discard_on_middle_qubit_relabels() {
        // |1⟩ ⊗ |+⟩ ⊗ |0⟩, discard qubit 2, then X on qubit 3 acts on the new second position.
        let mut p = Program::new(3);
        p.push(Instruction::MeasureDiscard(2))
            .unwrap()
            .push(Gate::X(3))
            .unwrap();
        let plus = BlochVector::new(1.0, 0.0, 0.0).to_density();
        let rho = DensityMatrix::basis_state(1, 1)
            .tensor(&plus)
            .tensor(&DensityMatrix::basis_state(1, 0));
        let out = run_density(&p, &rho, RunOptions::default()).unwrap();
        assert_eq!(out, DensityMatrix::basis_state(2, 0b11));
    }
}
