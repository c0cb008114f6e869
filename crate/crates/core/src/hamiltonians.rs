//! FMO and NMR Hamiltonians and the first-order Trotter propagator.
//!
//! ```text
//! H0   = Σ_j ε_j σ^z_j
//! H_I  = Σ_{j≠l} ν_jl (σ^x_j σ^x_l + σ^y_j σ^y_l)        (ordered pairs)
//! H_NMR = Σ_l (ω_l/2) σ^z_l + Σ_l J_l σ^z_l σ^z_{l+1}
//! ```
//!
//! Because `H_I` runs over ordered pairs, each bond contributes
//! `2ν_jl (XX + YY)` and couples `|…1_j…0_l…⟩` to `|…0_j…1_l…⟩` with matrix
//! element `4ν_jl`. The NMR register reproduces a bond with `J_l = 2ν_{l,l+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{apply_left, matexp_hermitian, qubit_bit, qubit_mask, r, CMatrix, C64, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmoParameters {
    /// Site energies `ε_j`.
    pub epsilon: Vec<f64>,
    /// Symmetric hopping matrix `ν_jl` with zero diagonal.
    pub nu: Vec<Vec<f64>>,
}

/// A coupled pair `j < l` with its hopping rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bond {
    pub j: usize,
    pub l: usize,
    pub nu: f64,
}

impl FmoParameters {
    pub fn new(epsilon: Vec<f64>, nu: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self { epsilon, nu };
        p.validate()?;
        Ok(p)
    }

    /// Nearest-neighbour chain with uniform hopping `nu`.
    pub fn chain(epsilon: Vec<f64>, nu: f64) -> Result<Self> {
        let n = epsilon.len();
        let nu = (0..n)
            .map(|j| (0..n).map(|l| if j.abs_diff(l) == 1 { nu } else { 0.0 }).collect())
            .collect();
        Self::new(epsilon, nu)
    }

    pub fn n_sites(&self) -> usize {
        self.epsilon.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if n == 0 {
            return Err(Error::InvalidArgument("at least one site is required".into()));
        }
        if self.nu.len() != n || self.nu.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("hopping matrix must be {n}x{n}")));
        }
        if self
            .epsilon
            .iter()
            .chain(self.nu.iter().flatten())
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        for j in 0..n {
            if self.nu[j][j] != 0.0 {
                return Err(Error::InvalidArgument(format!("nu[{}][{}] must be zero", j + 1, j + 1)));
            }
            for l in 0..j {
                if self.nu[j][l] != self.nu[l][j] {
                    return Err(Error::InvalidArgument(format!(
                        "nu is not symmetric at ({}, {})",
                        j + 1,
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pairs `j < l` (1-based) with non-zero hopping, in ascending order.
    pub fn bonds(&self) -> Vec<Bond> {
        let n = self.n_sites();
        let mut out = Vec::new();
        for j in 0..n {
            for l in j + 1..n {
                if self.nu[j][l] != 0.0 {
                    out.push(Bond {
                        j: j + 1,
                        l: l + 1,
                        nu: self.nu[j][l],
                    });
                }
            }
        }
        out
    }

    /// True when some non-adjacent pair has non-zero hopping.
    pub fn has_long_range(&self) -> bool {
        self.bonds().iter().any(|b| b.l - b.j != 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmrParameters {
    /// Larmor terms `ω_l`.
    pub omega: Vec<f64>,
    /// Nearest-neighbour couplings `J_l` between qubits `l` and `l + 1`.
    #[serde(rename = "J")]
    pub j: Vec<f64>,
}

impl NmrParameters {
    pub fn new(omega: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        let p = Self { omega, j };
        p.validate()?;
        Ok(p)
    }

    /// `ω_l = 2ε_l`, `J_l = 2ν_{l,l+1}`. Long-range hopping is ignored here;
    /// callers that need it must check [`FmoParameters::has_long_range`].
    pub fn from_fmo(fmo: &FmoParameters) -> Self {
        let n = fmo.n_sites();
        Self {
            omega: fmo.epsilon.iter().map(|e| 2.0 * e).collect(),
            j: (0..n.saturating_sub(1)).map(|l| 2.0 * fmo.nu[l][l + 1]).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if n == 0 {
            return Err(Error::InvalidArgument("at least one qubit is required".into()));
        }
        if self.j.len() != n - 1 {
            return Err(Error::Dimension(format!(
                "{n} qubits need {} couplings, got {}",
                n - 1,
                self.j.len()
            )));
        }
        if self.omega.iter().chain(&self.j).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(())
    }

    /// Diagonal of `H_NMR`.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n_qubits();
        let z = |b: usize, q: usize| 1.0 - 2.0 * qubit_bit(b, q, n) as f64;
        (0..1usize << n)
            .map(|b| {
                let single: f64 = (1..=n).map(|q| 0.5 * self.omega[q - 1] * z(b, q)).sum();
                let pair: f64 = (1..n).map(|q| self.j[q - 1] * z(b, q) * z(b, q + 1)).sum();
                single + pair
            })
            .collect()
    }
}

fn diagonal_matrix(d: &[f64]) -> CMatrix {
    CMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { r(d[i]) } else { ZERO })
}

pub fn build_fmo_h0(p: &FmoParameters) -> CMatrix {
    let n = p.n_sites();
    let d: Vec<f64> = (0..1usize << n)
        .map(|b| {
            (1..=n)
                .map(|q| p.epsilon[q - 1] * (1.0 - 2.0 * qubit_bit(b, q, n) as f64))
                .sum()
        })
        .collect();
    diagonal_matrix(&d)
}

pub fn build_fmo_hi(p: &FmoParameters) -> CMatrix {
    let n = p.n_sites();
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    for bond in p.bonds() {
        let (mj, ml) = (qubit_mask(bond.j, n), qubit_mask(bond.l, n));
        for b in 0..dim {
            if ((b & mj) == 0) != ((b & ml) == 0) {
                h[(b ^ mj ^ ml, b)] += r(4.0 * bond.nu);
            }
        }
    }
    h
}

pub fn build_fmo_h(p: &FmoParameters) -> CMatrix {
    build_fmo_h0(p) + build_fmo_hi(p)
}

pub fn build_nmr_h(p: &NmrParameters) -> CMatrix {
    diagonal_matrix(&p.diagonal())
}

/// `e^{−iHt}` for the full FMO Hamiltonian.
pub fn exact_unitary(p: &FmoParameters, t: f64) -> Result<CMatrix> {
    matexp_hermitian(&build_fmo_h(p), C64::new(0.0, -t))
}

/// `exp(−i t c (XX + YY))` on two qubits.
pub fn xy_pair_unitary(coupling: f64, t: f64) -> CMatrix {
    let (s, co) = (2.0 * coupling * t).sin_cos();
    let mut u = CMatrix::identity(4, 4);
    u[(1, 1)] = r(co);
    u[(2, 2)] = r(co);
    u[(1, 2)] = C64::new(0.0, -s);
    u[(2, 1)] = C64::new(0.0, -s);
    u
}

/// One factor of a product formula.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// Full-register diagonal unitary.
    Diagonal(Vec<C64>),
    /// Local unitary on the listed qubits.
    Local { matrix: CMatrix, qubits: Vec<usize> },
}

impl Factor {
    pub fn apply_left(&self, n: usize, m: &mut CMatrix) -> Result<()> {
        match self {
            Factor::Diagonal(d) => {
                for j in 0..m.ncols() {
                    for (i, di) in d.iter().enumerate() {
                        m[(i, j)] *= di;
                    }
                }
                Ok(())
            }
            Factor::Local { matrix, qubits } => apply_left(matrix, qubits, n, m),
        }
    }
}

/// Factors of one Trotter step of length `dt`, in the order they act:
/// `e^{−iH0 dt}` first, then one `e^{−i dt 2ν_jl (XX+YY)}` per bond in
/// ascending `(j, l)` order.
pub fn trotter_factors(p: &FmoParameters, dt: f64) -> Vec<Factor> {
    let h0 = build_fmo_h0(p);
    let mut out = vec![Factor::Diagonal(
        (0..h0.nrows())
            .map(|i| C64::new(0.0, -dt * h0[(i, i)].re).exp())
            .collect(),
    )];
    out.extend(p.bonds().into_iter().map(|b| Factor::Local {
        matrix: xy_pair_unitary(2.0 * b.nu, dt),
        qubits: vec![b.j, b.l],
    }));
    out
}

/// Product of the factors of one step as a dense matrix.
pub fn trotter_step(p: &FmoParameters, dt: f64) -> Result<CMatrix> {
    let n = p.n_sites();
    let mut u = CMatrix::identity(1 << n, 1 << n);
    for f in trotter_factors(p, dt) {
        f.apply_left(n, &mut u)?;
    }
    Ok(u)
}

/// First-order Trotter approximation of `e^{−iHt}` with `steps` steps.
pub fn trotter_unitary(p: &FmoParameters, t: f64, steps: usize) -> Result<CMatrix> {
    if steps == 0 {
        return Err(Error::InvalidArgument("Trotter step count must be at least 1".into()));
    }
    let step = trotter_step(p, t / steps as f64)?;
    let dim = step.nrows();
    let mut u = CMatrix::identity(dim, dim);
    for _ in 0..steps {
        u = &step * u;
    }
    Ok(u)
}
