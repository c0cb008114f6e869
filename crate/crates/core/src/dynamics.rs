//! Open-system dynamics of the FMO register.
//!
//! The master equation is `dρ/dt = −i[H, ρ] + L_diss(ρ) + L_deph(ρ)` with, per
//! site `j`,
//!
//! ```text
//! L_diss = Γ_j (−σ^+σ^-ρ − ρσ^+σ^- + 2σ^-ρσ^+),   σ^- = 2|0⟩⟨1|
//! L_deph = γ_j (2nρn − nρ − ρn),                 n = |1⟩⟨1|
//! ```
//!
//! (see [`crate::channels`] for the conventions). [`integrate_exact`] solves
//! it with fixed-step RK4. [`evolve_trotter_open`] is the digital scheme: each
//! step applies the first-order Trotter unitary, then the per-site
//! dissipation channel, then the per-site dephasing channel, all with the
//! exact per-step Kraus operators.

use serde::{Deserialize, Serialize};

use crate::channels::{apply_ops_on, dephasing_kraus_corrected, dissipation_kraus};
use crate::circuit::unitary_of;
use crate::error::{Error, Result};
use crate::hamiltonians::{build_fmo_h, trotter_step, FmoParameters, NmrParameters};
use crate::nmr::{compile_single_z, compile_xy, Lowering as PulseLowering};
use crate::qcore::{qubit_bit, qubit_mask, CMatrix, CVector, DensityMatrix, C64, ONE, ZERO};

/// Per-site dissipation rates `Γ_j` and dephasing rates `γ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParameters {
    pub dissipation: Vec<f64>,
    pub dephasing: Vec<f64>,
}

impl NoiseParameters {
    pub fn zero(n: usize) -> Self {
        Self {
            dissipation: vec![0.0; n],
            dephasing: vec![0.0; n],
        }
    }

    pub fn uniform(n: usize, dissipation: f64, dephasing: f64) -> Self {
        Self {
            dissipation: vec![dissipation; n],
            dephasing: vec![dephasing; n],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.dissipation.len() != n || self.dephasing.len() != n {
            return Err(Error::Dimension(format!(
                "noise rates must have one entry per site ({n})"
            )));
        }
        if self
            .dissipation
            .iter()
            .chain(&self.dephasing)
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return Err(Error::InvalidArgument(
                "noise rates must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Exact { dt: f64 },
    Trotter { dt: f64 },
}

/// Sampled states of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub method: Method,
}

impl Trajectory {
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(site_populations).collect()
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("a trajectory always holds the initial state")
    }
}

/// `p_j = tr(ρ n_j)` for every site.
pub fn site_populations(rho: &DensityMatrix) -> Vec<f64> {
    let n = rho.n_qubits();
    let m = rho.matrix();
    (1..=n)
        .map(|q| {
            (0..m.nrows())
                .filter(|&b| qubit_bit(b, q, n) == 1)
                .map(|b| m[(b, b)].re)
                .sum()
        })
        .collect()
}

/// Excitation lost to the environment, `1 − Σ_j p_j`.
pub fn excitation_loss(populations: &[f64]) -> f64 {
    1.0 - populations.iter().sum::<f64>()
}

/// Initial state from a label:
///
/// * `site:j`: one excitation on site `j`;
/// * `superposition:j,k,…`: equal-amplitude superposition of those
///   single-excitation states;
/// * `ground`: all sites unexcited.
pub fn initial_state(label: &str, n: usize) -> Result<DensityMatrix> {
    let bad = || {
        Error::InvalidArgument(format!(
            "`{label}` is not an initial state (site:j, superposition:j,k, ground)"
        ))
    };
    let sites = |list: &str| -> Result<Vec<usize>> {
        list.split(',')
            .map(|s| {
                let q: usize = s.trim().parse().map_err(|_| bad())?;
                if q == 0 || q > n {
                    return Err(Error::QubitOutOfRange { qubit: q, n });
                }
                Ok(q)
            })
            .collect()
    };
    let dim = 1usize << n;
    match label.split_once(':') {
        None if label == "ground" => Ok(DensityMatrix::basis_state(n, 0)),
        Some(("site", rest)) => match sites(rest)?.as_slice() {
            [q] => Ok(DensityMatrix::basis_state(n, qubit_mask(*q, n))),
            _ => Err(bad()),
        },
        Some(("superposition", rest)) => {
            let list = sites(rest)?;
            let mut psi = CVector::zeros(dim);
            for q in &list {
                psi[qubit_mask(*q, n)] += ONE;
            }
            let norm = psi.norm();
            if norm == 0.0 {
                return Err(bad());
            }
            Ok(DensityMatrix::pure(&(psi / C64::new(norm, 0.0))))
        }
        _ => Err(bad()),
    }
}

/// Right-hand side of the master equation in a form cheap to evaluate
/// repeatedly.
pub struct LindbladGenerator {
    n: usize,
    dim: usize,
    /// Off-diagonal entries `(row, col, H_rc)` of the Hamiltonian.
    hopping: Vec<(usize, usize, C64)>,
    /// Coefficient multiplying `ρ_rc` in `dρ_rc/dt` from the diagonal of `H`
    /// and every non-jump noise term, indexed column-major.
    local: Vec<C64>,
    /// `(mask, 8Γ)` per dissipating site.
    jumps: Vec<(usize, f64)>,
}

impl LindbladGenerator {
    pub fn new(fmo: &FmoParameters, noise: &NoiseParameters) -> Result<Self> {
        fmo.validate()?;
        let n = fmo.n_sites();
        noise.validate(n)?;
        let dim = 1usize << n;
        let h = build_fmo_h(fmo);
        let mut hopping = Vec::new();
        for c in 0..dim {
            for r in 0..dim {
                if r != c && h[(r, c)] != ZERO {
                    hopping.push((r, c, h[(r, c)]));
                }
            }
        }
        let mut local = vec![ZERO; dim * dim];
        for c in 0..dim {
            for r in 0..dim {
                let mut rate = 0.0;
                for q in 1..=n {
                    let (nr, nc) = (qubit_bit(r, q, n) as f64, qubit_bit(c, q, n) as f64);
                    rate -= 4.0 * noise.dissipation[q - 1] * (nr + nc);
                    rate += noise.dephasing[q - 1] * (2.0 * nr * nc - nr - nc);
                }
                local[c * dim + r] = C64::new(rate, -(h[(r, r)].re - h[(c, c)].re));
            }
        }
        let jumps = (1..=n)
            .filter(|&q| noise.dissipation[q - 1] > 0.0)
            .map(|q| (qubit_mask(q, n), 8.0 * noise.dissipation[q - 1]))
            .collect();
        Ok(Self {
            n,
            dim,
            hopping,
            local,
            jumps,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Writes `dρ/dt` into `out`. Both slices are column-major `dim × dim`.
    pub fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let dim = self.dim;
        for (o, (l, x)) in out.iter_mut().zip(self.local.iter().zip(rho)) {
            *o = l * x;
        }
        let minus_i = C64::new(0.0, -1.0);
        for &(r, k, v) in &self.hopping {
            // −i H ρ: row r gains H_rk ρ_k·
            let a = minus_i * v;
            for c in 0..dim {
                out[c * dim + r] += a * rho[c * dim + k];
            }
            // +i ρ H: column k gains ρ_·r H_rk
            let b = -a;
            let (src, dst) = (r * dim, k * dim);
            for row in 0..dim {
                out[dst + row] += b * rho[src + row];
            }
        }
        for &(mask, rate) in &self.jumps {
            for c in (0..dim).filter(|c| c & mask == 0) {
                for r in (0..dim).filter(|r| r & mask == 0) {
                    out[c * dim + r] += rho[(c | mask) * dim + (r | mask)] * rate;
                }
            }
        }
    }

    pub fn rhs(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "state is {}x{}, generator acts on {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        self.apply(rho.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// One classical RK4 step of length `dt`, in place.
    fn rk4_step(&self, rho: &mut [C64], dt: f64, ws: &mut Rk4Workspace) {
        let h = C64::new(dt, 0.0);
        let half = h * 0.5;
        self.apply(rho, &mut ws.k1);
        axpy(&mut ws.tmp, rho, half, &ws.k1);
        self.apply(&ws.tmp, &mut ws.k2);
        axpy(&mut ws.tmp, rho, half, &ws.k2);
        self.apply(&ws.tmp, &mut ws.k3);
        axpy(&mut ws.tmp, rho, h, &ws.k3);
        self.apply(&ws.tmp, &mut ws.k4);
        let sixth = h / 6.0;
        for (i, x) in rho.iter_mut().enumerate() {
            *x += sixth * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
    }
}

struct Rk4Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Workspace {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![ZERO; len],
            k2: vec![ZERO; len],
            k3: vec![ZERO; len],
            k4: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }
}

/// `dst = x + a·y`
fn axpy(dst: &mut [C64], x: &[C64], a: C64, y: &[C64]) {
    for ((d, xi), yi) in dst.iter_mut().zip(x).zip(y) {
        *d = xi + a * yi;
    }
}

/// `dρ/dt` for one state.
pub fn lindblad_rhs(rho: &DensityMatrix, fmo: &FmoParameters, noise: &NoiseParameters) -> Result<CMatrix> {
    LindbladGenerator::new(fmo, noise)?.rhs(rho.matrix())
}

/// Step lengths covering `[0, t_max]`: full steps of `dt` and a shorter last
/// step when `dt` does not divide `t_max`.
fn step_lengths(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time must be non-negative, got {t_max}"
        )));
    }
    let full = (t_max / dt * (1.0 + 1e-12)).floor() as usize;
    let mut steps = vec![dt; full];
    let rest = t_max - full as f64 * dt;
    if rest > 1e-12 * t_max.max(1.0) {
        steps.push(rest);
    }
    Ok(steps)
}

/// Time after step `i`, computed from the step index so that sample times
/// do not drift with accumulated rounding.
fn sample_time(i: usize, steps: &[f64], t_max: f64) -> f64 {
    if i + 1 == steps.len() {
        t_max
    } else {
        (i + 1) as f64 * steps[0]
    }
}

fn check_state(rho0: &DensityMatrix, n: usize) -> Result<()> {
    if rho0.dim() != 1usize << n {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, expected {}",
            rho0.dim(),
            1usize << n
        )));
    }
    Ok(())
}

/// RK4 integration recording every step.
pub fn integrate_exact(
    rho0: &DensityMatrix,
    fmo: &FmoParameters,
    noise: &NoiseParameters,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_exact_every(rho0, fmo, noise, t_max, dt, 1)
}

/// RK4 integration recording the initial state, every `record_every`-th
/// step and the final state.
pub fn integrate_exact_every(
    rho0: &DensityMatrix,
    fmo: &FmoParameters,
    noise: &NoiseParameters,
    t_max: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let generator = LindbladGenerator::new(fmo, noise)?;
    check_state(rho0, generator.n)?;
    let steps = step_lengths(t_max, dt)?;
    let record_every = record_every.max(1);
    let mut rho = rho0.matrix().clone();
    let mut ws = Rk4Workspace::new(rho.len());
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        method: Method::Exact { dt },
    };
    for (i, h) in steps.iter().enumerate() {
        generator.rk4_step(rho.as_mut_slice(), *h, &mut ws);
        let t = sample_time(i, &steps, t_max);
        if (i + 1) % record_every == 0 || i + 1 == steps.len() {
            traj.times.push(t);
            traj.states.push(DensityMatrix::new_unchecked(rho.clone()));
        }
    }
    Ok(traj)
}

/// How the unitary part of a Trotter step is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Lowering {
    /// Diagonal `e^{−iH0 dt}` and exact two-qubit XY blocks.
    #[default]
    DenseBlocks,
    /// Pulse schedules compiled for the NMR register (`ω_l = 2ε_l`,
    /// `J_l = 2ν_{l,l+1}`): one single-`z` schedule per site, then one XY
    /// schedule per bond. Only nearest-neighbour hopping is allowed.
    CompiledPulses,
}

/// Unitary of one step of length `dt` under `lowering`.
pub fn step_unitary(fmo: &FmoParameters, dt: f64, lowering: Lowering) -> Result<CMatrix> {
    match lowering {
        Lowering::DenseBlocks => trotter_step(fmo, dt),
        Lowering::CompiledPulses => {
            if fmo.has_long_range() {
                return Err(Error::InvalidArgument(
                    "compiled pulses only realise nearest-neighbour hopping".into(),
                ));
            }
            let nmr = NmrParameters::from_fmo(fmo);
            let n = fmo.n_sites();
            let mut schedules = Vec::new();
            for q in 1..=n {
                schedules.push(compile_single_z(q, dt, &nmr)?);
            }
            for bond in fmo.bonds() {
                schedules.push(compile_xy((bond.j, bond.l), dt, &nmr)?);
            }
            let mut u = CMatrix::identity(1 << n, 1 << n);
            for s in schedules {
                u = unitary_of(&s.to_program(&nmr, PulseLowering::Opaque)?)? * u;
            }
            Ok(u)
        }
    }
}

/// Trotter + Kraus evolution recording every step.
pub fn evolve_trotter_open(
    rho0: &DensityMatrix,
    fmo: &FmoParameters,
    noise: &NoiseParameters,
    t_max: f64,
    dt: f64,
    lowering: Lowering,
) -> Result<Trajectory> {
    fmo.validate()?;
    let n = fmo.n_sites();
    noise.validate(n)?;
    check_state(rho0, n)?;
    let steps = step_lengths(t_max, dt)?;
    let mut cache: Vec<(f64, CMatrix, Vec<Vec<CMatrix>>)> = Vec::new();
    let mut rho = rho0.matrix().clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        method: Method::Trotter { dt },
    };
    for (i, &h) in steps.iter().enumerate() {
        if !cache.iter().any(|(len, ..)| *len == h) {
            let u = step_unitary(fmo, h, lowering)?;
            let mut channels = Vec::new();
            for q in 0..n {
                channels.push(dissipation_kraus(noise.dissipation[q], h)?.ops().to_vec());
                channels.push(dephasing_kraus_corrected(noise.dephasing[q], h)?.ops().to_vec());
            }
            cache.push((h, u, channels));
        }
        let (_, u, channels) = cache.iter().find(|(len, ..)| *len == h).expect("cached above");
        rho = u * rho * u.adjoint();
        // Dissipation on every site, then dephasing on every site; the
        // single-site channels on different sites commute.
        for kind in 0..2 {
            for q in 0..n {
                if (kind == 0 && noise.dissipation[q] > 0.0) || (kind == 1 && noise.dephasing[q] > 0.0) {
                    rho = apply_ops_on(&rho, &channels[2 * q + kind], q + 1, n)?;
                }
            }
        }
        traj.times.push(sample_time(i, &steps, t_max));
        traj.states.push(DensityMatrix::new_unchecked(rho.clone()));
    }
    Ok(traj)
}
