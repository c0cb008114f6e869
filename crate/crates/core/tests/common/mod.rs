//! Helpers shared by the integration tests: seeded randomness and
//! independent reference computations.

#![allow(dead_code)]

use fmosim::hamiltonians::FmoParameters;
use fmosim::qcore::{BlochVector, CMatrix, DensityMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn m2(entries: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

pub fn sx() -> CMatrix {
    m2([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sy() -> CMatrix {
    m2([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sz() -> CMatrix {
    m2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Density matrix `G G† / tr(G G†)` from a complex Gaussian-like matrix.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(rho / tr).expect("positive by construction")
}

/// Uniform point in the Bloch ball.
pub fn random_bloch(rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

/// Random nearest-neighbour chain.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> FmoParameters {
    let eps = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut nu = vec![vec![0.0; n]; n];
    for j in 0..n - 1 {
        let v = rng.random_range(-0.3..0.3);
        nu[j][j + 1] = v;
        nu[j + 1][j] = v;
    }
    FmoParameters::new(eps, nu).unwrap()
}

/// Fixed-step RK4 for `dρ/dt = f(ρ)`.
pub fn rk4(f: impl Fn(&CMatrix) -> CMatrix, rho: &CMatrix, t: f64, steps: usize) -> CMatrix {
    let h = c(t / steps as f64, 0.0);
    let mut x = rho.clone();
    for _ in 0..steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (h * 0.5)));
        let k3 = f(&(&x + &k2 * (h * 0.5)));
        let k4 = f(&(&x + &k3 * h));
        x += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * (h / 6.0);
    }
    x
}

/// Single-qubit dissipator `Γ(−σ^+σ^-ρ − ρσ^+σ^- + 2σ^-ρσ^+)` with
/// `σ^± = σ^x ∓ iσ^y`... written out from the Pauli matrices: `σ^- = σ^x + iσ^y`.
pub fn dissipator(gamma: f64) -> impl Fn(&CMatrix) -> CMatrix {
    let lower = sx() + sy() * c(0.0, 1.0);
    let raise = lower.adjoint();
    move |rho: &CMatrix| {
        let n = &raise * &lower;
        (-(&n * rho) - rho * &n + &lower * rho * &raise * c(2.0, 0.0)) * c(gamma, 0.0)
    }
}

/// Single-qubit dephasing `γ(2nρn − nρ − ρn)` with `n = (I − σ^z)/2`.
pub fn dephaser(gamma: f64) -> impl Fn(&CMatrix) -> CMatrix {
    let n = (CMatrix::identity(2, 2) - sz()) * c(0.5, 0.0);
    move |rho: &CMatrix| (&n * rho * &n * c(2.0, 0.0) - &n * rho - rho * &n) * c(gamma, 0.0)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
