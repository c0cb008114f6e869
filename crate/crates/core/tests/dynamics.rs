mod common;

use common::{c, random_chain, rk4, rng, sx, sy};
use fmosim::dynamics::{
    evolve_trotter_open, excitation_loss, initial_state, integrate_exact, integrate_exact_every, lindblad_rhs,
    site_populations, step_unitary, Lowering, NoiseParameters,
};
use fmosim::hamiltonians::{build_fmo_h, build_fmo_hi, exact_unitary, trotter_unitary, FmoParameters};
use fmosim::qcore::{embed, max_abs, operator_norm, trace_distance, CMatrix, DensityMatrix};
use proptest::prelude::*;

/// Master equation assembled from full-register operators.
fn dense_generator(fmo: &FmoParameters, noise: &NoiseParameters) -> impl Fn(&CMatrix) -> CMatrix {
    let n = fmo.n_sites();
    let h = build_fmo_h(fmo);
    let lower = sx() + sy() * c(0.0, 1.0);
    let number = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let lowers: Vec<CMatrix> = (1..=n).map(|q| embed(&lower, &[q], n).unwrap()).collect();
    let numbers: Vec<CMatrix> = (1..=n).map(|q| embed(&number, &[q], n).unwrap()).collect();
    let noise = noise.clone();
    move |rho: &CMatrix| {
        let mut out = (&h * rho - rho * &h) * c(0.0, -1.0);
        for q in 0..n {
            let (l, nq) = (&lowers[q], &numbers[q]);
            let ld = l.adjoint();
            let pp = &ld * l;
            out += (-(&pp * rho) - rho * &pp + l * rho * &ld * c(2.0, 0.0)) * c(noise.dissipation[q], 0.0);
            out += (nq * rho * nq * c(2.0, 0.0) - nq * rho - rho * nq) * c(noise.dephasing[q], 0.0);
        }
        out
    }
}

#[test]
fn hopping_matrix_element() {
    let fmo = FmoParameters::chain(vec![0.0; 2], 0.3).unwrap();
    let hi = build_fmo_hi(&fmo);
    // ⟨01|H_I|10⟩ with both ordered pairs counted.
    assert!((hi[(1, 2)] - c(4.0 * 0.3, 0.0)).norm() < 1e-15);
}

#[test]
fn generator_matches_dense_assembly() {
    let mut g = rng(4);
    let fmo = random_chain(&mut g, 4);
    let noise = NoiseParameters {
        dissipation: vec![0.1, 0.0, 0.3, 0.05],
        dephasing: vec![0.2, 0.4, 0.0, 0.1],
    };
    let rho = common::random_density(&mut g, 4);
    let want = dense_generator(&fmo, &noise)(rho.matrix());
    assert!(max_abs(&(lindblad_rhs(&rho, &fmo, &noise).unwrap() - want)) < 1e-12);
}

#[test]
fn exact_integrator_matches_dense_rk4() {
    let mut g = rng(5);
    let fmo = random_chain(&mut g, 3);
    let noise = NoiseParameters::uniform(3, 0.1, 0.2);
    let rho0 = initial_state("superposition:1,3", 3).unwrap();
    let traj = integrate_exact(&rho0, &fmo, &noise, 0.5, 1e-3).unwrap();
    let want = rk4(dense_generator(&fmo, &noise), rho0.matrix(), 0.5, 2000);
    assert!(max_abs(&(traj.last().matrix() - want)) < 1e-10);
}

#[test]
fn trotter_error_is_first_order() {
    let fmo = random_chain(&mut rng(6), 5);
    let err = |t: f64| operator_norm(&(trotter_unitary(&fmo, t, 1).unwrap() - exact_unitary(&fmo, t).unwrap()));
    let ratio = err(0.1) / err(0.05);
    assert!((ratio - 4.0).abs() < 0.2, "single-step error ratio {ratio}");
    assert!(trotter_unitary(&fmo, 1.0, 0).is_err());
}

#[test]
fn noise_free_trotter_is_unitary_and_converges() {
    let fmo = random_chain(&mut rng(7), 4);
    let noise = NoiseParameters::zero(4);
    let rho0 = initial_state("site:2", 4).unwrap();
    let exact = DensityMatrix::new_unchecked({
        let u = exact_unitary(&fmo, 1.0).unwrap();
        &u * rho0.matrix() * u.adjoint()
    });
    let mut last = f64::INFINITY;
    for dt in [0.1, 0.05, 0.025] {
        let traj = evolve_trotter_open(&rho0, &fmo, &noise, 1.0, dt, Lowering::DenseBlocks).unwrap();
        for s in &traj.states {
            assert!((s.purity() - 1.0).abs() < 1e-10);
            assert!((site_populations(s).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let e = trace_distance(traj.last(), &exact).unwrap();
        assert!(e < last);
        last = e;
    }
}

#[test]
fn partial_final_step_reaches_t_max() {
    let fmo = random_chain(&mut rng(8), 3);
    let noise = NoiseParameters::uniform(3, 0.1, 0.1);
    let rho0 = initial_state("site:1", 3).unwrap();
    let traj = evolve_trotter_open(&rho0, &fmo, &noise, 0.25, 0.1, Lowering::DenseBlocks).unwrap();
    assert_eq!(traj.times.len(), 4);
    assert!((traj.times[3] - 0.25).abs() < 1e-15);
    let exact = integrate_exact_every(&rho0, &fmo, &noise, 0.25, 0.001, 100).unwrap();
    assert!((exact.times.last().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn compiled_pulses_match_dense_blocks() {
    let fmo = random_chain(&mut rng(9), 4);
    for dt in [0.05, 0.2] {
        let a = step_unitary(&fmo, dt, Lowering::DenseBlocks).unwrap();
        let b = step_unitary(&fmo, dt, Lowering::CompiledPulses).unwrap();
        let aligned = fmosim::qcore::phase_align(&a, &b);
        assert!(operator_norm(&(aligned - &a)) < 1e-8);
    }
    let mut long = fmo.clone();
    long.nu[0][3] = 0.1;
    long.nu[3][0] = 0.1;
    assert!(step_unitary(&long, 0.1, Lowering::CompiledPulses).is_err());
}

#[test]
fn initial_state_labels() {
    assert_eq!(
        site_populations(&initial_state("site:3", 4).unwrap()),
        vec![0.0, 0.0, 1.0, 0.0]
    );
    let sup = site_populations(&initial_state("superposition:1,2", 3).unwrap());
    assert!((sup[0] - 0.5).abs() < 1e-15 && (sup[1] - 0.5).abs() < 1e-15);
    assert_eq!(
        excitation_loss(&site_populations(&initial_state("ground", 2).unwrap())),
        1.0
    );
    for bad in ["site:0", "site:5", "site:1,2", "bogus", "superposition:"] {
        assert!(initial_state(bad, 4).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn open_trotter_keeps_states_physical(seed in any::<u64>(), diss in 0.0f64..0.5, deph in 0.0f64..0.5) {
        let mut g = rng(seed);
        let fmo = random_chain(&mut g, 4);
        let noise = NoiseParameters::uniform(4, diss, deph);
        let rho0 = initial_state("site:1", 4).unwrap();
        let traj = evolve_trotter_open(&rho0, &fmo, &noise, 1.0, 0.1, Lowering::DenseBlocks).unwrap();
        let mut loss = 0.0;
        for s in &traj.states {
            prop_assert!((s.trace() - 1.0).abs() < 1e-10);
            prop_assert!(s.min_eigenvalue().unwrap() > -1e-10);
            let l = excitation_loss(&site_populations(s));
            prop_assert!(l >= loss - 1e-12);
            loss = l;
        }
    }

    #[test]
    fn exact_dynamics_keeps_states_physical(seed in any::<u64>(), diss in 0.0f64..0.5, deph in 0.0f64..0.5) {
        let mut g = rng(seed);
        let fmo = random_chain(&mut g, 3);
        let noise = NoiseParameters::uniform(3, diss, deph);
        let rho0 = initial_state("site:2", 3).unwrap();
        let traj = integrate_exact_every(&rho0, &fmo, &noise, 1.0, 1e-3, 50).unwrap();
        let mut loss = 0.0;
        for s in &traj.states {
            prop_assert!((s.trace() - 1.0).abs() < 1e-8);
            prop_assert!(s.min_eigenvalue().unwrap() > -1e-8);
            let l = excitation_loss(&site_populations(s));
            prop_assert!(l >= loss - 1e-10);
            loss = l;
        }
    }
}
