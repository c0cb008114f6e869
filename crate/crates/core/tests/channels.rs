mod common;

use common::{dephaser, dissipator, random_bloch, random_density, rk4, rng};
use fmosim::channels::{
    apply_kraus, apply_kraus_with, channel_circuit, damping_basis, damping_basis_solution, dephasing_kraus_corrected,
    dephasing_kraus_paper, dissipation_kraus, image_bloch, kraus_from_angles, AffineChannel, ChannelReport, CptpStatus,
    KrausChannel,
};
use fmosim::circuit::{run_density, RunOptions};
use fmosim::qcore::{max_abs, BlochVector, DensityMatrix};
use fmosim::Error;
use proptest::prelude::*;

fn through_circuit(ch: &KrausChannel, rho: &DensityMatrix) -> DensityMatrix {
    let p = channel_circuit(ch).unwrap();
    run_density(
        &p,
        &rho.tensor(&DensityMatrix::basis_state(1, 0)),
        RunOptions::default(),
    )
    .unwrap()
}

#[test]
fn dissipation_matches_master_equation() {
    let mut g = rng(1);
    let (gamma, t) = (1.0, 0.2);
    let ch = dissipation_kraus(gamma, t).unwrap();
    for _ in 0..20 {
        let rho = random_bloch(&mut g).to_density();
        let want = rk4(dissipator(gamma), rho.matrix(), t, 4000);
        assert!(max_abs(&(apply_kraus(&rho, &ch).unwrap().matrix() - want)) < 1e-8);
    }
}

#[test]
fn corrected_dephasing_matches_master_equation() {
    let mut g = rng(2);
    let (gamma, t) = (0.5, 0.3);
    let ch = dephasing_kraus_corrected(gamma, t).unwrap();
    for _ in 0..20 {
        let rho = random_bloch(&mut g).to_density();
        let want = rk4(dephaser(gamma), rho.matrix(), t, 4000);
        assert!(max_abs(&(apply_kraus(&rho, &ch).unwrap().matrix() - want)) < 1e-8);
    }
}

#[test]
fn damping_basis_is_an_eigenbasis() {
    let gamma = 0.7;
    let gen = dissipator(gamma);
    for mode in damping_basis(gamma) {
        let lhs = gen(&mode.right);
        assert!(max_abs(&(lhs - &mode.right * fmosim::qcore::c(mode.eigenvalue, 0.0))) < 1e-12);
    }
}

#[test]
fn bloch_images_of_reference_states() {
    let (gamma, t) = (0.05, 2.0);
    let ch = dissipation_kraus(gamma, t).unwrap();
    // The excited state relaxes towards |0⟩ (r_z = +1).
    let excited = image_bloch(&ch, &BlochVector::new(0.0, 0.0, -1.0)).unwrap();
    assert!((excited.z() - (1.0 - 2.0 * (-0.8f64).exp())).abs() < 1e-12);
    let mixed = image_bloch(&ch, &BlochVector::new(0.0, 0.0, 0.0)).unwrap();
    assert!((mixed.z() - (1.0 - (-0.8f64).exp())).abs() < 1e-12);
    let ground = image_bloch(&ch, &BlochVector::new(0.0, 0.0, 1.0)).unwrap();
    assert!((ground.z() - 1.0).abs() < 1e-12);
    let tilted = image_bloch(&ch, &BlochVector::new(0.6, -0.8, 0.0)).unwrap();
    assert!((tilted.x() - 0.6 * (-0.4f64).exp()).abs() < 1e-12);
}

#[test]
fn printed_dephasing_pair_is_flagged() {
    for gt in [0.0, 0.1, 0.5, 1.0, 5.0] {
        let ch = dephasing_kraus_paper(1.0, gt).unwrap();
        let e = (-2.0 * gt).exp();
        match ch.cptp() {
            CptpStatus::Violated { deficit } => assert!((deficit - (0.5 * e + 0.25 * e * e)).abs() < 1e-12),
            other => panic!("expected a violation, got {other:?}"),
        }
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(matches!(apply_kraus(&rho, &ch), Err(Error::NotCptp { .. })));
        let forced = apply_kraus_with(&rho, &ch, true).unwrap();
        assert!(!forced.trace_preserved || gt > 3.0);
    }
    assert!(channel_circuit(&dephasing_kraus_paper(1.0, 0.1).unwrap()).is_err());
}

#[test]
fn negative_rates_and_times_are_rejected() {
    assert!(dissipation_kraus(-0.1, 1.0).is_err());
    assert!(dephasing_kraus_corrected(0.1, -1.0).is_err());
    assert!(dephasing_kraus_paper(-1.0, 1.0).is_err());
}

#[test]
fn report_serialises_provenance() {
    let rep = ChannelReport::new(&dissipation_kraus(0.1, 0.5).unwrap());
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["provenance"]["kind"], "dissipation");
    assert_eq!(v["cptp_status"], "verified");
    assert_eq!(v["kraus"].as_array().unwrap().len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dissipation_semigroup(gamma in 0.0f64..2.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, seed in any::<u64>()) {
        let rho = random_bloch(&mut rng(seed)).to_density();
        let a = apply_kraus(&apply_kraus(&rho, &dissipation_kraus(gamma, t1).unwrap()).unwrap(),
            &dissipation_kraus(gamma, t2).unwrap()).unwrap();
        let b = apply_kraus(&rho, &dissipation_kraus(gamma, t1 + t2).unwrap()).unwrap();
        prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn dephasing_semigroup(gamma in 0.0f64..2.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, seed in any::<u64>()) {
        let rho = random_bloch(&mut rng(seed)).to_density();
        let a = apply_kraus(&apply_kraus(&rho, &dephasing_kraus_corrected(gamma, t1).unwrap()).unwrap(),
            &dephasing_kraus_corrected(gamma, t2).unwrap()).unwrap();
        let b = apply_kraus(&rho, &dephasing_kraus_corrected(gamma, t1 + t2).unwrap()).unwrap();
        prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn damping_basis_agrees_with_kraus(gamma in 0.0f64..2.0, t in 0.0f64..2.0, seed in any::<u64>()) {
        let rho = random_bloch(&mut rng(seed)).to_density();
        let a = damping_basis_solution(gamma, &rho, t).unwrap();
        let b = apply_kraus(&rho, &dissipation_kraus(gamma, t).unwrap()).unwrap();
        prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10);
    }

    #[test]
    fn angle_channels_are_cptp_with_expected_bloch_map(u in -3.2f64..3.2, m in -3.2f64..3.2, seed in any::<u64>()) {
        let ch = kraus_from_angles(u, m);
        prop_assert_eq!(ch.cptp(), CptpStatus::Verified);
        prop_assert!(ch.deficit() < 1e-14);
        let aff = AffineChannel::from_angles(u, m);
        let diag = aff.diagonal();
        prop_assert!((diag[0] - u.cos()).abs() < 1e-12);
        prop_assert!((diag[1] - m.cos()).abs() < 1e-12);
        prop_assert!((diag[2] - u.cos() * m.cos()).abs() < 1e-12);
        prop_assert!((aff.shift[2] - u.sin() * m.sin()).abs() < 1e-12);
        prop_assert!(aff.maps_ball_into_ball(200));
        let v = random_bloch(&mut rng(seed));
        let direct = image_bloch(&ch, &v).unwrap();
        let mapped = aff.apply(&v);
        for k in 0..3 {
            prop_assert!((direct.0[k] - mapped.0[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn circuits_realise_their_channels(u in -3.0f64..3.0, m in -3.0f64..3.0, rate in 0.0f64..2.0, seed in any::<u64>()) {
        let rho = random_density(&mut rng(seed), 1);
        for ch in [kraus_from_angles(u, m), dissipation_kraus(rate, 0.4).unwrap(), dephasing_kraus_corrected(rate, 0.4).unwrap()] {
            let via_circuit = through_circuit(&ch, &rho);
            let direct = apply_kraus(&rho, &ch).unwrap();
            prop_assert!(max_abs(&(via_circuit.matrix() - direct.matrix())) < 1e-10);
        }
    }
}
