use std::f64::consts::{FRAC_PI_2, PI, TAU};

use freehom_core::dipfinder::canonical_dip;
use freehom_core::geometry::{
    angles_from_phases, build_transfer_matrix, phases_from_geometry, Geometry, NormConvention,
    PhaseConfig,
};
use freehom_core::Error;
use proptest::prelude::*;

#[test]
fn canonical_three_photon_geometry_round_trips() {
    let kd = 8.0 * PI;
    let phases = canonical_dip(3).unwrap();
    let geom = angles_from_phases(&phases, kd, 1.0).unwrap();
    let back = phases_from_geometry(&geom).unwrap();
    for (a, b) in back.deltas().iter().zip([TAU / 3.0, 2.0 * TAU, 3.0 * TAU]) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!(back.is_physical());
}

#[test]
fn phases_need_enough_baseline() {
    let phases = canonical_dip(3).unwrap();
    match angles_from_phases(&phases, 1.0, 5.0) {
        Err(Error::Infeasible { min_kd }) => assert!((min_kd - 3.0 * TAU).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn geometry_validation() {
    assert!(Geometry::new(2, 1.0, 1.0, vec![0.0, FRAC_PI_2]).is_ok());
    assert!(Geometry::new(2, 1.0, 1.0, vec![0.0, 2.0]).is_err());
    assert!(Geometry::new(2, 0.0, 1.0, vec![0.0, 0.5]).is_err());
    assert!(Geometry::new(2, 1.0, -1.0, vec![0.0, 0.5]).is_err());
    assert!(Geometry::new(3, 1.0, 1.0, vec![0.0, 0.5]).is_err());
    assert!(Geometry::new(2, 1.0, 1.0, vec![0.1, 0.1]).is_err());
    assert!(Geometry::new(2, 1.0, 1.0, vec![0.0, f64::NAN]).is_err());
    assert!(PhaseConfig::new(vec![1.0]).is_err());
}

#[test]
fn matrix_rows_carry_integer_multiples() {
    let t = build_transfer_matrix(
        &PhaseConfig::new(vec![0.3, -1.2, 2.5]).unwrap(),
        NormConvention::Custom(0.5),
    )
    .unwrap();
    for row in 0..3 {
        for (col, d) in [0.3, -1.2, 2.5].iter().enumerate() {
            let z = t.matrix().get(row, col);
            assert!((z.norm() - 0.5).abs() <= 1e-15);
            let expect = -((row + 1) as f64) * d;
            let diff = (z.arg() - expect).rem_euclid(TAU);
            assert!(diff.min(TAU - diff) <= 1e-14);
        }
    }
}

proptest! {
    #[test]
    fn angles_round_trip(n in 2usize..8, kd in 1.0f64..100.0, seeds in prop::collection::vec(-1.0f64..1.0, 8)) {
        // Spread the angles so they stay distinct.
        let angles: Vec<f64> = (0..n).map(|m| -1.4 + 2.8 * (m as f64 + 0.5 + 0.4 * seeds[m]) / n as f64).collect();
        let geom = Geometry::new(n, 1.0, kd, angles.clone()).unwrap();
        let back = angles_from_phases(&phases_from_geometry(&geom).unwrap(), kd, 1.0).unwrap();
        for (a, b) in back.detector_angles().iter().zip(&angles) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn full_turns_leave_the_matrix_alone(deltas in prop::collection::vec(-10.0f64..10.0, 2..7), turns in -4i32..=4) {
        let a = build_transfer_matrix(&PhaseConfig::new(deltas.clone()).unwrap(), NormConvention::Unit).unwrap();
        let shifted: Vec<f64> = deltas.iter().map(|d| d + turns as f64 * TAU).collect();
        let b = build_transfer_matrix(&PhaseConfig::new(shifted).unwrap(), NormConvention::Unit).unwrap();
        for (x, y) in a.matrix().as_slice().iter().zip(b.matrix().as_slice()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }
}
