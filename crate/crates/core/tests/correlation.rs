use std::f64::consts::{PI, TAU};

use freehom_core::correlation::{
    beam_splitter_output, coincidence_amplitude_check, full_state_expansion, g2_closed_form,
    gn_permanent,
};
use freehom_core::geometry::{build_transfer_matrix, NormConvention, PhaseConfig};
use freehom_core::permanent::{Algorithm, ComplexMatrix};
use freehom_core::{factorial, Complex64};
use proptest::prelude::*;

fn g(deltas: &[f64]) -> f64 {
    gn_permanent(
        &PhaseConfig::new(deltas.to_vec()).unwrap(),
        NormConvention::Unit,
        Algorithm::Ryser,
    )
    .unwrap()
    .g_value
}

/// Two-photon amplitude written out by hand: both ways to place the photons.
fn g2_by_hand(a: f64, b: f64) -> f64 {
    let c = |n: f64, d: f64| Complex64::from_polar(1.0, -n * d);
    (c(1.0, a) * c(2.0, b) + c(1.0, b) * c(2.0, a)).norm_sqr()
}

#[test]
fn closed_form_agrees_with_permanent_on_dense_grid() {
    let r = 101;
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let a = -TAU + 2.0 * TAU * i as f64 / (r - 1) as f64;
            let b = -TAU + 2.0 * TAU * j as f64 / (r - 1) as f64;
            let closed = g2_closed_form(a, b).g_value;
            worst = worst.max((closed - g(&[a, b])).abs());
            worst = worst.max((closed - g2_by_hand(a, b)).abs());
        }
    }
    assert!(worst <= 1e-12, "worst {worst:e}");
}

#[test]
fn two_photon_dip_and_peaks() {
    assert!(g2_closed_form(0.0, PI).g_value.abs() <= 1e-12);
    assert!(g(&[0.0, PI]).abs() <= 1e-12);
    for j in -2..=2 {
        for offset in [0.0, 0.4, -1.3] {
            let odd = (2 * j + 1) as f64 * PI;
            let even = (2 * j) as f64 * PI;
            assert!(g(&[offset + odd, offset]) <= 1e-12, "j={j}");
            assert!(g2_closed_form(offset + odd, offset).g_value <= 1e-12);
            if even != 0.0 {
                assert!((g(&[offset + even, offset]) - 4.0).abs() <= 1e-12);
            }
            assert!((g2_closed_form(offset + even, offset).g_value - 4.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn beam_splitter_baseline() {
    let d = beam_splitter_output(&[1, 1]).unwrap();
    assert!((d.weight(&[2, 0]) - 0.5).abs() <= 1e-12);
    assert!((d.weight(&[0, 2]) - 0.5).abs() <= 1e-12);
    assert!(d.weight(&[1, 1]).abs() <= 1e-12);
    assert!((d.total_weight - 1.0).abs() <= 1e-12);
    assert!(beam_splitter_output(&[2, 0]).is_err());
}

#[test]
fn two_photon_expansion_by_hand() {
    // With c = e^{-i n Δ_m}/√2: P(2,0) = P(0,2) = 2·(1/2)² and P(1,1) = G/4.
    for (a, b) in [(0.0, PI), (0.3, 1.1), (2.0, -0.7)] {
        let t = build_transfer_matrix(
            &PhaseConfig::new(vec![a, b]).unwrap(),
            NormConvention::SqrtModes,
        )
        .unwrap();
        let d = full_state_expansion(t.matrix()).unwrap();
        assert!((d.weight(&[2, 0]) - 0.5).abs() <= 1e-12);
        assert!((d.weight(&[0, 2]) - 0.5).abs() <= 1e-12);
        assert!((d.weight(&[1, 1]) - g2_by_hand(a, b) / 4.0).abs() <= 1e-12);
    }
}

#[test]
fn dft_is_unitary_and_conserves_weight() {
    for n in 2..=4 {
        let s = 1.0 / (n as f64).sqrt();
        let f = ComplexMatrix::from_fn(n, |r, c| {
            Complex64::from_polar(s, TAU * (r * c) as f64 / n as f64)
        })
        .unwrap();
        assert!(f.unitarity_defect() <= 1e-12);
        let d = full_state_expansion(&f).unwrap();
        assert!((d.total_weight - 1.0).abs() <= 1e-10);
    }
    // Symmetric tritter: one photon per output port with probability 1/3.
    let s = 1.0 / 3f64.sqrt();
    let f = ComplexMatrix::from_fn(3, |r, c| {
        Complex64::from_polar(s, TAU * (r * c) as f64 / 3.0)
    })
    .unwrap();
    let d = full_state_expansion(&f).unwrap();
    assert!((d.weight(&[1, 1, 1]) - 1.0 / 3.0).abs() <= 1e-12);
}

#[test]
fn coincidence_amplitude_is_the_permanent() {
    for n in 2..=5 {
        let phases: Vec<f64> = (0..n).map(|m| 0.37 + 1.91 * m as f64).collect();
        let t = build_transfer_matrix(&PhaseConfig::new(phases).unwrap(), NormConvention::Unit)
            .unwrap();
        let r = coincidence_amplitude_check(t.matrix(), Algorithm::Glynn).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn expansion_limit() {
    assert!(full_state_expansion(&ComplexMatrix::ones(7).unwrap()).is_err());
}

#[test]
fn all_equal_phases_give_maximum() {
    for n in 2..=8 {
        let expect = factorial(n).powi(2);
        assert!((g(&vec![0.0; n]) - expect).abs() <= 1e-10 * expect);
    }
    // sqrt_modes scales the amplitude by (1/√N)^N.
    let r = gn_permanent(
        &PhaseConfig::new(vec![0.0; 4]).unwrap(),
        NormConvention::SqrtModes,
        Algorithm::Ryser,
    )
    .unwrap();
    assert!((r.g_value - 576.0 / 256.0).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phase_order_does_not_matter(deltas in prop::collection::vec(-10.0f64..10.0, 2..=7), seed in any::<u64>()) {
        let base = g(&deltas);
        let mut shuffled = deltas.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert!((g(&shuffled) - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn two_pi_shift_and_negation(deltas in prop::collection::vec(-10.0f64..10.0, 2..=7), which in 0usize..7, turns in -3i32..=3) {
        let base = g(&deltas);
        let mut shifted = deltas.clone();
        let k = which % deltas.len();
        shifted[k] += turns as f64 * TAU;
        prop_assert!((g(&shifted) - base).abs() <= 1e-12 * base.max(1.0));
        let negated: Vec<f64> = deltas.iter().map(|d| -d).collect();
        prop_assert!((g(&negated) - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn bounded_by_the_bright_fringe(deltas in prop::collection::vec(-10.0f64..10.0, 2..=7), c in 0.1f64..2.0) {
        let n = deltas.len();
        let r = gn_permanent(&PhaseConfig::new(deltas).unwrap(), NormConvention::Custom(c), Algorithm::Glynn).unwrap();
        let bound = (factorial(n) * c.powi(n as i32)).powi(2);
        prop_assert!(r.g_value <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn two_photon_zero_set_is_the_odd_pi_lines(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let diff = a - b;
        let dist = ((diff / PI - 1.0) / 2.0).round() * 2.0 * PI + PI - diff;
        // G = 4 cos²((a-b)/2) = 4 sin²(dist/2) near the zero lines.
        prop_assert!((g(&[a, b]) - 4.0 * (dist / 2.0).sin().powi(2)).abs() <= 1e-12);
    }
}
