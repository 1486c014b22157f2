mod common;

use common::*;
use proptest::prelude::*;
use subpressure::pressure::averaged_log_partition;
use subpressure::{estimate_pressure, Ext, Potential};

const TOL: f64 = 1e-9;

fn finite(v: Ext) -> f64 {
    v.as_finite().unwrap_or(f64::NEG_INFINITY)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_partition_is_subadditive((sys, pot) in arb_system_and_potential()) {
        let est = estimate_pressure(&sys, &pot, None, &[1, 2, 3, 4, 5, 6]).unwrap();
        prop_assert!(est.fekete_margin() >= -TOL, "margin {}", est.fekete_margin());
    }

    #[test]
    fn divisor_schedule_reports_the_envelope((sys, pot) in arb_system_and_potential()) {
        let est = estimate_pressure(&sys, &pot, None, &[1, 2, 3, 6]).unwrap();
        if est.reported.is_finite() {
            prop_assert!(finite(est.reported) <= finite(est.upper_envelope) + TOL);
        } else {
            prop_assert!(est.log_partition.iter().any(|a| a.is_neg_inf()));
        }
    }

    #[test]
    fn deeper_separation_only_adds_boundary((sys, pot) in arb_system_and_potential()) {
        // One more symbol of depth multiplies each cylinder by at most a successors.
        let t0 = pot.locality_deficit(4);
        let a = averaged_log_partition(&sys, &pot, 4, t0).unwrap();
        let b = averaged_log_partition(&sys, &pot, 4, t0 + 1).unwrap();
        if let (Some(a), Some(b)) = (a.as_finite(), b.as_finite()) {
            prop_assert!(b >= a - TOL);
            prop_assert!(b <= a + (sys.alphabet() as f64).ln() + TOL);
        }
    }
}

#[test]
fn full_shift_values_are_flat() {
    for a in 2..=4 {
        let est = estimate_pressure(&full(a), &Potential::zero(), None, &[1, 2, 3, 5, 8]).unwrap();
        for v in &est.values {
            assert!((finite(*v) - (a as f64).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn golden_mean_values_decrease_to_log_phi() {
    let est = estimate_pressure(&golden_mean(), &Potential::zero(), None, &[1, 2, 4, 8, 16, 32]).unwrap();
    let vals: Vec<f64> = est.values.iter().map(|v| finite(*v)).collect();
    assert!(vals.windows(2).all(|p| p[1] <= p[0] + TOL));
    // Z_n is a Fibonacci number, so A_n / n - log phi = O(1/n).
    let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!(vals[5] > log_phi && vals[5] - log_phi < 0.02);
}
