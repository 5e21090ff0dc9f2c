mod common;

use proptest::prelude::*;
use synthcal::calibration::{
    calibrate, calibrate_adaptive, calibrate_full_histogram, calibrate_iterative, quantile_map,
    AdaptiveParams, CalibrationConfig, CalibrationMethod, IterativeParams,
};
use synthcal::metrics::distance::{ks_statistic, per_feature_ks};
use synthcal::Matrix;

use common::brute_quantile_map;

#[test]
fn five_onto_seven_matches_oracle_exactly() {
    let synth = [0.4, -1.0, 2.5, 0.4, 7.0];
    let real = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0];
    assert_eq!(
        quantile_map(&synth, &real),
        brute_quantile_map(&synth, &real)
    );
}

#[test]
fn seven_onto_five_matches_oracle_exactly() {
    let synth = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.0];
    let real = [0.4, -1.0, 2.5, 0.2, 7.0];
    assert_eq!(
        quantile_map(&synth, &real),
        brute_quantile_map(&synth, &real)
    );
}

#[test]
fn adaptive_sign_flag() {
    let real =
        Matrix::from_columns(&[(0..40).map(|i| i as f64 / 40.0).collect::<Vec<_>>()]).unwrap();
    let far = real.map(|v| v + 0.5);
    let p = AdaptiveParams::default();
    let pulled = calibrate_adaptive(&far, &real, p, false).unwrap();
    let kept = calibrate_adaptive(&far, &real, p, true).unwrap();
    assert!(pulled.per_feature_alpha[0] < 1e-6);
    assert!(kept.per_feature_alpha[0] > 1.0 - 1e-6);
    assert!(per_feature_ks(&pulled.calibrated, &real).unwrap()[0] < 0.05);
}

#[test]
fn dispatcher_covers_every_method() {
    let real = Matrix::from_rows(&[[0.1, 0.9], [0.3, 0.2], [0.8, 0.5], [0.6, 0.4]]).unwrap();
    let hybrid = real.map(|v| 0.5 * v + 0.3);
    for method in CalibrationMethod::ALL {
        let out = calibrate(
            &hybrid,
            &real,
            &CalibrationConfig {
                method,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.method, method);
        assert_eq!(out.calibrated.shape(), hybrid.shape());
        assert!(out
            .per_feature_alpha
            .iter()
            .all(|a| (0.0..=1.0).contains(a)));
    }
    let raw = calibrate(
        &hybrid,
        &real,
        &CalibrationConfig {
            method: CalibrationMethod::Raw,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(raw.calibrated, hybrid);
}

#[test]
fn iterative_reaches_full_histogram_level() {
    let real = Matrix::from_columns(&[
        (0..80)
            .map(|i| ((i * 37) % 80) as f64 / 80.0)
            .collect::<Vec<_>>(),
        (0..80)
            .map(|i| (i as f64 / 13.0).sin().abs())
            .collect::<Vec<_>>(),
    ])
    .unwrap();
    let hybrid = real.map(|v| 0.8 * v * v + 0.1);
    let full = calibrate_full_histogram(&hybrid, &real).unwrap();
    let full_wd = synthcal::metrics::mean_wd(&full.calibrated, &real).unwrap();
    let out = calibrate_iterative(&hybrid, &real, IterativeParams::default()).unwrap();
    assert!(out.wd_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*out.wd_trace.last().unwrap() <= full_wd + 1e-3);
    assert_eq!(out.alpha_trace.len() + 1, out.wd_trace.len());
}

fn distinct(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::hash_set(-1000i32..1000, n)
        .prop_map(|s| s.into_iter().map(|v| v as f64 / 10.0).collect())
}

proptest! {
    #[test]
    fn quantile_map_matches_oracle(synth in prop::collection::vec(-5.0f64..5.0, 1..20), real in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        prop_assert_eq!(quantile_map(&synth, &real), brute_quantile_map(&synth, &real));
    }

    #[test]
    fn ks_collapse_on_tie_free_data(synth in distinct(1..40), real in distinct(1..40)) {
        let out = quantile_map(&synth, &real);
        let (a, b) = (synth.len().min(real.len()) as f64, synth.len().max(real.len()) as f64);
        prop_assert!(ks_statistic(&out, &real).unwrap() <= 1.0 / a + 1.0 / b + 1e-12);
    }

    #[test]
    fn adaptive_alpha_strictly_decreasing(d1 in 0.0f64..0.2, gap in 1e-3f64..0.2) {
        let p = AdaptiveParams::default();
        prop_assert!(
            synthcal::calibration::adaptive_alpha(d1 + gap, p, false)
                < synthcal::calibration::adaptive_alpha(d1, p, false)
        );
    }
}
