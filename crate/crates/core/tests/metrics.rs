mod common;

use proptest::prelude::*;
use synthcal::metrics::distance::{ks_statistic, wasserstein_1d};
use synthcal::metrics::{nnaa, weighted_f1};
use synthcal::rng::seeded;
use synthcal::Matrix;

use common::{brute_ks, brute_nnaa, transport_wd};

use rand::Rng as _;

#[test]
fn wd_worked_examples() {
    assert_eq!(wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
    assert!((transport_wd(&[0.0, 1.0], &[1.0, 2.0]) - 1.0).abs() < 1e-12);
    assert_eq!(wasserstein_1d(&[0.0], &[-2.5]).unwrap(), 2.5);
    assert_eq!(wasserstein_1d(&[0.3, 0.1], &[0.1, 0.3]).unwrap(), 0.0);
    assert!(wasserstein_1d(&[], &[1.0]).is_err());
}

#[test]
fn ks_worked_examples() {
    assert_eq!(ks_statistic(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), 0.5);
    assert_eq!(brute_ks(&[1.0, 2.0], &[1.5, 2.5]), 0.5);
    assert_eq!(ks_statistic(&[0.0, 1.0], &[10.0, 11.0]).unwrap(), 1.0);
    assert_eq!(ks_statistic(&[4.0, 2.0], &[2.0, 4.0]).unwrap(), 0.0);
    assert!(ks_statistic(&[1.0], &[]).is_err());
}

#[test]
fn wd_triangle_inequality_on_fixed_pool() {
    let mut rng = seeded(77);
    let pool: Vec<Vec<f64>> = (0..12)
        .map(|_| {
            let n = rng.random_range(1..=6);
            (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
        })
        .collect();
    for a in &pool {
        for b in &pool {
            for c in &pool {
                let ab = transport_wd(a, b);
                let bc = transport_wd(b, c);
                let ac = transport_wd(a, c);
                assert!(ac <= ab + bc + 1e-12);
                assert!((wasserstein_1d(a, c).unwrap() - ac).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn nnaa_matches_brute_force() {
    let mut rng = seeded(3);
    for _ in 0..10 {
        let n = rng.random_range(2..30);
        let m = rng.random_range(2..30);
        let d = rng.random_range(1..4);
        let real: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(0..5) as f64).collect())
            .collect();
        let synth: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(0..5) as f64).collect())
            .collect();
        let fast = nnaa(
            &Matrix::from_rows(&real).unwrap(),
            &Matrix::from_rows(&synth).unwrap(),
        )
        .unwrap();
        assert_eq!(fast, brute_nnaa(&real, &synth));
    }
}

#[test]
fn nnaa_duplicate_pool_is_low() {
    let mut rng = seeded(4);
    let rows: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
        .collect();
    let m = Matrix::from_rows(&rows).unwrap();
    let v = nnaa(&m, &m).unwrap();
    assert!(v <= 5.0);
    assert_eq!(v, brute_nnaa(&rows, &rows));
}

#[test]
fn weighted_f1_confusion_oracle() {
    // TP 4, FN 1, FP 1, TN 4 with class 1 as positive
    let truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let pred = [1, 1, 1, 1, 0, 1, 0, 0, 0, 0];
    let f1_pos = 2.0 * 4.0 / (2.0 * 4.0 + 1.0 + 1.0);
    let f1_neg = 2.0 * 4.0 / (2.0 * 4.0 + 1.0 + 1.0);
    let oracle = 100.0 * (5.0 * f1_pos + 5.0 * f1_neg) / 10.0;
    assert!((weighted_f1(&truth, &pred, 2) - oracle).abs() < 1e-12);
    assert!((oracle - 80.0).abs() < 1e-12);
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![-5.0f64..5.0, (0i32..4).prop_map(f64::from)],
        1..=8,
    )
}

proptest! {
    #[test]
    fn wd_equals_transport(a in sample(), b in sample()) {
        prop_assert!((wasserstein_1d(&a, &b).unwrap() - transport_wd(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn ks_equals_pooled_brute_force(a in sample(), b in sample()) {
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), brute_ks(&a, &b));
    }

    #[test]
    fn wd_symmetric_nonnegative(a in sample(), b in sample()) {
        let ab = wasserstein_1d(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - wasserstein_1d(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert_eq!(wasserstein_1d(&a, &a).unwrap(), 0.0);
    }
}
