//! One-dimensional distribution distances between empirical samples.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_nonempty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    Ok(())
}

/// Exact 1-D Wasserstein-1 distance between two empirical distributions:
/// the integral of `|F_a - F_b|` over the line, accumulated by merging the
/// sorted samples.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    check_nonempty(a, b)?;
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    let mut prev = a[0].min(b[0]);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let gap = i as f64 / na - j as f64 / nb;
        total += gap.abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// Two-sample Kolmogorov–Smirnov statistic with right-continuous empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    check_nonempty(a, b)?;
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    // Once one sample is exhausted its CDF is 1; the other's largest gap is at
    // its current position.
    sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    Ok(sup)
}

fn per_feature(x: &Matrix, y: &Matrix, f: fn(&[f64], &[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    if x.cols() != y.cols() {
        return Err(Error::dim(y.cols(), x.cols(), "feature count"));
    }
    (0..x.cols())
        .map(|j| f(&x.column(j), &y.column(j)))
        .collect()
}

pub fn per_feature_wd(x: &Matrix, y: &Matrix) -> Result<Vec<f64>> {
    per_feature(x, y, wasserstein_1d)
}

pub fn per_feature_ks(x: &Matrix, y: &Matrix) -> Result<Vec<f64>> {
    per_feature(x, y, ks_statistic)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn mean_wd(x: &Matrix, y: &Matrix) -> Result<f64> {
    per_feature_wd(x, y).map(|v| mean(&v))
}

pub fn mean_ks(x: &Matrix, y: &Matrix) -> Result<f64> {
    per_feature_ks(x, y).map(|v| mean(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wd_examples() {
        assert_eq!(wasserstein_1d(&[0.3, 0.1], &[0.1, 0.3]).unwrap(), 0.0);
        assert_eq!(wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(wasserstein_1d(&[0.0], &[-3.5]).unwrap(), 3.5);
        assert!(wasserstein_1d(&[], &[1.0]).is_err());
    }

    #[test]
    fn wd_unequal_sizes() {
        // F_a jumps to 1 at 0; F_b is 0.5 on [0, 1): area 0.5
        assert!((wasserstein_1d(&[0.0], &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0, 1.0], &[10.0, 11.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), 0.5);
        assert!(ks_statistic(&[1.0], &[]).is_err());
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, 1..12)
    }

    proptest! {
        #[test]
        fn wd_is_symmetric_and_nonnegative(a in sample(), b in sample()) {
            let ab = wasserstein_1d(&a, &b).unwrap();
            let ba = wasserstein_1d(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert_eq!(wasserstein_1d(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn wd_translation(a in sample(), c in -3.0f64..3.0) {
            let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
            prop_assert!((wasserstein_1d(&a, &shifted).unwrap() - c.abs()).abs() < 1e-9);
        }

        #[test]
        fn ks_in_unit_interval(a in sample(), b in sample()) {
            let k = ks_statistic(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&k));
        }
    }
}
