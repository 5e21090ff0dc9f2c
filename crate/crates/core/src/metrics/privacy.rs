use rand::seq::index::sample;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded;

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest-neighbor adversarial accuracy, in percent.
///
/// Real rows (label 0) and synthetic rows (label 1) are pooled in that order;
/// every pooled row is classified by its nearest other row (Euclidean,
/// leave-one-out, distance ties go to the smaller pooled index).
pub fn nnaa(real: &Matrix, synth: &Matrix) -> Result<f64> {
    if real.cols() != synth.cols() {
        return Err(Error::dim(real.cols(), synth.cols(), "feature count"));
    }
    if real.rows() < 2 || synth.rows() < 2 {
        return Err(Error::InvalidInput(
            "adversarial accuracy needs at least two rows per side".into(),
        ));
    }
    let n_real = real.rows();
    let pooled: Vec<&[f64]> = real.row_iter().chain(synth.row_iter()).collect();
    let correct: usize = (0..pooled.len())
        .into_par_iter()
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (j, row) in pooled.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = squared_distance(pooled[i], row);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            usize::from((best < n_real) == (i < n_real))
        })
        .sum();
    Ok(100.0 * correct as f64 / pooled.len() as f64)
}

/// NNAA on a class-balanced pool: the larger sample is reduced to the size of
/// the smaller one by a seeded draw without replacement (kept in row order).
pub fn nnaa_balanced(real: &Matrix, synth: &Matrix, seed: u64) -> Result<f64> {
    let n = real.rows().min(synth.rows());
    let shrink = |m: &Matrix| -> Matrix {
        if m.rows() == n {
            return m.clone();
        }
        let mut idx = sample(&mut seeded(seed), m.rows(), n).into_vec();
        idx.sort_unstable();
        m.select_rows(&idx)
    };
    nnaa(&shrink(real), &shrink(synth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_caught_as_memorization() {
        let real = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [2.0, 2.0]]).unwrap();
        assert_eq!(nnaa(&real, &real.clone()).unwrap(), 0.0);
    }

    #[test]
    fn separated_clouds_fully_detected() {
        let real = Matrix::from_rows(&[[0.0, 0.0], [0.1, 0.0], [0.0, 0.2]]).unwrap();
        let synth = real.map(|x| x + 100.0);
        assert_eq!(nnaa(&real, &synth).unwrap(), 100.0);
    }

    #[test]
    fn rejects_mismatch_and_tiny_inputs() {
        let a = Matrix::zeros(3, 2);
        assert!(nnaa(&a, &Matrix::zeros(3, 3)).is_err());
        assert!(nnaa(&a, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn balanced_pool_shrinks_larger_side() {
        let real = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let synth = Matrix::from_rows(&[[0.0], [1.0], [2.0], [50.0], [60.0], [70.0]]).unwrap();
        let a = nnaa_balanced(&real, &synth, 3).unwrap();
        assert_eq!(a, nnaa_balanced(&real, &synth, 3).unwrap());
        assert!((0.0..=100.0).contains(&a));
        assert_eq!(nnaa_balanced(&real, &real, 9).unwrap(), 0.0);
    }
}
