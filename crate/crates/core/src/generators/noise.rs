use rand_distr::{Distribution, Normal};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded;

/// Adds independent `N(0, sigma²)` noise to every cell.
pub fn noise_inject(train: &Table, sigma: f64, seed: u64) -> Result<Matrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!(
            "noise sigma must be a finite non-negative number, got {sigma}"
        )));
    }
    let mut out = train.features.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut rng = seeded(seed);
    for v in out.as_mut_slice() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(n: usize) -> Table {
        let rows: Vec<[f64; 1]> = (0..n).map(|i| [(i % 7) as f64 / 7.0]).collect();
        Table::new(Matrix::from_rows(&rows).unwrap(), vec![0; n]).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let t = column(20);
        assert_eq!(noise_inject(&t, 0.0, 1).unwrap(), t.features);
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(noise_inject(&column(3), -0.1, 1).is_err());
    }

    #[test]
    fn noise_mean_within_clt_bound() {
        let n = 10_000;
        let sigma = 0.1;
        let t = column(n);
        let out = noise_inject(&t, sigma, 17).unwrap();
        let diff: f64 = out
            .as_slice()
            .iter()
            .zip(t.features.as_slice())
            .map(|(a, b)| a - b)
            .sum::<f64>()
            / n as f64;
        assert!(
            diff.abs() <= 3.0 * sigma / (n as f64).sqrt(),
            "mean offset {diff}"
        );
        assert_eq!(out, noise_inject(&t, sigma, 17).unwrap());
    }
}
