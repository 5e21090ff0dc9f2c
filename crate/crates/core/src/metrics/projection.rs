//! Data exports for plotting: PCA projections and per-feature histograms.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::distance::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    /// `n_components × d`, orthonormal rows.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub real: Matrix,
    pub synth: Matrix,
}

/// Principal axes fitted on `real` (covariance eigenvectors in descending
/// eigenvalue order, each signed so its largest-magnitude loading is positive);
/// both inputs are projected after centering on the real mean.
pub fn pca_project(real: &Matrix, synth: &Matrix, n_components: usize) -> Result<PcaProjection> {
    let (n, d) = real.shape();
    if synth.cols() != d {
        return Err(Error::dim(d, synth.cols(), "feature count"));
    }
    if n_components == 0 || n_components > d {
        return Err(Error::InvalidInput(format!(
            "cannot take {n_components} components of {d} features"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput("PCA needs at least two rows".into()));
    }
    let means: Vec<f64> = real.columns().iter().map(|c| mean(c)).collect();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in real.row_iter() {
        for j in 0..d {
            let a = row[j] - means[j];
            for k in j..d {
                cov[(j, k)] += a * (row[k] - means[k]);
            }
        }
    }
    for j in 0..d {
        for k in j..d {
            let v = cov[(j, k)] / (n - 1) as f64;
            cov[(j, k)] = v;
            cov[(k, j)] = v;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Matrix::zeros(n_components, d);
    let mut explained_variance = Vec::with_capacity(n_components);
    for (c, &idx) in order.iter().take(n_components).enumerate() {
        let v = eig.eigenvectors.column(idx);
        let mut pivot = 0;
        for j in 0..d {
            if v[j].abs() > v[pivot].abs() + 1e-12 {
                pivot = j;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[(c, j)] = sign * v[j];
        }
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    let explained_ratio = explained_variance
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();

    let project = |m: &Matrix| -> Matrix {
        let mut out = Matrix::zeros(m.rows(), n_components);
        for (i, row) in m.row_iter().enumerate() {
            for c in 0..n_components {
                out[(i, c)] = row
                    .iter()
                    .zip(&means)
                    .zip(components.row(c))
                    .map(|((x, mu), w)| (x - mu) * w)
                    .sum();
            }
        }
        out
    };
    Ok(PcaProjection {
        real: project(real),
        synth: project(synth),
        components,
        explained_variance,
        explained_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHistogram {
    pub edges: Vec<f64>,
    pub real_density: Vec<f64>,
    pub synth_density: Vec<f64>,
    /// Synthetic values fell outside the real range and were clamped into the end bins.
    pub clamped: bool,
}

/// Per-feature histograms on shared edges spanning the real min/max.
/// Each density vector sums to 1.
pub fn export_histograms(
    real: &Matrix,
    synth: &Matrix,
    bins: usize,
) -> Result<Vec<FeatureHistogram>> {
    if bins < 2 {
        return Err(Error::InvalidInput("need at least two bins".into()));
    }
    if real.cols() != synth.cols() {
        return Err(Error::dim(real.cols(), synth.cols(), "feature count"));
    }
    (0..real.cols())
        .map(|j| {
            let r = real.column(j);
            let s = synth.column(j);
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / bins as f64;
            let edges = (0..=bins).map(|b| lo + width * b as f64).collect();
            let mut clamped = false;
            let mut bin_of = |v: f64, track: bool| -> usize {
                if track && (v < lo || v > hi) {
                    clamped = true;
                }
                if width <= 0.0 {
                    return 0;
                }
                (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1)
            };
            let mut real_density = vec![0.0; bins];
            for &v in &r {
                real_density[bin_of(v, false)] += 1.0;
            }
            let mut synth_density = vec![0.0; bins];
            for &v in &s {
                synth_density[bin_of(v, true)] += 1.0;
            }
            let nr = r.len() as f64;
            let ns = s.len() as f64;
            real_density.iter_mut().for_each(|v| *v /= nr);
            synth_density.iter_mut().for_each(|v| *v /= ns);
            Ok(FeatureHistogram {
                edges,
                real_density,
                synth_density,
                clamped,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> Matrix {
        let rows: Vec<[f64; 2]> = (0..50).map(|i| [i as f64 * 0.1, i as f64 * 0.1]).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rank_one_data_has_one_component() {
        let x = line_data();
        let p = pca_project(&x, &x, 2).unwrap();
        assert!(p.explained_ratio[0] >= 0.999);
        let c = p.components.row(0);
        assert!((c[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((c[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(p.real, p.synth);
    }

    #[test]
    fn full_projection_preserves_variance() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [t.sin(), (0.3 * t).cos() + 0.1 * t, (t * t) % 7.0]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let p = pca_project(&x, &x, 3).unwrap();
        let var = |m: &Matrix| -> f64 {
            m.columns()
                .iter()
                .map(|c| {
                    let mu = mean(c);
                    c.iter().map(|v| (v - mu).powi(2)).sum::<f64>()
                })
                .sum()
        };
        assert!((var(&x) - var(&p.real)).abs() < 1e-9 * var(&x).max(1.0));
    }

    #[test]
    fn too_many_components_rejected() {
        let x = line_data();
        assert!(pca_project(&x, &x, 3).is_err());
    }

    #[test]
    fn histogram_densities() {
        let x = line_data();
        let h = export_histograms(&x, &x, 7).unwrap();
        for f in &h {
            assert!((f.real_density.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(f.real_density, f.synth_density);
            assert!(!f.clamped);
        }
        let outside = x.map(|v| v + 100.0);
        let h = export_histograms(&x, &outside, 4).unwrap();
        assert!(h[0].clamped);
        assert_eq!(h[0].synth_density[3], 1.0);
        assert!(export_histograms(&x, &x, 1).is_err());
    }
}
