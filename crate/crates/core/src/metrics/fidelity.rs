//! Column-shape and pair-trend fidelity scores on a 0–100 scale.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::distance::{mean, per_feature_ks};

/// Pearson correlation matrix. Zero-variance features get zero correlation
/// with everything else and a unit diagonal.
pub fn correlation_matrix(x: &Matrix) -> Result<Matrix> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::InvalidInput(
            "correlation needs at least two rows".into(),
        ));
    }
    let cols = x.columns();
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut out = Matrix::identity(d);
    for j in 0..d {
        for k in (j + 1)..d {
            let r = if norms[j] > 0.0 && norms[k] > 0.0 {
                let dot: f64 = centered[j]
                    .iter()
                    .zip(&centered[k])
                    .map(|(a, b)| a * b)
                    .sum();
                (dot / (norms[j] * norms[k])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            out[(j, k)] = r;
            out[(k, j)] = r;
        }
    }
    Ok(out)
}

pub fn column_shapes_score(real: &Matrix, synth: &Matrix) -> Result<f64> {
    let ks = per_feature_ks(real, synth)?;
    Ok(100.0 * mean(&ks.iter().map(|k| 1.0 - k).collect::<Vec<_>>()))
}

pub fn pair_trends_score(real: &Matrix, synth: &Matrix) -> Result<f64> {
    if real.cols() != synth.cols() {
        return Err(Error::dim(real.cols(), synth.cols(), "feature count"));
    }
    let d = real.cols();
    if d < 2 {
        return Err(Error::InvalidInput(
            "pair trends need at least two features".into(),
        ));
    }
    let cr = correlation_matrix(real)?;
    let cs = correlation_matrix(synth)?;
    Ok(100.0 * pair_similarity(&cr, &cs))
}

/// Mean over unordered pairs of `1 - |ρ_real - ρ_synth| / 2`.
pub fn pair_similarity(corr_real: &Matrix, corr_synth: &Matrix) -> f64 {
    let d = corr_real.rows();
    let mut total = 0.0;
    let mut count = 0usize;
    for j in 0..d {
        for k in (j + 1)..d {
            total += 1.0 - (corr_real[(j, k)] - corr_synth[(j, k)]).abs() / 2.0;
            count += 1;
        }
    }
    total / count as f64
}

pub fn overall_score(shapes: f64, pairs: f64) -> f64 {
    (shapes + pairs) / 2.0
}
