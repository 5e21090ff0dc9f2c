//! Class-conditional diagonal Gaussian mixtures fitted by expectation maximization.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::log_sum_exp;
use crate::rng::{seeded, Rng};

pub const COVARIANCE_FLOOR: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Diagonal covariances, every entry at least the floor.
    pub variances: Vec<Vec<f64>>,
    /// Total log-likelihood of the class rows after each EM iteration.
    pub log_likelihood_trace: Vec<f64>,
}

impl Mixture {
    fn n_components(&self) -> usize {
        self.weights.len()
    }

    fn component_log_density(&self, k: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((xj, mu), var) in x.iter().zip(&self.means[k]).zip(&self.variances[k]) {
            let diff = xj - mu;
            acc += LN_2PI + var.ln() + diff * diff / var;
        }
        -0.5 * acc
    }

    /// Weighted component log-densities `log π_k + log N(x | μ_k, Σ_k)`.
    fn joint_log(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = if self.weights[k] > 0.0 {
                self.weights[k].ln() + self.component_log_density(k, x)
            } else {
                f64::NEG_INFINITY
            };
        }
    }

    pub fn log_likelihood(&self, rows: &[&[f64]]) -> f64 {
        let mut buf = vec![0.0; self.n_components()];
        rows.iter()
            .map(|x| {
                self.joint_log(x, &mut buf);
                log_sum_exp(&buf)
            })
            .sum()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut k = self.n_components() - 1;
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = i;
                break;
            }
        }
        self.means[k]
            .iter()
            .zip(&self.variances[k])
            .map(|(mu, var)| {
                let z: f64 = StandardNormal.sample(rng);
                mu + var.sqrt() * z
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    /// One mixture per class index.
    pub classes: Vec<Mixture>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmSettings {
    pub components: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for GmmSettings {
    fn default() -> Self {
        Self {
            components: 3,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

/// k-means++ seeding: the first center is uniform, later ones are drawn with
/// probability proportional to squared distance from the nearest chosen center.
fn seed_centers(rows: &[&[f64]], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = vec![rows[rng.random_range(0..rows.len())].to_vec()];
    let mut nearest = vec![f64::INFINITY; rows.len()];
    while centers.len() < k {
        let last = centers.last().expect("at least one center");
        for (d, x) in nearest.iter_mut().zip(rows) {
            let dist: f64 = x.iter().zip(last).map(|(a, b)| (a - b) * (a - b)).sum();
            *d = d.min(dist);
        }
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            nearest
                .iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or(rows.len() - 1)
        } else {
            rng.random_range(0..rows.len())
        };
        centers.push(rows[pick].to_vec());
    }
    centers
}

fn fit_mixture(rows: &[&[f64]], settings: GmmSettings, rng: &mut Rng) -> Mixture {
    let n = rows.len();
    let d = rows[0].len();
    let k = settings.components;

    let mut overall_var = vec![0.0; d];
    for j in 0..d {
        let m = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        overall_var[j] =
            (rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64).max(COVARIANCE_FLOOR);
    }
    let mut mix = Mixture {
        weights: vec![1.0 / k as f64; k],
        means: seed_centers(rows, k, rng),
        variances: vec![overall_var; k],
        log_likelihood_trace: Vec::new(),
    };

    let mut resp = Matrix::zeros(n, k);
    let mut buf = vec![0.0; k];
    for _ in 0..settings.max_iter {
        // E step
        for (i, x) in rows.iter().enumerate() {
            mix.joint_log(x, &mut buf);
            let lse = log_sum_exp(&buf);
            for (r, b) in resp.row_mut(i).iter_mut().zip(&buf) {
                *r = (b - lse).exp();
            }
        }
        // M step
        for c in 0..k {
            let nk: f64 = (0..n).map(|i| resp[(i, c)]).sum();
            mix.weights[c] = nk / n as f64;
            if nk <= f64::MIN_POSITIVE {
                continue;
            }
            for j in 0..d {
                let mu = (0..n).map(|i| resp[(i, c)] * rows[i][j]).sum::<f64>() / nk;
                let var = (0..n)
                    .map(|i| resp[(i, c)] * (rows[i][j] - mu).powi(2))
                    .sum::<f64>()
                    / nk;
                mix.means[c][j] = mu;
                mix.variances[c][j] = var.max(COVARIANCE_FLOOR);
            }
        }
        let total: f64 = mix.weights.iter().sum();
        mix.weights.iter_mut().for_each(|w| *w /= total);

        let ll = mix.log_likelihood(rows);
        let improvement = mix
            .log_likelihood_trace
            .last()
            .map_or(f64::INFINITY, |prev| ll - prev);
        mix.log_likelihood_trace.push(ll);
        if improvement < settings.tol {
            break;
        }
    }
    mix
}

pub fn fit_gmm(
    train: &Table,
    n_classes: usize,
    settings: GmmSettings,
    seed: u64,
) -> Result<GmmModel> {
    if settings.components == 0 {
        return Err(Error::Config("GMM needs at least one component".into()));
    }
    let groups = train.class_members(n_classes);
    let mut rng = seeded(seed);
    let mut classes = Vec::with_capacity(n_classes);
    for (c, members) in groups.iter().enumerate() {
        if members.is_empty() {
            // class absent from this table: a placeholder that is never sampled
            classes.push(Mixture {
                weights: vec![1.0],
                means: vec![vec![0.0; train.n_features()]],
                variances: vec![vec![COVARIANCE_FLOOR; train.n_features()]],
                log_likelihood_trace: Vec::new(),
            });
            continue;
        }
        if members.len() < settings.components {
            return Err(Error::InvalidInput(format!(
                "class {c} has {} rows, fewer than {} mixture components",
                members.len(),
                settings.components
            )));
        }
        let rows: Vec<&[f64]> = members.iter().map(|&i| train.features.row(i)).collect();
        classes.push(fit_mixture(&rows, settings, &mut rng));
    }
    Ok(GmmModel { classes })
}

/// Row `i` is drawn from the mixture of class `labels[i]`.
pub fn sample_gmm(model: &GmmModel, labels: &[usize], seed: u64) -> Result<Matrix> {
    let d = model.classes.first().map_or(0, |m| m.means[0].len());
    let mut rng = seeded(seed);
    let mut out = Matrix::zeros(labels.len(), d);
    for (i, &label) in labels.iter().enumerate() {
        let mix = model
            .classes
            .get(label)
            .ok_or_else(|| Error::InvalidInput(format!("label {label} has no mixture")))?;
        out.row_mut(i).copy_from_slice(&mix.sample(&mut rng));
    }
    Ok(out)
}
