//! Post-hoc per-feature calibration of a hybrid synthetic matrix toward the
//! real training marginals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::distance::{mean, per_feature_wd};
use crate::nn::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMethod {
    Raw,
    Moment,
    Full,
    Soft,
    Adaptive,
    Iterative,
}

impl CalibrationMethod {
    pub const ALL: [CalibrationMethod; 6] = [
        CalibrationMethod::Raw,
        CalibrationMethod::Moment,
        CalibrationMethod::Full,
        CalibrationMethod::Soft,
        CalibrationMethod::Adaptive,
        CalibrationMethod::Iterative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CalibrationMethod::Raw => "raw",
            CalibrationMethod::Moment => "moment",
            CalibrationMethod::Full => "full",
            CalibrationMethod::Soft => "soft",
            CalibrationMethod::Adaptive => "adaptive",
            CalibrationMethod::Iterative => "iterative",
        }
    }

    /// Row label used in comparison tables.
    pub fn display_name(self) -> &'static str {
        match self {
            CalibrationMethod::Raw => "Raw Hybrid",
            CalibrationMethod::Moment => "Moment Matching",
            CalibrationMethod::Full => "Full Histogram",
            CalibrationMethod::Soft => "Soft Histogram",
            CalibrationMethod::Adaptive => "Adaptive Soft Histogram",
            CalibrationMethod::Iterative => "Iterative Soft Histogram",
        }
    }
}

impl fmt::Display for CalibrationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CalibrationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CalibrationMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown calibration method {s:?} (expected raw, moment, full, soft, adaptive or iterative)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveParams {
    /// Sigmoid slope.
    pub beta: f64,
    /// Discrepancy at which a feature is blended half and half.
    pub tau: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self {
            beta: 50.0,
            tau: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    pub method: CalibrationMethod,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Use `α_d = sigmoid(+β(D_d − τ))`, which keeps the hybrid for the most
    /// discrepant features. The default flips the sign so those features get
    /// the strongest matching.
    pub keep_discrepant: bool,
    /// Iterative refinement with one `α` per feature instead of a global one.
    pub per_feature_alpha: bool,
    /// Iterative refinement toward the full match of the input hybrid rather
    /// than of the current iterate.
    pub fixed_target: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let adaptive = AdaptiveParams::default();
        Self {
            method: CalibrationMethod::Full,
            alpha: 0.5,
            beta: adaptive.beta,
            tau: adaptive.tau,
            eps: 1e-3,
            max_iter: 500,
            tol: 1e-5,
            keep_discrepant: false,
            per_feature_alpha: false,
            fixed_target: false,
        }
    }
}

impl CalibrationConfig {
    pub fn adaptive(&self) -> AdaptiveParams {
        AdaptiveParams {
            beta: self.beta,
            tau: self.tau,
        }
    }

    pub fn iterative(&self) -> IterativeParams {
        IterativeParams {
            eps: self.eps,
            max_iter: self.max_iter,
            tol: self.tol,
            per_feature: self.per_feature_alpha,
            fixed_target: self.fixed_target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterativeParams {
    pub eps: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub per_feature: bool,
    pub fixed_target: bool,
}

impl Default for IterativeParams {
    fn default() -> Self {
        CalibrationConfig::default().iterative()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub calibrated: Matrix,
    pub method: CalibrationMethod,
    /// Blend weight kept on the hybrid, per feature (soft and adaptive).
    pub per_feature_alpha: Vec<f64>,
    /// Global blend weight of each iterative step.
    pub alpha_trace: Vec<f64>,
    /// Mean per-feature WD of every iterate, starting with the input.
    pub wd_trace: Vec<f64>,
    /// Features whose synthetic spread was zero during moment matching.
    pub degenerate_features: Vec<usize>,
}

impl CalibrationResult {
    fn plain(calibrated: Matrix, method: CalibrationMethod) -> Self {
        Self {
            calibrated,
            method,
            per_feature_alpha: Vec::new(),
            alpha_trace: Vec::new(),
            wd_trace: Vec::new(),
            degenerate_features: Vec::new(),
        }
    }
}

fn check_features(hybrid: &Matrix, real: &Matrix) -> Result<()> {
    if hybrid.cols() != real.cols() {
        return Err(Error::dim(real.cols(), hybrid.cols(), "feature count"));
    }
    if real.rows() == 0 || hybrid.rows() == 0 {
        return Err(Error::InvalidInput(
            "calibration needs non-empty inputs".into(),
        ));
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let var = xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / xs.len() as f64;
    (m, var.sqrt())
}

/// Per-feature affine map onto the real mean and (population) standard deviation.
/// A feature with zero synthetic spread becomes the constant real mean.
pub fn calibrate_moment(hybrid: &Matrix, real: &Matrix) -> Result<CalibrationResult> {
    check_features(hybrid, real)?;
    let mut out = hybrid.clone();
    let mut degenerate = Vec::new();
    for j in 0..hybrid.cols() {
        let (mu_s, sd_s) = mean_std(&hybrid.column(j));
        let (mu_r, sd_r) = mean_std(&real.column(j));
        let col: Vec<f64> = if sd_s > 0.0 {
            let scale = sd_r / sd_s;
            hybrid
                .column(j)
                .iter()
                .map(|x| scale * (x - mu_s) + mu_r)
                .collect()
        } else {
            degenerate.push(j);
            vec![mu_r; hybrid.rows()]
        };
        out.set_column(j, &col);
    }
    if !degenerate.is_empty() {
        log::warn!("moment matching: features {degenerate:?} have zero synthetic spread");
    }
    let mut res = CalibrationResult::plain(out, CalibrationMethod::Moment);
    res.degenerate_features = degenerate;
    Ok(res)
}

/// Empirical quantile of sorted `real` at probability `p`, interpolating
/// linearly between order statistics placed at `(k + 0.5) / n`.
pub fn empirical_quantile(real_sorted: &[f64], p: f64) -> f64 {
    let n = real_sorted.len();
    let h = (p * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        real_sorted[lo]
    } else {
        real_sorted[lo] + frac * (real_sorted[hi] - real_sorted[lo])
    }
}

/// Real quantile at probability `(rank + 0.5) / n_s`, i.e. position
/// `h = ((2 rank + 1) m − n_s) / (2 n_s)` among the `m` sorted real values.
/// The position is computed in integers so that equal sizes hit order
/// statistics exactly.
pub fn quantile_at_rank(real_sorted: &[f64], rank: usize, n_s: usize) -> f64 {
    let m = real_sorted.len() as i128;
    let den = 2 * n_s as i128;
    let num = (2 * rank as i128 + 1) * m - n_s as i128;
    if num <= 0 {
        return real_sorted[0];
    }
    let lo = (num / den) as usize;
    if lo >= real_sorted.len() - 1 {
        return real_sorted[real_sorted.len() - 1];
    }
    let rem = num % den;
    if rem == 0 {
        real_sorted[lo]
    } else {
        let frac = rem as f64 / den as f64;
        real_sorted[lo] + frac * (real_sorted[lo + 1] - real_sorted[lo])
    }
}

/// Rank-based quantile mapping of one column. The value of rank `r` among
/// `n_s` synthetic values (stable order on value, then position) becomes the
/// real quantile at `(r + 0.5) / n_s`.
pub fn quantile_map(synth: &[f64], real: &[f64]) -> Vec<f64> {
    let mut real_sorted = real.to_vec();
    real_sorted.sort_by(f64::total_cmp);
    let mut order: Vec<usize> = (0..synth.len()).collect();
    order.sort_by(|&a, &b| synth[a].total_cmp(&synth[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; synth.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = quantile_at_rank(&real_sorted, rank, synth.len());
    }
    out
}

pub fn full_match(hybrid: &Matrix, real: &Matrix) -> Result<Matrix> {
    check_features(hybrid, real)?;
    let mut out = hybrid.clone();
    for j in 0..hybrid.cols() {
        out.set_column(j, &quantile_map(&hybrid.column(j), &real.column(j)));
    }
    Ok(out)
}

pub fn calibrate_full_histogram(hybrid: &Matrix, real: &Matrix) -> Result<CalibrationResult> {
    Ok(CalibrationResult::plain(
        full_match(hybrid, real)?,
        CalibrationMethod::Full,
    ))
}

fn blend_columns(hybrid: &Matrix, matched: &Matrix, alphas: &[f64]) -> Matrix {
    let mut out = hybrid.clone();
    for i in 0..out.rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            let a = alphas[j];
            *v = a * hybrid[(i, j)] + (1.0 - a) * matched[(i, j)];
        }
    }
    out
}

/// `α · hybrid + (1 − α) · full_match(hybrid)`
pub fn calibrate_soft(hybrid: &Matrix, real: &Matrix, alpha: f64) -> Result<CalibrationResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let matched = full_match(hybrid, real)?;
    let alphas = vec![alpha; hybrid.cols()];
    let mut res = CalibrationResult::plain(
        blend_columns(hybrid, &matched, &alphas),
        CalibrationMethod::Soft,
    );
    res.per_feature_alpha = alphas;
    Ok(res)
}

/// Blend weight kept on the hybrid for a feature with discrepancy `d`.
pub fn adaptive_alpha(d: f64, params: AdaptiveParams, keep_discrepant: bool) -> f64 {
    let z = params.beta * (d - params.tau);
    if keep_discrepant {
        sigmoid(z)
    } else {
        sigmoid(-z)
    }
}

/// Soft matching with a per-feature weight driven by that feature's WD to the
/// real data: features further away are pulled harder toward the full match.
pub fn calibrate_adaptive(
    hybrid: &Matrix,
    real: &Matrix,
    params: AdaptiveParams,
    keep_discrepant: bool,
) -> Result<CalibrationResult> {
    if !(params.beta > 0.0 && params.beta.is_finite()) {
        return Err(Error::Config(format!(
            "beta must be positive, got {}",
            params.beta
        )));
    }
    let matched = full_match(hybrid, real)?;
    let alphas: Vec<f64> = per_feature_wd(hybrid, real)?
        .into_iter()
        .map(|d| adaptive_alpha(d, params, keep_discrepant))
        .collect();
    let mut res = CalibrationResult::plain(
        blend_columns(hybrid, &matched, &alphas),
        CalibrationMethod::Adaptive,
    );
    res.per_feature_alpha = alphas;
    Ok(res)
}

/// Repeats `x ← α x + (1 − α) full_match(x)` with `α = W / (W + eps)`, where
/// `W` is the mean per-feature WD of the current iterate. Stops once `W`
/// changes by less than `tol` or after `max_iter` steps.
pub fn calibrate_iterative(
    hybrid: &Matrix,
    real: &Matrix,
    params: IterativeParams,
) -> Result<CalibrationResult> {
    let IterativeParams {
        eps,
        max_iter,
        tol,
        per_feature,
        fixed_target,
    } = params;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    check_features(hybrid, real)?;
    let target = if fixed_target {
        Some(full_match(hybrid, real)?)
    } else {
        None
    };
    let mut x = hybrid.clone();
    let mut wd = per_feature_wd(&x, real)?;
    let mut wd_trace = vec![mean(&wd)];
    let mut alpha_trace = Vec::new();
    let mut last_alphas = Vec::new();
    for _ in 0..max_iter {
        let w = *wd_trace.last().expect("trace seeded");
        let alphas: Vec<f64> = if per_feature {
            wd.iter().map(|wj| wj / (wj + eps)).collect()
        } else {
            vec![w / (w + eps); x.cols()]
        };
        alpha_trace.push(mean(&alphas));
        x = match &target {
            Some(t) => blend_columns(&x, t, &alphas),
            None => blend_columns(&x, &full_match(&x, real)?, &alphas),
        };
        last_alphas = alphas;
        wd = per_feature_wd(&x, real)?;
        let next = mean(&wd);
        wd_trace.push(next);
        if (next - w).abs() < tol {
            break;
        }
    }
    Ok(CalibrationResult {
        calibrated: x,
        method: CalibrationMethod::Iterative,
        per_feature_alpha: last_alphas,
        alpha_trace,
        wd_trace,
        degenerate_features: Vec::new(),
    })
}

pub fn calibrate(
    hybrid: &Matrix,
    real: &Matrix,
    config: &CalibrationConfig,
) -> Result<CalibrationResult> {
    match config.method {
        CalibrationMethod::Raw => {
            check_features(hybrid, real)?;
            Ok(CalibrationResult::plain(
                hybrid.clone(),
                CalibrationMethod::Raw,
            ))
        }
        CalibrationMethod::Moment => calibrate_moment(hybrid, real),
        CalibrationMethod::Full => calibrate_full_histogram(hybrid, real),
        CalibrationMethod::Soft => calibrate_soft(hybrid, real, config.alpha),
        CalibrationMethod::Adaptive => {
            calibrate_adaptive(hybrid, real, config.adaptive(), config.keep_discrepant)
        }
        CalibrationMethod::Iterative => calibrate_iterative(hybrid, real, config.iterative()),
    }
}
