use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::Result;
use crate::metrics::distance::{mean, per_feature_ks, per_feature_wd};
use crate::metrics::fidelity::{column_shapes_score, overall_score, pair_trends_score};
use crate::metrics::privacy::{nnaa, nnaa_balanced};
use crate::metrics::utility::{utility_eval, ClassifierConfig};

/// Fidelity, privacy and utility of one synthetic table against the real data.
/// Distances and scores use the real training split. Utility and `nnaa` use the
/// held-out test split, with `nnaa` on a class-balanced pool; `nnaa_train`
/// compares against the training rows the generators saw, so values near 0
/// indicate near-copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_feature_wd: Vec<f64>,
    pub per_feature_ks: Vec<f64>,
    pub mean_wd: f64,
    pub mean_ks: f64,
    pub nnaa: f64,
    pub nnaa_train: f64,
    pub utility_accuracy: f64,
    pub utility_f1: f64,
    pub column_shapes: f64,
    pub pair_trends: f64,
    pub overall: f64,
}

pub fn evaluate(
    real_train: &Table,
    real_test: &Table,
    synth: &Table,
    n_classes: usize,
    classifier: &ClassifierConfig,
    nnaa_seed: u64,
) -> Result<EvaluationReport> {
    let per_feature_wd = per_feature_wd(&synth.features, &real_train.features)?;
    let per_feature_ks = per_feature_ks(&synth.features, &real_train.features)?;
    let column_shapes = column_shapes_score(&real_train.features, &synth.features)?;
    let pair_trends = pair_trends_score(&real_train.features, &synth.features)?;
    let utility = utility_eval(synth, real_test, n_classes, classifier)?;
    Ok(EvaluationReport {
        mean_wd: mean(&per_feature_wd),
        mean_ks: mean(&per_feature_ks),
        per_feature_wd,
        per_feature_ks,
        nnaa: nnaa_balanced(&real_test.features, &synth.features, nnaa_seed)?,
        nnaa_train: nnaa(&real_train.features, &synth.features)?,
        utility_accuracy: utility.accuracy,
        utility_f1: utility.f1,
        column_shapes,
        pair_trends,
        overall: overall_score(column_shapes, pair_trends),
    })
}
