//! Fidelity, privacy and utility metrics.

pub mod distance;
pub mod fidelity;
pub mod privacy;
pub mod projection;
pub mod report;
pub mod utility;

pub use distance::{
    ks_statistic, mean_ks, mean_wd, per_feature_ks, per_feature_wd, wasserstein_1d,
};
pub use fidelity::{column_shapes_score, correlation_matrix, overall_score, pair_trends_score};
pub use privacy::{nnaa, nnaa_balanced};
pub use projection::{export_histograms, pca_project, FeatureHistogram, PcaProjection};
pub use report::{evaluate, EvaluationReport};
pub use utility::{accuracy, utility_eval, weighted_f1, ClassifierConfig, Utility};
