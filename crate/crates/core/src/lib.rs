//! Hybrid synthetic tabular data generation with learned mixture weights,
//! post-hoc marginal calibration and a fidelity, privacy and utility
//! evaluation suite.

pub mod calibration;
pub mod data;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod rl;
pub mod rng;

pub use calibration::{
    calibrate, AdaptiveParams, CalibrationConfig, CalibrationMethod, CalibrationResult,
    IterativeParams,
};
pub use data::{ImputeStrategy, NormStats, Prepared, Schema, SplitPair, Table};
pub use error::{Error, Result};
pub use generators::{GeneratorBundle, GeneratorConfig};
pub use matrix::Matrix;
pub use metrics::{ClassifierConfig, EvaluationReport};
pub use nn::{Mlp, Optimizer};
pub use pipeline::{PipelineConfig, RunManifest};
pub use rl::{PolicySettings, PolicyState, WeightVector};
