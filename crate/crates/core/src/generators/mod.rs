//! The five per-row synthetic generators and the aligned bundle they form.
//!
//! Every generator returns a matrix with the same shape as the training
//! features; row `i` is derived from, or conditioned on the class of,
//! training row `i`.

pub mod cvae;
pub mod gmm;
pub mod interpolation;
pub mod noise;
pub mod smote;

use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive, stage};

pub use cvae::{sample_cvae, train_cvae, CvaeModel, CvaeSettings};
pub use gmm::{fit_gmm, sample_gmm, GmmModel, GmmSettings};
pub use interpolation::interpolate_same_class;
pub use noise::noise_inject;
pub use smote::smote_generate;

pub const GENERATOR_NAMES: [&str; 5] = ["noise", "interpolation", "gmm", "cvae", "smote"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub sigma: f64,
    pub gmm_k: usize,
    pub gmm_max_iter: usize,
    pub gmm_tol: f64,
    pub latent_dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub cvae_learning_rate: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let gmm = GmmSettings::default();
        let cvae = CvaeSettings::default();
        Self {
            sigma: 0.05,
            gmm_k: gmm.components,
            gmm_max_iter: gmm.max_iter,
            gmm_tol: gmm.tol,
            latent_dim: cvae.latent_dim,
            hidden: cvae.hidden,
            epochs: cvae.epochs,
            batch: cvae.batch,
            cvae_learning_rate: cvae.learning_rate,
        }
    }
}

impl GeneratorConfig {
    pub fn gmm(&self) -> GmmSettings {
        GmmSettings {
            components: self.gmm_k,
            max_iter: self.gmm_max_iter,
            tol: self.gmm_tol,
        }
    }

    pub fn cvae(&self) -> CvaeSettings {
        CvaeSettings {
            latent_dim: self.latent_dim,
            hidden: self.hidden,
            epochs: self.epochs,
            batch: self.batch,
            learning_rate: self.cvae_learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBundle {
    pub outputs: Vec<Matrix>,
    pub generator_names: Vec<String>,
}

impl GeneratorBundle {
    pub fn new(outputs: Vec<Matrix>, generator_names: Vec<String>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidInput("empty generator bundle".into()));
        }
        if outputs.len() != generator_names.len() {
            return Err(Error::dim(
                outputs.len(),
                generator_names.len(),
                "generator names",
            ));
        }
        let shape = outputs[0].shape();
        if let Some(bad) = outputs.iter().find(|m| m.shape() != shape) {
            return Err(Error::dim(
                shape.0 * shape.1,
                bad.rows() * bad.cols(),
                "generator output shape",
            ));
        }
        Ok(Self {
            outputs,
            generator_names,
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.outputs[0].shape()
    }
}

/// Runs all five generators, each on its own stream derived from `seed`.
pub fn generate_bundle(
    train: &Table,
    n_classes: usize,
    config: &GeneratorConfig,
    seed: u64,
) -> Result<GeneratorBundle> {
    let (cvae, rest) = rayon::join(
        || -> Result<Matrix> {
            let model = train_cvae(train, n_classes, &config.cvae(), derive(seed, stage::CVAE))?;
            sample_cvae(&model, &train.labels, derive(seed, stage::CVAE) ^ 1)
        },
        || -> Result<(Matrix, Matrix, Matrix, Matrix)> {
            let noise = noise_inject(train, config.sigma, derive(seed, stage::NOISE))?;
            let interp =
                interpolate_same_class(train, n_classes, derive(seed, stage::INTERPOLATION));
            let model = fit_gmm(train, n_classes, config.gmm(), derive(seed, stage::GMM))?;
            let gmm = sample_gmm(&model, &train.labels, derive(seed, stage::GMM) ^ 1)?;
            let smote = smote_generate(train, n_classes, derive(seed, stage::SMOTE));
            Ok((noise, interp, gmm, smote))
        },
    );
    let cvae = cvae?;
    let (noise, interp, gmm, smote) = rest?;
    GeneratorBundle::new(
        vec![noise, interp, gmm, cvae, smote],
        GENERATOR_NAMES.iter().map(|s| s.to_string()).collect(),
    )
}
