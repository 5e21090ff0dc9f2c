//! Conditional variational autoencoder trained on the evidence lower bound
//! with the reparameterization `z = μ + σ ⊙ ε`.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{one_hot, Table};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{Activation, Goal, Gradients, Mlp, Optimizer};
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvaeSettings {
    pub latent_dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for CvaeSettings {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            hidden: 64,
            epochs: 200,
            batch: 32,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvaeModel {
    /// `[x, one_hot(y)] → hidden → [μ, log σ²]`
    pub encoder: Mlp,
    /// `[z, one_hot(y)] → hidden → x̂`
    pub decoder: Mlp,
    pub latent_dim: usize,
    pub n_classes: usize,
    /// Mean ELBO per epoch.
    pub elbo_trace: Vec<f64>,
}

/// Loss pieces for one example at a fixed reparameterization draw.
#[derive(Debug, Clone)]
pub struct ElboTerms {
    pub reconstruction: f64,
    pub kl: f64,
    pub encoder_grad: Gradients,
    pub decoder_grad: Gradients,
}

impl ElboTerms {
    /// Negative ELBO.
    pub fn loss(&self) -> f64 {
        self.reconstruction + self.kl
    }
}

/// `KL(N(μ, diag exp(logvar)) ‖ N(0, I))`
pub fn kl_standard_normal(mu: &[f64], logvar: &[f64]) -> f64 {
    -0.5 * mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| 1.0 + lv - m * m - lv.exp())
        .sum::<f64>()
}

impl CvaeModel {
    pub fn new(d: usize, n_classes: usize, settings: &CvaeSettings, rng: &mut Rng) -> Result<Self> {
        let latent = settings.latent_dim;
        let encoder = Mlp::new(
            &[d + n_classes, settings.hidden, 2 * latent],
            &[Activation::Tanh, Activation::Identity],
            rng,
        )?;
        let decoder = Mlp::new(
            &[latent + n_classes, settings.hidden, d],
            &[Activation::Tanh, Activation::Identity],
            rng,
        )?;
        Ok(Self {
            encoder,
            decoder,
            latent_dim: latent,
            n_classes,
            elbo_trace: Vec::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.decoder.output_size()
    }

    /// Negative ELBO of `x` with class encoding `y` for the given noise draw,
    /// with gradients for both networks. Reconstruction is the squared error
    /// summed over features.
    pub fn elbo_terms(&self, x: &[f64], y: &[f64], eps: &[f64]) -> Result<ElboTerms> {
        let latent = self.latent_dim;
        let enc_in: Vec<f64> = x.iter().chain(y).copied().collect();
        let (stats, enc_cache) = self.encoder.forward(&enc_in)?;
        let (mu, logvar) = stats.split_at(latent);
        let std: Vec<f64> = logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
        let z: Vec<f64> = mu
            .iter()
            .zip(&std)
            .zip(eps)
            .map(|((m, s), e)| m + s * e)
            .collect();

        let dec_in: Vec<f64> = z.iter().chain(y).copied().collect();
        let (x_hat, dec_cache) = self.decoder.forward(&dec_in)?;
        let reconstruction: f64 = x_hat.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        let kl = kl_standard_normal(mu, logvar);

        let d_xhat: Vec<f64> = x_hat.iter().zip(x).map(|(a, b)| 2.0 * (a - b)).collect();
        let (decoder_grad, d_dec_in) = self.decoder.backward(&dec_cache, &d_xhat)?;
        let dz = &d_dec_in[..latent];
        let mut d_stats = vec![0.0; 2 * latent];
        for k in 0..latent {
            d_stats[k] = dz[k] + mu[k];
            d_stats[latent + k] = dz[k] * eps[k] * 0.5 * std[k] + 0.5 * (logvar[k].exp() - 1.0);
        }
        let (encoder_grad, _) = self.encoder.backward(&enc_cache, &d_stats)?;
        Ok(ElboTerms {
            reconstruction,
            kl,
            encoder_grad,
            decoder_grad,
        })
    }

    /// Encoder output `(μ, log σ²)`.
    pub fn encode(&self, x: &[f64], label: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut input = x.to_vec();
        input.extend(class_code(label, self.n_classes));
        let mut stats = self.encoder.predict(&input)?;
        let logvar = stats.split_off(self.latent_dim);
        Ok((stats, logvar))
    }

    pub fn decode(&self, z: &[f64], label: usize) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(Error::dim(self.latent_dim, z.len(), "latent vector"));
        }
        let mut input = z.to_vec();
        input.extend(class_code(label, self.n_classes));
        self.decoder.predict(&input)
    }
}

fn class_code(label: usize, n_classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_classes];
    v[label] = 1.0;
    v
}

fn standard_normal_vec(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Minibatch Adam on the negative ELBO. A non-finite loss aborts training.
pub fn train_cvae(
    train: &Table,
    n_classes: usize,
    settings: &CvaeSettings,
    seed: u64,
) -> Result<CvaeModel> {
    if settings.latent_dim == 0
        || settings.hidden == 0
        || settings.epochs == 0
        || settings.batch == 0
    {
        return Err(Error::Config(
            "CVAE latent_dim, hidden, epochs and batch must be positive".into(),
        ));
    }
    let mut rng = seeded(seed);
    let mut model = CvaeModel::new(train.n_features(), n_classes, settings, &mut rng)?;
    let codes = one_hot(&train.labels, n_classes);
    let mut enc_opt = Optimizer::adam(settings.learning_rate)?;
    let mut dec_opt = Optimizer::adam(settings.learning_rate)?;
    let mut order: Vec<usize> = (0..train.n_rows()).collect();

    for epoch in 0..settings.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(settings.batch) {
            let mut enc_grad = Gradients::zeros_like(&model.encoder);
            let mut dec_grad = Gradients::zeros_like(&model.decoder);
            for &i in batch {
                let eps = standard_normal_vec(model.latent_dim, &mut rng);
                let terms = model.elbo_terms(train.features.row(i), codes.row(i), &eps)?;
                let loss = terms.loss();
                if !loss.is_finite() {
                    return Err(Error::Divergence(format!(
                        "CVAE loss became non-finite in epoch {epoch}"
                    )));
                }
                epoch_loss += loss;
                enc_grad.accumulate(&terms.encoder_grad);
                dec_grad.accumulate(&terms.decoder_grad);
            }
            let scale = 1.0 / batch.len() as f64;
            enc_grad.scale(scale);
            dec_grad.scale(scale);
            enc_opt.step(&mut model.encoder, &enc_grad, Goal::Minimize)?;
            dec_opt.step(&mut model.decoder, &dec_grad, Goal::Minimize)?;
        }
        model
            .elbo_trace
            .push(-epoch_loss / train.n_rows().max(1) as f64);
    }
    Ok(model)
}

/// Row `i` decodes a fresh `z ~ N(0, I)` under class `labels[i]`.
pub fn sample_cvae(model: &CvaeModel, labels: &[usize], seed: u64) -> Result<Matrix> {
    let mut rng = seeded(seed);
    let mut out = Matrix::zeros(labels.len(), model.n_features());
    for (i, &label) in labels.iter().enumerate() {
        let z = standard_normal_vec(model.latent_dim, &mut rng);
        let x = model.decode(&z, label)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(
                "CVAE decoder produced a non-finite value".into(),
            ));
        }
        out.row_mut(i).copy_from_slice(&x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{max_relative_error, numeric_gradient};
    use rand::Rng as _;

    #[test]
    fn kl_of_standard_normal_is_zero() {
        assert_eq!(kl_standard_normal(&[0.0; 4], &[0.0; 4]), 0.0);
        assert!(kl_standard_normal(&[0.5], &[0.2]) > 0.0);
    }

    fn tiny_model(seed: u64) -> CvaeModel {
        let settings = CvaeSettings {
            latent_dim: 2,
            hidden: 5,
            ..Default::default()
        };
        CvaeModel::new(3, 2, &settings, &mut seeded(seed)).unwrap()
    }

    #[test]
    fn elbo_gradients_match_finite_differences() {
        for seed in 0..5 {
            let mut model = tiny_model(seed);
            let mut rng = seeded(100 + seed);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let y = [0.0, 1.0];
            let eps: Vec<f64> = standard_normal_vec(2, &mut rng);
            let terms = model.elbo_terms(&x, &y, &eps).unwrap();

            let enc0 = model.encoder.flat_params();
            let num_enc = numeric_gradient(&enc0, 1e-5, |p| {
                model.encoder.set_flat_params(p).unwrap();
                model.elbo_terms(&x, &y, &eps).unwrap().loss()
            });
            model.encoder.set_flat_params(&enc0).unwrap();
            let dec0 = model.decoder.flat_params();
            let num_dec = numeric_gradient(&dec0, 1e-5, |p| {
                model.decoder.set_flat_params(p).unwrap();
                model.elbo_terms(&x, &y, &eps).unwrap().loss()
            });
            model.decoder.set_flat_params(&dec0).unwrap();

            let e1 = max_relative_error(&terms.encoder_grad.flatten(), &num_enc, 1e-6);
            let e2 = max_relative_error(&terms.decoder_grad.flatten(), &num_dec, 1e-6);
            assert!(e1 < 1e-4 && e2 < 1e-4, "seed {seed}: {e1} {e2}");
        }
    }

    fn toy_table() -> Table {
        let mut rng = seeded(2);
        let rows: Vec<[f64; 3]> = (0..120)
            .map(|i| {
                let base = if i % 2 == 0 { 0.2 } else { 0.7 };
                [
                    base + 0.1 * rng.random::<f64>(),
                    base + 0.1 * rng.random::<f64>(),
                    0.5 * rng.random::<f64>(),
                ]
            })
            .collect();
        let labels = (0..120).map(|i| i % 2).collect();
        Table::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
    }

    #[test]
    fn training_improves_elbo() {
        let t = toy_table();
        let settings = CvaeSettings {
            latent_dim: 2,
            hidden: 16,
            epochs: 40,
            batch: 16,
            learning_rate: 5e-3,
        };
        let model = train_cvae(&t, 2, &settings, 3).unwrap();
        assert_eq!(model.elbo_trace.len(), 40);
        assert!(model.elbo_trace.last().unwrap() > &model.elbo_trace[0]);
    }

    #[test]
    fn sampling_shape_and_determinism() {
        let t = toy_table();
        let settings = CvaeSettings {
            latent_dim: 2,
            hidden: 8,
            epochs: 2,
            batch: 32,
            learning_rate: 1e-3,
        };
        let model = train_cvae(&t, 2, &settings, 3).unwrap();
        let out = sample_cvae(&model, &t.labels, 9).unwrap();
        assert_eq!(out.shape(), (120, 3));
        assert!(out.is_finite());
        assert_eq!(out, sample_cvae(&model, &t.labels, 9).unwrap());
        assert_eq!(
            model.decode(&[0.0, 0.0], 1).unwrap(),
            model.decode(&[0.0, 0.0], 1).unwrap()
        );
        assert!(train_cvae(
            &t,
            2,
            &CvaeSettings {
                batch: 0,
                ..settings
            },
            1
        )
        .is_err());
    }
}
