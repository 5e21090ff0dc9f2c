//! Train-on-synthetic, test-on-real utility: a built-in classifier plus
//! accuracy and support-weighted F1.

use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::privacy::squared_distance;
use crate::nn::{log_sum_exp, softmax, Activation, Dense, Goal, Mlp, Optimizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Logistic {
        epochs: usize,
        learning_rate: f64,
        l2: f64,
    },
    Knn {
        k: usize,
    },
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig::Logistic {
            epochs: 500,
            learning_rate: 0.1,
            l2: 1e-4,
        }
    }
}

/// Multinomial logistic regression: a single linear layer with a softmax head,
/// trained by full-batch gradient descent on mean cross-entropy plus an L2 term.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub net: Mlp,
    /// Training objective after each epoch.
    pub loss_trace: Vec<f64>,
}

impl LogisticModel {
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        n_classes: usize,
        epochs: usize,
        learning_rate: f64,
        l2: f64,
    ) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InvalidInput("empty training set".into()));
        }
        let mut net = Mlp::from_layers(vec![Dense {
            weights: Matrix::zeros(n_classes, x.cols()),
            bias: vec![0.0; n_classes],
            activation: Activation::Identity,
        }])?;
        let mut opt = Optimizer::sgd(learning_rate)?;
        let mut loss_trace = Vec::with_capacity(epochs);
        let n = x.rows() as f64;
        for _ in 0..epochs {
            let mut grads = crate::nn::Gradients::zeros_like(&net);
            let mut loss = 0.0;
            for (row, &y) in x.row_iter().zip(labels) {
                let (logits, cache) = net.forward(row)?;
                loss += log_sum_exp(&logits) - logits[y];
                let mut g = softmax(&logits);
                g[y] -= 1.0;
                let (gr, _) = net.backward(&cache, &g)?;
                grads.accumulate(&gr);
            }
            grads.scale(1.0 / n);
            let w = &net.layers[0].weights;
            loss = loss / n + 0.5 * l2 * w.as_slice().iter().map(|v| v * v).sum::<f64>();
            for (g, v) in grads.layers[0]
                .weights
                .as_mut_slice()
                .iter_mut()
                .zip(w.as_slice())
            {
                *g += l2 * v;
            }
            loss_trace.push(loss);
            opt.step(&mut net, &grads, Goal::Minimize)?;
        }
        Ok(Self { net, loss_trace })
    }

    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        let logits = self.net.predict(row)?;
        Ok(argmax(&logits))
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate() {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// k-nearest-neighbor majority vote; vote ties go to the class of the nearest
/// tied member.
pub fn knn_predict(
    train: &Matrix,
    labels: &[usize],
    n_classes: usize,
    k: usize,
    row: &[f64],
) -> usize {
    let mut dist: Vec<(f64, usize)> = train
        .row_iter()
        .enumerate()
        .map(|(i, r)| (squared_distance(r, row), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbors = &dist[..k.min(dist.len())];
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in neighbors {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().unwrap_or(&0);
    neighbors
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|&c| votes[c] == top)
        .unwrap_or(0)
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    let correct = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    100.0 * correct as f64 / truth.len() as f64
}

/// Per-class F1 averaged with weights proportional to true-class support, in percent.
pub fn weighted_f1(truth: &[usize], predicted: &[usize], n_classes: usize) -> f64 {
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let total = truth.len() as f64;
    let mut score = 0.0;
    for c in 0..n_classes {
        let support = (tp[c] + fn_[c]) as f64;
        let denom = (2 * tp[c] + fp[c] + fn_[c]) as f64;
        let f1 = if denom > 0.0 {
            2.0 * tp[c] as f64 / denom
        } else {
            0.0
        };
        score += f1 * support / total;
    }
    100.0 * score
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utility {
    pub accuracy: f64,
    pub f1: f64,
}

/// Trains on `synth_train`, scores on `real_test`.
pub fn utility_eval(
    synth_train: &Table,
    real_test: &Table,
    n_classes: usize,
    config: &ClassifierConfig,
) -> Result<Utility> {
    if real_test.n_rows() == 0 {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    if synth_train.n_rows() == 0 {
        return Err(Error::InvalidInput("empty synthetic training set".into()));
    }
    if synth_train.n_features() != real_test.n_features() {
        return Err(Error::Schema(format!(
            "synthetic data has {} features, test data {}",
            synth_train.n_features(),
            real_test.n_features()
        )));
    }
    let predicted: Vec<usize> = match *config {
        ClassifierConfig::Logistic {
            epochs,
            learning_rate,
            l2,
        } => {
            let model = LogisticModel::fit(
                &synth_train.features,
                &synth_train.labels,
                n_classes,
                epochs,
                learning_rate,
                l2,
            )?;
            real_test
                .features
                .row_iter()
                .map(|r| model.predict(r))
                .collect::<Result<_>>()?
        }
        ClassifierConfig::Knn { k } => real_test
            .features
            .row_iter()
            .map(|r| {
                knn_predict(
                    &synth_train.features,
                    &synth_train.labels,
                    n_classes,
                    k.max(1),
                    r,
                )
            })
            .collect(),
    };
    Ok(Utility {
        accuracy: accuracy(&real_test.labels, &predicted),
        f1: weighted_f1(&real_test.labels, &predicted, n_classes),
    })
}
