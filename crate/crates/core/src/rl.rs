//! Learned mixture weights over the generator bundle.
//!
//! Each episode observes summary statistics of the bundle and the current
//! hybrid, draws a weight vector from a Gaussian-perturbed softmax policy,
//! scores the blended hybrid by its negative mean Wasserstein distance to the
//! real data and applies a REINFORCE step against a moving-average baseline.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::Table;
use crate::error::{Error, Result};
use crate::generators::GeneratorBundle;
use crate::matrix::Matrix;
use crate::metrics::distance::{mean, mean_ks, mean_wd};
use crate::nn::{softmax, Activation, Goal, Gradients, Mlp, Optimizer};
use crate::rng::{seeded, Rng};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `[μ_1, σ_1, …, μ_M, σ_M, D_WD, D_KS]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState(pub Vec<f64>);

impl PolicyState {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn divergences(&self) -> (f64, f64) {
        let n = self.0.len();
        (self.0[n - 2], self.0[n - 1])
    }
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|&x| x.is_nan() || x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights must be non-negative and sum to 1, got {w:?}"
            )));
        }
        Ok(Self(w))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn one_hot(m: usize, k: usize) -> Self {
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySettings {
    pub episodes: usize,
    pub policy_hidden: usize,
    pub exploration_std: f64,
    pub policy_lr: f64,
    pub baseline_decay: f64,
}

impl Default for PolicySettings {
    fn default() -> Self {
        Self {
            episodes: 300,
            policy_hidden: 32,
            exploration_std: 0.3,
            policy_lr: 1e-2,
            baseline_decay: 0.9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolicyModel {
    /// `state → hidden (tanh) → M logits`
    pub net: Mlp,
    pub exploration_std: f64,
    pub baseline: f64,
    pub baseline_decay: f64,
    optimizer: Optimizer,
}

#[derive(Debug, Clone)]
pub struct Action {
    pub weights: WeightVector,
    pub logits: Vec<f64>,
    pub perturbed_logits: Vec<f64>,
    pub log_prob: f64,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub state: PolicyState,
    pub perturbed_logits: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
}

/// Log-density of `perturbed` under `N(logits, std² I)`.
pub fn gaussian_log_prob(logits: &[f64], perturbed: &[f64], std: f64) -> f64 {
    let var = std * std;
    perturbed
        .iter()
        .zip(logits)
        .map(|(p, l)| -0.5 * ((p - l) * (p - l) / var + LN_2PI) - std.ln())
        .sum()
}

impl PolicyModel {
    pub fn new(n_generators: usize, settings: &PolicySettings, rng: &mut Rng) -> Result<Self> {
        if settings.exploration_std.is_nan() || settings.exploration_std <= 0.0 {
            return Err(Error::Config("exploration_std must be positive".into()));
        }
        if !(settings.baseline_decay > 0.0 && settings.baseline_decay < 1.0) {
            return Err(Error::Config("baseline_decay must lie in (0, 1)".into()));
        }
        let net = Mlp::new(
            &[2 * n_generators + 2, settings.policy_hidden, n_generators],
            &[Activation::Tanh, Activation::Identity],
            rng,
        )?;
        Ok(Self {
            net,
            exploration_std: settings.exploration_std,
            baseline: 0.0,
            baseline_decay: settings.baseline_decay,
            optimizer: Optimizer::adam(settings.policy_lr)?,
        })
    }

    pub fn n_generators(&self) -> usize {
        self.net.output_size()
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn logits(&self, state: &PolicyState) -> Result<Vec<f64>> {
        self.net.predict(&state.0)
    }

    /// Exploration-free weights `softmax(net(state))`.
    pub fn mean_weights(&self, state: &PolicyState) -> Result<WeightVector> {
        Ok(WeightVector(softmax(&self.logits(state)?)))
    }

    pub fn log_prob(&self, state: &PolicyState, perturbed: &[f64]) -> Result<f64> {
        Ok(gaussian_log_prob(
            &self.logits(state)?,
            perturbed,
            self.exploration_std,
        ))
    }

    /// `∇θ log π(perturbed | state)`
    pub fn log_prob_gradient(&self, state: &PolicyState, perturbed: &[f64]) -> Result<Gradients> {
        let (logits, cache) = self.net.forward(&state.0)?;
        let var = self.exploration_std * self.exploration_std;
        let g: Vec<f64> = perturbed
            .iter()
            .zip(&logits)
            .map(|(p, l)| (p - l) / var)
            .collect();
        Ok(self.net.backward(&cache, &g)?.0)
    }
}

/// Per-generator mean of feature means and mean of feature standard deviations,
/// followed by the mean per-feature WD and KS of `current_hybrid` against `real`.
pub fn build_state(
    bundle: &GeneratorBundle,
    current_hybrid: &Matrix,
    real: &Table,
) -> Result<PolicyState> {
    if current_hybrid.shape() != bundle.shape() {
        return Err(Error::dim(
            bundle.shape().1,
            current_hybrid.cols(),
            "hybrid shape",
        ));
    }
    let mut s = Vec::with_capacity(2 * bundle.len() + 2);
    for m in &bundle.outputs {
        let cols = m.columns();
        let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
        let stds: Vec<f64> = cols
            .iter()
            .zip(&means)
            .map(|(c, mu)| {
                (c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / c.len() as f64).sqrt()
            })
            .collect();
        s.push(mean(&means));
        s.push(mean(&stds));
    }
    s.push(mean_wd(current_hybrid, &real.features)?);
    s.push(mean_ks(current_hybrid, &real.features)?);
    Ok(PolicyState(s))
}

/// Draws `ℓ̃ = ℓ + ε`, `ε ~ N(0, std² I)`, and returns `softmax(ℓ̃)`.
pub fn sample_action(policy: &PolicyModel, state: &PolicyState, rng: &mut Rng) -> Result<Action> {
    let logits = policy.logits(state)?;
    let normal = Normal::new(0.0, policy.exploration_std)
        .map_err(|e| Error::Config(format!("exploration_std: {e}")))?;
    let perturbed: Vec<f64> = logits.iter().map(|l| l + normal.sample(rng)).collect();
    let log_prob = gaussian_log_prob(&logits, &perturbed, policy.exploration_std);
    Ok(Action {
        weights: WeightVector(softmax(&perturbed)),
        logits,
        perturbed_logits: perturbed,
        log_prob,
    })
}

/// Row-aligned convex combination of the bundle.
pub fn combine_hybrid(bundle: &GeneratorBundle, w: &WeightVector) -> Result<Matrix> {
    if w.0.len() != bundle.len() {
        return Err(Error::dim(bundle.len(), w.0.len(), "weight vector"));
    }
    let (n, d) = bundle.shape();
    let mut out = Matrix::zeros(n, d);
    for (m, &wm) in bundle.outputs.iter().zip(&w.0) {
        if wm == 0.0 {
            continue;
        }
        for (o, &x) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *o += wm * x;
        }
    }
    Ok(out)
}

/// `-(1/d) Σ_j WD(hybrid[:, j], real[:, j])`
pub fn compute_reward(hybrid: &Matrix, real: &Table) -> Result<f64> {
    Ok(-mean_wd(hybrid, &real.features)?)
}

/// One REINFORCE ascent step on `(r - b) ∇θ log π`, then the baseline moves
/// toward `r`. A zero advantage leaves the network untouched.
pub fn reinforce_update(policy: &mut PolicyModel, episode: &Episode) -> Result<()> {
    if episode.perturbed_logits.len() != policy.n_generators() {
        return Err(Error::dim(
            policy.n_generators(),
            episode.perturbed_logits.len(),
            "episode action",
        ));
    }
    let advantage = episode.reward - policy.baseline;
    if advantage != 0.0 {
        let mut grads = policy.log_prob_gradient(&episode.state, &episode.perturbed_logits)?;
        grads.scale(advantage);
        if !grads.is_finite() {
            return Err(Error::Divergence("non-finite policy gradient".into()));
        }
        policy
            .optimizer
            .step(&mut policy.net, &grads, Goal::Maximize)?;
    }
    policy.baseline =
        policy.baseline_decay * policy.baseline + (1.0 - policy.baseline_decay) * episode.reward;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainedWeights {
    pub weights: WeightVector,
    pub reward_trace: Vec<f64>,
    pub policy: PolicyModel,
}

/// Bandit-style training: each episode is a single step from the state of the
/// most recent hybrid. The baseline starts at the reward of the uniform blend.
pub fn train_weights(
    bundle: &GeneratorBundle,
    real: &Table,
    settings: &PolicySettings,
    seed: u64,
) -> Result<TrainedWeights> {
    if settings.episodes == 0 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut policy = PolicyModel::new(bundle.len(), settings, &mut rng)?;
    let mut hybrid = combine_hybrid(bundle, &WeightVector::uniform(bundle.len()))?;
    policy.baseline = compute_reward(&hybrid, real)?;

    let mut reward_trace = Vec::with_capacity(settings.episodes);
    for _ in 0..settings.episodes {
        let state = build_state(bundle, &hybrid, real)?;
        let action = sample_action(&policy, &state, &mut rng)?;
        hybrid = combine_hybrid(bundle, &action.weights)?;
        let reward = compute_reward(&hybrid, real)?;
        reinforce_update(
            &mut policy,
            &Episode {
                state,
                perturbed_logits: action.perturbed_logits,
                log_prob: action.log_prob,
                reward,
            },
        )?;
        reward_trace.push(reward);
    }
    let state = build_state(bundle, &hybrid, real)?;
    Ok(TrainedWeights {
        weights: policy.mean_weights(&state)?,
        reward_trace,
        policy,
    })
}
