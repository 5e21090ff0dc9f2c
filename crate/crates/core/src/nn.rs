//! Small dense feed-forward networks with hand-written backpropagation.
//!
//! Shared by the conditional autoencoder, the weighting policy and the
//! downstream logistic classifier.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(x))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / s).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `out × in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Intermediate values of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.fan_out(), l.fan_in()),
                    bias: vec![0.0; l.fan_out()],
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a
                .weights
                .as_mut_slice()
                .iter_mut()
                .zip(b.weights.as_slice())
            {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.as_mut_slice().iter_mut().for_each(|x| *x *= s);
            l.bias.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// Flattened in the same order as [`Mlp::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|x| x.is_finite()))
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases. `activations[k]` applies to layer `k`.
    pub fn new(layer_sizes: &[usize], activations: &[Activation], rng: &mut Rng) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidInput(
                "a network needs at least an input and an output size".into(),
            ));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::dim(
                layer_sizes.len() - 1,
                activations.len(),
                "activation count",
            ));
        }
        let layers = layer_sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..=limit))
                    .collect();
                Dense {
                    weights: Matrix::from_vec(fan_out, fan_in, data).expect("sized buffer"),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        for w in layers.windows(2) {
            if w[0].fan_out() != w[1].fan_in() {
                return Err(Error::dim(w[0].fan_out(), w[1].fan_in(), "layer chain"));
            }
        }
        for l in &layers {
            if l.bias.len() != l.fan_out() {
                return Err(Error::dim(l.fan_out(), l.bias.len(), "bias length"));
            }
        }
        Ok(Self { layers })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_size()];
        sizes.extend(self.layers.iter().map(Dense::fan_out));
        sizes
    }

    pub fn input_size(&self) -> usize {
        self.layers.first().map_or(0, Dense::fan_in)
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, Dense::fan_out)
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_size() {
            return Err(Error::dim(self.input_size(), input.len(), "network input"));
        }
        let n = self.layers.len();
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(n),
            pre_activations: Vec::with_capacity(n),
            outputs: Vec::with_capacity(n),
        };
        let mut x = input.to_vec();
        for layer in &self.layers {
            let mut z = layer.weights.mul_vec(&x);
            for (zi, b) in z.iter_mut().zip(&layer.bias) {
                *zi += b;
            }
            let a: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
            cache.inputs.push(std::mem::replace(&mut x, a.clone()));
            cache.pre_activations.push(z);
            cache.outputs.push(a);
        }
        Ok((x, cache))
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Backpropagates `output_gradient` (dL/d output) through the cached pass.
    /// Returns parameter gradients and dL/d input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_gradient: &[f64],
    ) -> Result<(Gradients, Vec<f64>)> {
        if cache.inputs.len() != self.layers.len()
            || cache
                .inputs
                .iter()
                .zip(&self.layers)
                .any(|(x, l)| x.len() != l.fan_in())
        {
            return Err(Error::InvalidInput(
                "forward cache does not match this network".into(),
            ));
        }
        if output_gradient.len() != self.output_size() {
            return Err(Error::dim(
                self.output_size(),
                output_gradient.len(),
                "output gradient",
            ));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = output_gradient.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let delta: Vec<f64> = upstream
                .iter()
                .zip(&cache.pre_activations[k])
                .zip(&cache.outputs[k])
                .map(|((g, &z), &a)| g * layer.activation.derivative(z, a))
                .collect();
            let x = &cache.inputs[k];
            let mut dw = Matrix::zeros(layer.fan_out(), layer.fan_in());
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (w, &xi) in dw.row_mut(r).iter_mut().zip(x) {
                    *w = d * xi;
                }
            }
            upstream = layer.weights.tr_mul_vec(&delta);
            grads.push(LayerGradient {
                weights: dw,
                bias: delta,
            });
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, upstream))
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::dim(self.n_params(), params.len(), "parameter count"));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights
                .as_mut_slice()
                .copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|x| x.is_finite()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SavedMlp {
            layer_sizes: self.layer_sizes(),
            activations: self.layers.iter().map(|l| l.activation).collect(),
            params: self.flat_params(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let saved: SavedMlp = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidInput(format!("bad network JSON: {e}")))?;
        if saved.layer_sizes.len() != saved.activations.len() + 1 {
            return Err(Error::dim(
                saved.layer_sizes.len() - 1,
                saved.activations.len(),
                "activation count",
            ));
        }
        let layers = saved
            .layer_sizes
            .windows(2)
            .zip(&saved.activations)
            .map(|(w, &activation)| Dense {
                weights: Matrix::zeros(w[1], w[0]),
                bias: vec![0.0; w[1]],
                activation,
            })
            .collect();
        let mut net = Mlp { layers };
        net.set_flat_params(&saved.params)?;
        Ok(net)
    }
}

#[derive(Serialize, Deserialize)]
struct SavedMlp {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Method {
    Sgd,
    Momentum {
        beta: f64,
    },
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Default for Method {
    fn default() -> Self {
        Method::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub learning_rate: f64,
    pub method: Method,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub fn new(learning_rate: f64, method: Method) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        Ok(Self {
            learning_rate,
            method,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            steps: 0,
        })
    }

    pub fn adam(learning_rate: f64) -> Result<Self> {
        Self::new(learning_rate, Method::default())
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(learning_rate, Method::Sgd)
    }

    /// Applies one update. Non-finite gradients are rejected and leave `net` untouched.
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients, goal: Goal) -> Result<()> {
        let g = grads.flatten();
        self.step_flat(net, &g, goal)
    }

    pub fn step_flat(&mut self, net: &mut Mlp, g: &[f64], goal: Goal) -> Result<()> {
        if g.len() != net.n_params() {
            return Err(Error::dim(net.n_params(), g.len(), "gradient length"));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence("non-finite gradient".into()));
        }
        let mut theta = net.flat_params();
        let sign = match goal {
            Goal::Minimize => -1.0,
            Goal::Maximize => 1.0,
        };
        let lr = self.learning_rate;
        match self.method {
            Method::Sgd => {
                for (t, gi) in theta.iter_mut().zip(g) {
                    *t += sign * lr * gi;
                }
            }
            Method::Momentum { beta } => {
                if self.first_moment.len() != g.len() {
                    self.first_moment = vec![0.0; g.len()];
                }
                for ((t, gi), v) in theta.iter_mut().zip(g).zip(&mut self.first_moment) {
                    *v = beta * *v + gi;
                    *t += sign * lr * *v;
                }
            }
            Method::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                if self.first_moment.len() != g.len() {
                    self.first_moment = vec![0.0; g.len()];
                    self.second_moment = vec![0.0; g.len()];
                }
                let step = (self.steps + 1) as i32;
                let c1 = 1.0 - beta1.powi(step);
                let c2 = 1.0 - beta2.powi(step);
                for (((t, &gi), m), v) in theta
                    .iter_mut()
                    .zip(g)
                    .zip(&mut self.first_moment)
                    .zip(&mut self.second_moment)
                {
                    *m = beta1 * *m + (1.0 - beta1) * gi;
                    *v = beta2 * *v + (1.0 - beta2) * gi * gi;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *t += sign * lr * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
        self.steps += 1;
        net.set_flat_params(&theta)
    }
}

/// Central finite-difference gradient of `f` at `params`.
pub fn numeric_gradient(params: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..params.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - n| / max(|a|, |n|, floor)` over paired entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
