//! Feedforward actor-critic network: a shared tanh trunk with a
//! diagonal-Gaussian policy head and a scalar value head.
//!
//! Gradients are computed by hand-written reverse mode and are verifiable
//! against central finite differences. All arithmetic is f64. Shape
//! mismatches are programmer errors and panic via `assert!`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const INIT_LOG_STD: f64 = -0.7;

/// Network shape. The trunk activation is tanh; heads are affine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub action_dim: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { input_dim: 16, hidden_layers: vec![64, 64], action_dim: 2 }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.action_dim == 0 {
            return Err(Error::Config("network dims must be positive".into()));
        }
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    /// Total number of scalar parameters for this shape.
    pub fn param_count(&self) -> usize {
        let mut count = 0;
        let mut prev = self.input_dim;
        for &h in &self.hidden_layers {
            count += h * prev + h;
            prev = h;
        }
        count += self.action_dim * prev + self.action_dim; // mean head
        count += prev + 1; // value head
        count += self.action_dim; // log_std
        count
    }
}

/// One affine layer with row-major weights (out_dim x in_dim).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    fn apply(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.in_dim, "dense layer input width mismatch");
        let mut out = self.bias.clone();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out[o] += acc;
        }
        out
    }
}

/// Every learnable parameter: trunk, both heads, and the state-independent
/// log standard deviations. Also reused as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub trunk: Vec<Dense>,
    pub mean_head: Dense,
    pub value_head: Dense,
    pub log_std: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(config: &NetConfig) -> Self {
        let mut trunk = Vec::with_capacity(config.hidden_layers.len());
        let mut prev = config.input_dim;
        for &h in &config.hidden_layers {
            trunk.push(Dense::zeros(prev, h));
            prev = h;
        }
        Self {
            trunk,
            mean_head: Dense::zeros(prev, config.action_dim),
            value_head: Dense::zeros(prev, 1),
            log_std: vec![0.0; config.action_dim],
        }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn param_count(&self) -> usize {
        self.field_slices().iter().map(|s| s.len()).sum()
    }

    fn field_slices(&self) -> Vec<&[f64]> {
        let mut fields: Vec<&[f64]> = Vec::new();
        for layer in &self.trunk {
            fields.push(&layer.weights);
            fields.push(&layer.bias);
        }
        fields.push(&self.mean_head.weights);
        fields.push(&self.mean_head.bias);
        fields.push(&self.value_head.weights);
        fields.push(&self.value_head.bias);
        fields.push(&self.log_std);
        fields
    }

    fn field_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut fields: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.trunk {
            fields.push(&mut layer.weights);
            fields.push(&mut layer.bias);
        }
        fields.push(&mut self.mean_head.weights);
        fields.push(&mut self.mean_head.bias);
        fields.push(&mut self.value_head.weights);
        fields.push(&mut self.value_head.bias);
        fields.push(&mut self.log_std);
        fields
    }

    /// Flatten all parameters in a stable order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for field in self.field_slices() {
            flat.extend_from_slice(field);
        }
        flat
    }

    /// Rebuild parameters of `config`'s shape from a flat vector.
    pub fn from_flat(config: &NetConfig, flat: &[f64]) -> Result<Self> {
        if flat.len() != config.param_count() {
            return Err(Error::Contract(format!(
                "flat parameter vector has {} entries, shape needs {}",
                flat.len(),
                config.param_count()
            )));
        }
        let mut params = Self::zeros(config);
        let mut offset = 0;
        for field in params.field_slices_mut() {
            field.copy_from_slice(&flat[offset..offset + field.len()]);
            offset += field.len();
        }
        Ok(params)
    }

    /// self += scale * other, fieldwise.
    pub fn axpy(&mut self, scale: f64, other: &Self) {
        let others = other.field_slices();
        for (mine, theirs) in self.field_slices_mut().into_iter().zip(others) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += scale * t;
            }
        }
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for field in self.field_slices_mut() {
            for v in field {
                *v *= factor;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.field_slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn clamp_log_std(&mut self) {
        for s in &mut self.log_std {
            *s = s.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }
}

/// Fresh parameters: weights uniform in +-1/sqrt(fan_in), biases zero,
/// log_std at [`INIT_LOG_STD`]. Deterministic for a given seed.
pub fn init_params(config: &NetConfig, seed: u64) -> MlpParams {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut params = MlpParams::zeros(config);
    let mut layers: Vec<&mut Dense> = params.trunk.iter_mut().collect();
    layers.push(&mut params.mean_head);
    layers.push(&mut params.value_head);
    for layer in layers {
        let bound = 1.0 / (layer.in_dim as f64).sqrt();
        for w in &mut layer.weights {
            *w = rng.gen_range(-bound..bound);
        }
    }
    for s in &mut params.log_std {
        *s = INIT_LOG_STD;
    }
    params
}

/// Policy mean (pre-squash), standard deviation, and state value.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub value: f64,
}

/// Per-layer activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    activations: Vec<Vec<f64>>,
}

pub fn forward(params: &MlpParams, observation: &[f64]) -> PolicyOutput {
    forward_cached(params, observation).0
}

pub fn forward_cached(params: &MlpParams, observation: &[f64]) -> (PolicyOutput, ForwardCache) {
    let mut activations = Vec::with_capacity(params.trunk.len());
    let mut current = observation.to_vec();
    for layer in &params.trunk {
        let mut z = layer.apply(&current);
        for v in &mut z {
            *v = v.tanh();
        }
        activations.push(z.clone());
        current = z;
    }
    let mean = params.mean_head.apply(&current);
    let value = params.value_head.apply(&current)[0];
    let std = params.log_std.iter().map(|s| s.exp()).collect();
    (
        PolicyOutput { mean, std, value },
        ForwardCache { input: observation.to_vec(), activations },
    )
}

/// Accumulate into `grads` the gradient of a scalar loss whose derivatives
/// with respect to the head outputs are `d_mean` and `d_value`.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    d_mean: &[f64],
    d_value: f64,
    grads: &mut MlpParams,
) {
    let last: &[f64] = cache.activations.last().map_or(&cache.input, |v| v.as_slice());
    let width = last.len();
    let mut d_hidden = vec![0.0; width];

    assert_eq!(d_mean.len(), params.mean_head.out_dim);
    for o in 0..params.mean_head.out_dim {
        let g = d_mean[o];
        let row = &params.mean_head.weights[o * width..(o + 1) * width];
        let grad_row = &mut grads.mean_head.weights[o * width..(o + 1) * width];
        for i in 0..width {
            grad_row[i] += g * last[i];
            d_hidden[i] += row[i] * g;
        }
        grads.mean_head.bias[o] += g;
    }

    for i in 0..width {
        grads.value_head.weights[i] += d_value * last[i];
        d_hidden[i] += params.value_head.weights[i] * d_value;
    }
    grads.value_head.bias[0] += d_value;

    for (l, layer) in params.trunk.iter().enumerate().rev() {
        let act = &cache.activations[l];
        let prev: &[f64] = if l == 0 { &cache.input } else { &cache.activations[l - 1] };
        let mut d_prev = vec![0.0; layer.in_dim];
        for o in 0..layer.out_dim {
            let dz = d_hidden[o] * (1.0 - act[o] * act[o]);
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let grad_row = &mut grads.trunk[l].weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for i in 0..layer.in_dim {
                grad_row[i] += dz * prev[i];
                d_prev[i] += row[i] * dz;
            }
            grads.trunk[l].bias[o] += dz;
        }
        d_hidden = d_prev;
    }
}

/// Derivatives of one sample's loss with respect to the network outputs.
pub struct OutputGrad<'a> {
    pub observation: &'a [f64],
    pub d_mean: Vec<f64>,
    pub d_value: f64,
    pub d_log_std: Vec<f64>,
}

/// Exact minibatch-averaged parameter gradient assembled from per-sample
/// output derivatives.
pub fn accumulate_gradient<'a>(
    params: &MlpParams,
    config: &NetConfig,
    terms: impl IntoIterator<Item = OutputGrad<'a>>,
) -> MlpParams {
    let mut grads = MlpParams::zeros(config);
    let mut count = 0usize;
    for term in terms {
        let (_, cache) = forward_cached(params, term.observation);
        backward(params, &cache, &term.d_mean, term.d_value, &mut grads);
        for (g, d) in grads.log_std.iter_mut().zip(&term.d_log_std) {
            *g += d;
        }
        count += 1;
    }
    assert!(count > 0, "gradient of an empty minibatch");
    grads.scale_in_place(1.0 / count as f64);
    grads
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; rejects u1 = 0 so the log stays finite.
    let mut u1: f64 = rng.gen();
    while u1 == 0.0 {
        u1 = rng.gen();
    }
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// A Gaussian draw with its tanh-squashed image and corrected log-density.
#[derive(Debug, Clone)]
pub struct ActionSample {
    /// Raw Gaussian draw (the quantity whose log-density PPO tracks).
    pub presquash: Vec<f64>,
    /// tanh of the draw, in (-1, 1) per component.
    pub squashed: Vec<f64>,
    pub log_prob: f64,
}

pub fn sample_action<R: Rng>(output: &PolicyOutput, rng: &mut R) -> ActionSample {
    let presquash: Vec<f64> = output
        .mean
        .iter()
        .zip(&output.std)
        .map(|(m, s)| m + s * standard_normal(rng))
        .collect();
    let squashed = presquash.iter().map(|u| u.tanh()).collect();
    let log_prob = log_prob_presquash(output, &presquash);
    ActionSample { presquash, squashed, log_prob }
}

/// Diagonal-Gaussian log-density of a raw draw, no squash correction.
pub fn gaussian_log_prob(output: &PolicyOutput, presquash: &[f64]) -> f64 {
    assert_eq!(presquash.len(), output.mean.len());
    let mut total = 0.0;
    for ((u, m), s) in presquash.iter().zip(&output.mean).zip(&output.std) {
        let z = (u - m) / s;
        total += -0.5 * (2.0 * PI).ln() - s.ln() - 0.5 * z * z;
    }
    total
}

/// ln(1 - tanh(u)^2), evaluated stably for large |u|.
fn log_one_minus_tanh_sq(u: f64) -> f64 {
    let a = u.abs();
    2.0 * (std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p())
}

/// Log-density of the squashed action expressed at its pre-squash draw:
/// the Gaussian term plus the tanh change-of-variable correction.
pub fn log_prob_presquash(output: &PolicyOutput, presquash: &[f64]) -> f64 {
    let correction: f64 = presquash.iter().map(|&u| log_one_minus_tanh_sq(u)).sum();
    gaussian_log_prob(output, presquash) - correction
}

/// Log-density of a squashed action with components in (-1, 1).
pub fn log_prob(output: &PolicyOutput, squashed: &[f64]) -> f64 {
    let presquash: Vec<f64> = squashed.iter().map(|t| t.atanh()).collect();
    log_prob_presquash(output, &presquash)
}

/// Closed-form diagonal-Gaussian entropy (pre-squash), the entropy bonus.
pub fn entropy(output: &PolicyOutput) -> f64 {
    output
        .std
        .iter()
        .map(|s| 0.5 * ((2.0 * PI).ln() + 1.0) + s.ln())
        .sum()
}

/// Squashed policy mean: the deterministic evaluation-mode action.
pub fn deterministic_action(output: &PolicyOutput) -> Vec<f64> {
    output.mean.iter().map(|m| m.tanh()).collect()
}
