//! Dense feed-forward network with a two-headed probabilistic output.
//!
//! The network maps an input vector through ReLU hidden layers into two scalar
//! heads: a mean head squashed by a scaled hyperbolic tangent and a variance
//! head passed through softplus plus a strictly positive floor. Training
//! minimizes the Gaussian negative log-likelihood with Adam and a
//! multiplicative learning-rate decay.
//!
//! Everything here is deterministic given a seed: initialization draws from a
//! ChaCha stream and the training loop shuffles with a seeded generator, so a
//! `(params, dataset, config)` triple always reproduces bit-identical weights.

mod adam;
mod backward;
mod loss;
mod train;

pub use adam::{adam_scalar_update, AdamState};
pub use backward::{HeadGrads, LayerGrads, NetworkGrads};
pub use loss::gaussian_nll;
pub use train::{train, TrainConfig};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Network architecture: dimension chain plus the two head constants.
///
/// `tanh_scale` bounds the mean head (a soft clamp in normalized-target
/// units); `variance_floor` is added to the softplus variance head so the
/// predicted variance never reaches zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arch {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub tanh_scale: f64,
    pub variance_floor: f64,
}

impl Default for Arch {
    fn default() -> Self {
        Arch {
            input_dim: 5,
            hidden_dims: vec![256, 256, 256],
            tanh_scale: 3.0,
            variance_floor: 1e-6,
        }
    }
}

impl Arch {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>) -> Self {
        Arch {
            input_dim,
            hidden_dims,
            ..Arch::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidArchitecture("input_dim must be > 0".into()));
        }
        if self.hidden_dims.is_empty() {
            return Err(Error::InvalidArchitecture(
                "at least one hidden layer required".into(),
            ));
        }
        if let Some(pos) = self.hidden_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidArchitecture(format!(
                "hidden layer {pos} has zero width"
            )));
        }
        if !(self.tanh_scale > 0.0 && self.tanh_scale.is_finite()) {
            return Err(Error::InvalidArchitecture(format!(
                "tanh_scale must be positive and finite, got {}",
                self.tanh_scale
            )));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::InvalidArchitecture(format!(
                "variance_floor must be positive and finite, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }

    /// Width of the last hidden layer, i.e. the fan-in of both heads.
    pub fn head_fan_in(&self) -> usize {
        *self.hidden_dims.last().expect("validated non-empty")
    }
}

/// One dense layer. Weights are row-major with shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// The two scalar output heads reading the last hidden activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub mean_weights: Vec<f64>,
    pub mean_bias: f64,
    pub var_weights: Vec<f64>,
    pub var_bias: f64,
}

/// All parameters of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub arch: Arch,
    pub layers: Vec<DenseLayer>,
    pub head: HeadParams,
}

/// Predictive mean and variance for one input, in normalized-target units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrediction {
    pub mean: f64,
    pub variance: f64,
}

/// Numerically stable softplus, `ln(1 + e^x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Numerically stable logistic sigmoid.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Reusable per-layer activation buffers for forward/backward passes.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// Hidden activations, one buffer per hidden layer.
    pub(crate) acts: Vec<Vec<f64>>,
}

impl NetworkParams {
    /// Deterministic He-style initialization: weights zero-mean normal with
    /// per-layer variance `2 / fan_in`, biases zero.
    pub fn init(arch: Arch, seed: u64) -> Result<NetworkParams> {
        arch.validate()?;
        let mut rng = rng_from(seed);

        let mut layers = Vec::with_capacity(arch.hidden_dims.len());
        let mut in_dim = arch.input_dim;
        for &out_dim in &arch.hidden_dims {
            layers.push(DenseLayer {
                weights: draw_he(&mut rng, out_dim * in_dim, in_dim),
                biases: vec![0.0; out_dim],
                in_dim,
                out_dim,
            });
            in_dim = out_dim;
        }

        let head_in = in_dim;
        let head = HeadParams {
            mean_weights: draw_he(&mut rng, head_in, head_in),
            mean_bias: 0.0,
            var_weights: draw_he(&mut rng, head_in, head_in),
            var_bias: 0.0,
        };

        Ok(NetworkParams { arch, layers, head })
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum::<usize>()
            + self.head.mean_weights.len()
            + self.head.var_weights.len()
            + 2
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self
                .arch
                .hidden_dims
                .iter()
                .map(|&d| vec![0.0; d])
                .collect(),
        }
    }

    /// Forward pass: ReLU hidden chain, then
    /// `mean = s · tanh(z_mean / s)` and `variance = softplus(z_var) + floor`.
    pub fn forward(&self, x: &[f64]) -> Result<GaussianPrediction> {
        let mut ws = self.workspace();
        self.forward_with(x, &mut ws)
    }

    /// Forward pass reusing caller-owned buffers. Hot path for ensembles and
    /// pool scoring.
    pub fn forward_with(&self, x: &[f64], ws: &mut Workspace) -> Result<GaussianPrediction> {
        let (z_mean, z_var) = self.forward_trace(x, ws)?;
        Ok(self.heads_from_preacts(z_mean, z_var))
    }

    /// Runs the hidden chain, leaving activations in `ws`, and returns the two
    /// head pre-activations.
    pub(crate) fn forward_trace(&self, x: &[f64], ws: &mut Workspace) -> Result<(f64, f64)> {
        if x.len() != self.arch.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input length {} does not match input_dim {}",
                x.len(),
                self.arch.input_dim
            )));
        }
        debug_assert_eq!(ws.acts.len(), self.layers.len());

        for (li, layer) in self.layers.iter().enumerate() {
            let (done, rest) = ws.acts.split_at_mut(li);
            let prev: &[f64] = if li == 0 { x } else { &done[li - 1] };
            let act = &mut rest[0];
            for (o, out) in act.iter_mut().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut z = layer.biases[o];
                for (w, a) in row.iter().zip(prev.iter()) {
                    z += w * a;
                }
                *out = if z > 0.0 { z } else { 0.0 };
            }
        }

        let last = ws.acts.last().expect("at least one hidden layer");
        let z_mean = dot(&self.head.mean_weights, last) + self.head.mean_bias;
        let z_var = dot(&self.head.var_weights, last) + self.head.var_bias;
        Ok((z_mean, z_var))
    }

    pub(crate) fn heads_from_preacts(&self, z_mean: f64, z_var: f64) -> GaussianPrediction {
        let s = self.arch.tanh_scale;
        GaussianPrediction {
            mean: s * (z_mean / s).tanh(),
            variance: softplus(z_var) + self.arch.variance_floor,
        }
    }

    /// All parameter arrays in canonical order (layer weights/biases, then the
    /// four head blocks). Grad and moment structures use the same order.
    pub(crate) fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(self.layers.len() * 2 + 4);
        for layer in &mut self.layers {
            out.push(&mut layer.weights);
            out.push(&mut layer.biases);
        }
        out.push(&mut self.head.mean_weights);
        out.push(std::slice::from_mut(&mut self.head.mean_bias));
        out.push(&mut self.head.var_weights);
        out.push(std::slice::from_mut(&mut self.head.var_bias));
        out
    }

    pub(crate) fn dims_signature(&self) -> Vec<usize> {
        let mut sig: Vec<usize> = Vec::with_capacity(self.layers.len() * 2 + 4);
        for layer in &self.layers {
            sig.push(layer.weights.len());
            sig.push(layer.biases.len());
        }
        sig.push(self.head.mean_weights.len());
        sig.push(1);
        sig.push(self.head.var_weights.len());
        sig.push(1);
        sig
    }
}

fn draw_he<R: Rng>(rng: &mut R, n: usize, fan_in: usize) -> Vec<f64> {
    let std = (2.0 / fan_in as f64).sqrt();
    let dist = Normal::new(0.0, std).expect("std is finite and positive");
    (0..n).map(|_| dist.sample(rng)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeroed(arch: Arch) -> NetworkParams {
        let mut p = NetworkParams::init(arch, 0).unwrap();
        for s in p.slices_mut() {
            s.fill(0.0);
        }
        p
    }

    #[test]
    fn init_is_deterministic() {
        let arch = Arch::default();
        let a = NetworkParams::init(arch.clone(), 7).unwrap();
        let b = NetworkParams::init(arch, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_default_first_layer_shape() {
        let p = NetworkParams::init(Arch::default(), 7).unwrap();
        assert_eq!(p.layers[0].out_dim, 256);
        assert_eq!(p.layers[0].in_dim, 5);
        assert_eq!(p.layers[0].weights.len(), 256 * 5);
    }

    #[test]
    fn init_first_layer_weight_variance_near_he_scale() {
        // fan_in = 5, so the draw variance is 2/5.
        let p = NetworkParams::init(Arch::default(), 7).unwrap();
        let w = &p.layers[0].weights;
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let expected = 2.0 / 5.0;
        assert!(
            (var - expected).abs() < 0.2 * expected,
            "sample variance {var} not within 20% of {expected}"
        );
    }

    #[test]
    fn init_rejects_zero_width() {
        let arch = Arch::new(5, vec![8, 0, 8]);
        assert!(matches!(
            NetworkParams::init(arch, 0),
            Err(Error::InvalidArchitecture(_))
        ));
    }

    #[test]
    fn forward_zero_params_gives_zero_mean() {
        let p = zeroed(Arch::new(3, vec![4, 4]));
        let pred = p.forward(&[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(pred.mean, 0.0);
    }

    #[test]
    fn forward_zero_params_variance_is_ln2_plus_floor() {
        // softplus(0) = ln 2; the default floor is 1e-6.
        let p = zeroed(Arch::new(3, vec![4, 4]));
        let pred = p.forward(&[1.0, 2.0, 3.0]).unwrap();
        let expected = std::f64::consts::LN_2 + 1e-6;
        assert!((pred.variance - expected).abs() < 1e-15);
    }

    #[test]
    fn forward_mean_saturates_at_tanh_scale() {
        let mut p = zeroed(Arch::new(2, vec![3]));
        p.head.mean_bias = 1e6;
        let pred = p.forward(&[0.0, 0.0]).unwrap();
        assert!((pred.mean - p.arch.tanh_scale).abs() < 1e-12);
        assert!(pred.mean <= p.arch.tanh_scale);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let p = zeroed(Arch::new(3, vec![4]));
        assert!(matches!(
            p.forward(&[1.0, 2.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-20.0, -3.0, -0.5, 0.0, 0.5, 3.0, 20.0] {
            let naive = (1.0 + f64::exp(x)).ln();
            assert!((softplus(x) - naive).abs() < 1e-12);
        }
        // Large arguments must not overflow.
        assert!((softplus(800.0) - 800.0).abs() < 1e-9);
        assert_eq!(softplus(-800.0), 0.0);
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        for &x in &[-30.0, -1.0, 0.3, 30.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-12);
        }
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }
}
