//! Exact reverse-mode gradients of the mean-batch Gaussian NLL.
//!
//! The derivative chain, per sample with loss `L = 0.5·ln σ² + (y−μ)²/(2σ²)`:
//!
//! - `∂L/∂μ  = −(y−μ)/σ²`
//! - `∂L/∂σ² = (σ² − (y−μ)²)/(2σ⁴)`
//! - mean head `μ = s·tanh(z_m/s)`       ⇒ `∂μ/∂z_m = 1 − (μ/s)²`
//! - variance head `σ² = softplus(z_v)+c` ⇒ `∂σ²/∂z_v = sigmoid(z_v)`
//! - ReLU subgradient at exactly 0 is taken as 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnet::{sigmoid, NetworkParams, Workspace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGrads {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadGrads {
    pub d_mean_weights: Vec<f64>,
    pub d_mean_bias: f64,
    pub d_var_weights: Vec<f64>,
    pub d_var_bias: f64,
}

/// Gradient (or Adam moment) structure shaped like [`NetworkParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGrads {
    pub layers: Vec<LayerGrads>,
    pub head: HeadGrads,
}

impl NetworkGrads {
    pub fn zeros_like(params: &NetworkParams) -> NetworkGrads {
        NetworkGrads {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrads {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.biases.len()],
                })
                .collect(),
            head: HeadGrads {
                d_mean_weights: vec![0.0; params.head.mean_weights.len()],
                d_mean_bias: 0.0,
                d_var_weights: vec![0.0; params.head.var_weights.len()],
                d_var_bias: 0.0,
            },
        }
    }

    pub(crate) fn fill_zero(&mut self) {
        for s in self.slices_mut() {
            s.fill(0.0);
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            for v in s.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// Same canonical order as `NetworkParams::slices_mut`.
    pub(crate) fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(self.layers.len() * 2 + 4);
        for layer in &self.layers {
            out.push(&layer.d_weights);
            out.push(&layer.d_biases);
        }
        out.push(&self.head.d_mean_weights);
        out.push(std::slice::from_ref(&self.head.d_mean_bias));
        out.push(&self.head.d_var_weights);
        out.push(std::slice::from_ref(&self.head.d_var_bias));
        out
    }

    pub(crate) fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(self.layers.len() * 2 + 4);
        for layer in &mut self.layers {
            out.push(&mut layer.d_weights);
            out.push(&mut layer.d_biases);
        }
        out.push(&mut self.head.d_mean_weights);
        out.push(std::slice::from_mut(&mut self.head.d_mean_bias));
        out.push(&mut self.head.d_var_weights);
        out.push(std::slice::from_mut(&mut self.head.d_var_bias));
        out
    }

    pub(crate) fn dims_signature(&self) -> Vec<usize> {
        self.slices().iter().map(|s| s.len()).collect()
    }
}

/// Scratch buffers for one backward sweep.
pub(crate) struct BackwardScratch {
    ws: Workspace,
    d_act: Vec<f64>,
    d_prev: Vec<f64>,
}

impl BackwardScratch {
    pub(crate) fn new(params: &NetworkParams) -> BackwardScratch {
        let widest = params
            .arch
            .hidden_dims
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
            .max(params.arch.input_dim);
        BackwardScratch {
            ws: params.workspace(),
            d_act: vec![0.0; widest],
            d_prev: vec![0.0; widest],
        }
    }
}

impl NetworkParams {
    /// Gradient of the mean NLL over a batch, `∇ (1/n)·Σ nll(forward(x), y)`.
    pub fn backward(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<NetworkGrads> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument(
                "backward requires a non-empty batch".into(),
            ));
        }
        if xs.len() != ys.len() {
            return Err(Error::ShapeMismatch(format!(
                "batch has {} inputs but {} targets",
                xs.len(),
                ys.len()
            )));
        }
        let mut grads = NetworkGrads::zeros_like(self);
        let mut scratch = BackwardScratch::new(self);
        let idx: Vec<usize> = (0..xs.len()).collect();
        self.accumulate_batch(xs, ys, &idx, &mut grads, &mut scratch)?;
        Ok(grads)
    }

    /// Accumulates gradients for the index subset `batch` into `grads`
    /// (which must be zeroed by the caller) and returns the batch mean loss.
    pub(crate) fn accumulate_batch(
        &self,
        xs: &[Vec<f64>],
        ys: &[f64],
        batch: &[usize],
        grads: &mut NetworkGrads,
        scratch: &mut BackwardScratch,
    ) -> Result<f64> {
        let mut loss_sum = 0.0;
        for &i in batch {
            loss_sum += self.accumulate_sample(&xs[i], ys[i], grads, scratch)?;
        }
        let inv = 1.0 / batch.len() as f64;
        grads.scale(inv);
        Ok(loss_sum * inv)
    }

    fn accumulate_sample(
        &self,
        x: &[f64],
        y: f64,
        grads: &mut NetworkGrads,
        scratch: &mut BackwardScratch,
    ) -> Result<f64> {
        let (z_mean, z_var) = self.forward_trace(x, &mut scratch.ws)?;
        let pred = self.heads_from_preacts(z_mean, z_var);
        let mu = pred.mean;
        let var = pred.variance;
        let resid = y - mu;
        let loss = 0.5 * var.ln() + resid * resid / (2.0 * var);

        let d_mu = -resid / var;
        let d_var = (var - resid * resid) / (2.0 * var * var);

        let s = self.arch.tanh_scale;
        let t = mu / s; // tanh(z_mean / s)
        let d_zm = d_mu * (1.0 - t * t);
        let d_zv = d_var * sigmoid(z_var);

        // Head parameter grads and the gradient flowing into the last hidden
        // activation.
        let last = scratch.ws.acts.last().expect("hidden layer exists");
        let head = &self.head;
        let hg = &mut grads.head;
        let d_act = &mut scratch.d_act[..last.len()];
        for j in 0..last.len() {
            hg.d_mean_weights[j] += d_zm * last[j];
            hg.d_var_weights[j] += d_zv * last[j];
            d_act[j] = d_zm * head.mean_weights[j] + d_zv * head.var_weights[j];
        }
        hg.d_mean_bias += d_zm;
        hg.d_var_bias += d_zv;

        // Hidden layers, last to first. ReLU gate from the stored activation:
        // a > 0 passes, a == 0 blocks (subgradient 0 at the kink).
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let lg = &mut grads.layers[li];
            let act = &scratch.ws.acts[li];
            let prev: &[f64] = if li == 0 { x } else { &scratch.ws.acts[li - 1] };

            let d_prev = &mut scratch.d_prev[..prev.len()];
            d_prev.fill(0.0);
            for (o, &activation) in act[..layer.out_dim].iter().enumerate() {
                if activation <= 0.0 {
                    continue;
                }
                let dz = scratch.d_act[o];
                lg.d_biases[o] += dz;
                let row = o * layer.in_dim;
                let w_row = &layer.weights[row..row + layer.in_dim];
                let g_row = &mut lg.d_weights[row..row + layer.in_dim];
                for i in 0..layer.in_dim {
                    g_row[i] += dz * prev[i];
                    d_prev[i] += dz * w_row[i];
                }
            }
            let n = prev.len();
            scratch.d_act[..n].copy_from_slice(&scratch.d_prev[..n]);
        }

        Ok(loss)
    }
}
