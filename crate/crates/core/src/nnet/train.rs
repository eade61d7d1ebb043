//! Mini-batch training loop: shuffled batches, Adam, stepped learning-rate
//! decay (constant through a warm-up window, geometric afterwards).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnet::backward::BackwardScratch;
use crate::nnet::{AdamState, NetworkGrads, NetworkParams};
use crate::seed::rng_from;

/// Hyperparameters for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of passes over the data. Zero is a no-op.
    pub epochs: usize,
    pub batch_size: usize,
    /// Learning rate used through `decay_start_epoch`.
    pub base_lr: f64,
    /// Per-epoch multiplier applied after `decay_start_epoch`.
    pub decay_factor: f64,
    /// Last 1-indexed epoch that still uses `base_lr` unscaled.
    pub decay_start_epoch: usize,
    /// Seed for batch shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs: 200,
            batch_size: 32,
            base_lr: 1e-3,
            decay_factor: 0.99,
            decay_start_epoch: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "batch_size must be at least 1".into(),
            ));
        }
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "base_lr must be positive and finite, got {}",
                self.base_lr
            )));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay_factor must lie in (0, 1], got {}",
                self.decay_factor
            )));
        }
        Ok(())
    }

    /// Learning rate for a 1-indexed epoch: `base_lr` up to and including
    /// `decay_start_epoch`, then `base_lr · decay_factor^(epoch − start)`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if epoch <= self.decay_start_epoch {
            self.base_lr
        } else {
            self.base_lr
                * self
                    .decay_factor
                    .powi((epoch - self.decay_start_epoch) as i32)
        }
    }
}

/// Trains `params` in place by minimizing the mean Gaussian NLL and returns
/// the per-epoch mean training loss. The optimizer state is created fresh, so
/// calling this again on already-trained parameters performs a warm start.
pub fn train(
    params: &mut NetworkParams,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::InvalidArgument(
            "training set must be non-empty".into(),
        ));
    }
    if inputs.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }

    let mut rng = rng_from(config.seed);
    let mut state = AdamState::new(params);
    let mut grads = NetworkGrads::zeros_like(params);
    let mut scratch = BackwardScratch::new(params);
    let mut indices: Vec<usize> = (0..inputs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let lr = config.learning_rate(epoch);
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in indices.chunks(config.batch_size) {
            grads.fill_zero();
            let batch_loss =
                params.accumulate_batch(inputs, targets, batch, &mut grads, &mut scratch)?;
            state.step(params, &grads, lr)?;
            loss_sum += batch_loss * batch.len() as f64;
        }
        history.push(loss_sum / inputs.len() as f64);
    }
    Ok(history)
}
