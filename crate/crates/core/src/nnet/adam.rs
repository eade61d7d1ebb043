//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnet::{NetworkGrads, NetworkParams};

/// Optimizer state: first/second moments shaped like the parameters, plus the
/// step counter and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: NetworkGrads,
    pub second_moment: NetworkGrads,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zero moments with the conventional defaults β1=0.9, β2=0.999, ε=1e-8.
    pub fn new(params: &NetworkParams) -> AdamState {
        AdamState {
            first_moment: NetworkGrads::zeros_like(params),
            second_moment: NetworkGrads::zeros_like(params),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One Adam update over every parameter, in place.
    pub fn step(
        &mut self,
        params: &mut NetworkParams,
        grads: &NetworkGrads,
        lr: f64,
    ) -> Result<()> {
        if lr.is_nan() || lr <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        if params.dims_signature() != grads.dims_signature()
            || params.dims_signature() != self.first_moment.dims_signature()
        {
            return Err(Error::ShapeMismatch(
                "params, grads and Adam moments must share one shape".into(),
            ));
        }

        self.step_count += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step_count as i32);

        let g_slices = grads.slices();
        let mut m_slices = self.first_moment.slices_mut();
        let mut v_slices = self.second_moment.slices_mut();
        let mut p_slices = params.slices_mut();

        for (((p, m), v), g) in p_slices
            .iter_mut()
            .zip(m_slices.iter_mut())
            .zip(v_slices.iter_mut())
            .zip(g_slices.iter())
        {
            for k in 0..p.len() {
                let (np, nm, nv) = adam_elem(
                    p[k],
                    m[k],
                    v[k],
                    g[k],
                    self.beta1,
                    self.beta2,
                    bc1,
                    bc2,
                    self.epsilon,
                    lr,
                );
                p[k] = np;
                m[k] = nm;
                v[k] = nv;
            }
        }
        Ok(())
    }
}

/// One element of the Adam recurrence with precomputed bias corrections.
#[inline]
#[allow(clippy::too_many_arguments)]
fn adam_elem(
    p: f64,
    m: f64,
    v: f64,
    g: f64,
    beta1: f64,
    beta2: f64,
    bc1: f64,
    bc2: f64,
    eps: f64,
    lr: f64,
) -> (f64, f64, f64) {
    let m = beta1 * m + (1.0 - beta1) * g;
    let v = beta2 * v + (1.0 - beta2) * g * g;
    let m_hat = m / bc1;
    let v_hat = v / bc2;
    (p - lr * m_hat / (v_hat.sqrt() + eps), m, v)
}

/// The scalar Adam recurrence at step `t` (1-based). Reference form of the
/// exact arithmetic used by [`AdamState::step`].
#[allow(clippy::too_many_arguments)]
pub fn adam_scalar_update(
    p: f64,
    m: f64,
    v: f64,
    g: f64,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
) -> (f64, f64, f64) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    adam_elem(p, m, v, g, beta1, beta2, bc1, bc2, eps, lr)
}
