//! Bias-corrected adaptive moment estimation.

use crate::error::{Error, Result};
use crate::nn::{Gradients, NetworkParams, TrainConfig};

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> AdamState {
        AdamState {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
        }
    }
}

/// Applies one bias-corrected update at step `t` (1-based):
///
/// ```text
/// m <- b1 m + (1 - b1) g        mhat = m / (1 - b1^t)
/// v <- b2 v + (1 - b2) g^2      vhat = v / (1 - b2^t)
/// p <- p - lr * mhat / (sqrt(vhat) + eps)
/// ```
///
/// Rejects non-finite gradients, naming the offending weight layer.
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &Gradients,
    state: &mut AdamState,
    config: &TrainConfig,
    t: usize,
) -> Result<()> {
    if t == 0 {
        return Err(Error::RejectedInput("adam step index must be >= 1".into()));
    }
    if grads.layers.len() != params.layers.len() {
        return Err(Error::RejectedInput(
            "gradient shape does not match the parameters".into(),
        ));
    }
    for (l, lg) in grads.layers.iter().enumerate() {
        if lg.d_weights.iter().chain(&lg.d_biases).any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { layer: l });
        }
    }
    let (b1, b2, eps, lr) = (config.beta1, config.beta2, config.epsilon, config.learning_rate);
    let bc1 = 1.0 - b1.powi(t as i32);
    let bc2 = 1.0 - b2.powi(t as i32);
    for ((layer, lg), (ml, vl)) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.m.layers.iter_mut().zip(state.v.layers.iter_mut()))
    {
        update(&mut layer.weights, &lg.d_weights, &mut ml.d_weights, &mut vl.d_weights, b1, b2, bc1, bc2, eps, lr);
        update(&mut layer.biases, &lg.d_biases, &mut ml.d_biases, &mut vl.d_biases, b1, b2, bc1, bc2, eps, lr);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    b1: f64,
    b2: f64,
    bc1: f64,
    bc2: f64,
    eps: f64,
    lr: f64,
) {
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let mhat = m[i] / bc1;
        let vhat = v[i] / bc2;
        p[i] -= lr * mhat / (vhat.sqrt() + eps);
    }
}
