//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use super::lstm::{LstmGrads, LstmParams};
use crate::error::{Error, Result};

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> Self {
        AdamHyper { lr, ..Default::default() }
    }
}

/// First/second-moment accumulators (parameter-shaped) plus the step count.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub hyper: AdamHyper,
    m: LstmGrads,
    v: LstmGrads,
    t: u64,
}

impl AdamState {
    /// Zero-initialized moments matching `params`.
    pub fn new(params: &LstmParams, hyper: AdamHyper) -> Self {
        AdamState {
            hyper,
            m: params.grads_like(),
            v: params.grads_like(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected update: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(params: &mut LstmParams, grads: &LstmGrads, state: &mut AdamState) -> Result<()> {
    state.t += 1;
    let h = state.hyper;
    let bc1 = 1.0 - h.beta1.powi(state.t as i32);
    let bc2 = 1.0 - h.beta2.powi(state.t as i32);

    let p_tensors = params.tensors_mut();
    let g_tensors = grads.tensors();
    let m_tensors = state.m.tensors_mut();
    let v_tensors = state.v.tensors_mut();
    if p_tensors.len() != g_tensors.len() {
        return Err(Error::Predictor("gradient shape mismatch".into()));
    }

    for (((p, g), m), v) in p_tensors.into_iter().zip(g_tensors).zip(m_tensors).zip(v_tensors) {
        if p.len() != g.len() {
            return Err(Error::Predictor(format!(
                "tensor length mismatch: {} params vs {} grads",
                p.len(),
                g.len()
            )));
        }
        for k in 0..p.len() {
            m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * g[k];
            v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            p[k] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
        }
    }
    Ok(())
}
