//! AdamW with decoupled weight decay.
//!
//! Per step, for every parameter tensor `theta` with gradient `g`:
//!
//! ```text
//! theta *= 1 - lr * weight_decay          # decay decoupled from the moments
//! m = beta1 * m + (1 - beta1) * g
//! v = beta2 * v + (1 - beta2) * g^2
//! theta -= lr * (m / (1 - beta1^t)) / (sqrt(v / (1 - beta2^t)) + eps)
//! ```

use super::{Gradients, MlpConfig, MlpModel};
use crate::{Error, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWParams {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamWParams {
    /// Reference hyperparameters: lr 2e-3, weight decay 1e-4, conventional
    /// betas and epsilon.
    fn default() -> Self {
        AdamWParams {
            learning_rate: 2e-3,
            weight_decay: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Step counter plus first/second moment accumulators shaped like the model.
pub struct TrainerState {
    pub params: AdamWParams,
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl TrainerState {
    pub fn new(config: &MlpConfig, params: AdamWParams) -> Self {
        TrainerState {
            params,
            step: 0,
            m: Gradients::zeros(config),
            v: Gradients::zeros(config),
        }
    }

    /// One decoupled-weight-decay Adam update. Errors without touching the
    /// model if any gradient block contains a non-finite value.
    pub fn apply(&mut self, model: &mut MlpModel, grads: &Gradients) -> Result<()> {
        check_finite("embedding", grads.embedding.iter())?;
        check_finite("w1", grads.w1.iter())?;
        check_finite("b1", grads.b1.iter())?;
        check_finite("w2", grads.w2.iter())?;
        check_finite("b2", grads.b2.iter())?;
        check_finite("w3", grads.w3.iter())?;
        check_finite("b3", grads.b3.iter())?;

        self.step += 1;
        let p = self.params;
        let correction1 = 1.0 - p.beta1.powi(self.step as i32);
        let correction2 = 1.0 - p.beta2.powi(self.step as i32);

        update2(&mut model.embedding, &grads.embedding, &mut self.m.embedding, &mut self.v.embedding, p, correction1, correction2);
        update2(&mut model.w1, &grads.w1, &mut self.m.w1, &mut self.v.w1, p, correction1, correction2);
        update1(&mut model.b1, &grads.b1, &mut self.m.b1, &mut self.v.b1, p, correction1, correction2);
        update2(&mut model.w2, &grads.w2, &mut self.m.w2, &mut self.v.w2, p, correction1, correction2);
        update1(&mut model.b2, &grads.b2, &mut self.m.b2, &mut self.v.b2, p, correction1, correction2);
        update2(&mut model.w3, &grads.w3, &mut self.m.w3, &mut self.v.w3, p, correction1, correction2);
        update1(&mut model.b3, &grads.b3, &mut self.m.b3, &mut self.v.b3, p, correction1, correction2);
        Ok(())
    }
}

fn check_finite<'a>(block: &'static str, mut values: impl Iterator<Item = &'a f64>) -> Result<()> {
    if values.any(|v| !v.is_finite()) {
        Err(Error::NonFiniteGradient { block })
    } else {
        Ok(())
    }
}

#[inline]
fn update_scalar(theta: &mut f64, g: f64, m: &mut f64, v: &mut f64, p: AdamWParams, c1: f64, c2: f64) {
    *theta *= 1.0 - p.learning_rate * p.weight_decay;
    *m = p.beta1 * *m + (1.0 - p.beta1) * g;
    *v = p.beta2 * *v + (1.0 - p.beta2) * g * g;
    let m_hat = *m / c1;
    let v_hat = *v / c2;
    *theta -= p.learning_rate * m_hat / (v_hat.sqrt() + p.epsilon);
}

fn update2(theta: &mut Array2<f64>, g: &Array2<f64>, m: &mut Array2<f64>, v: &mut Array2<f64>, p: AdamWParams, c1: f64, c2: f64) {
    ndarray::Zip::from(theta)
        .and(g)
        .and(m)
        .and(v)
        .for_each(|t, &g, m, v| update_scalar(t, g, m, v, p, c1, c2));
}

fn update1(theta: &mut Array1<f64>, g: &Array1<f64>, m: &mut Array1<f64>, v: &mut Array1<f64>, p: AdamWParams, c1: f64, c2: f64) {
    ndarray::Zip::from(theta)
        .and(g)
        .and(m)
        .and(v)
        .for_each(|t, &g, m, v| update_scalar(t, g, m, v, p, c1, c2));
}
