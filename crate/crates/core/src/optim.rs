use crate::autodiff::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    config: AdamConfig,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Result<Self> {
        if !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                config.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&config.beta1) || !(0.0..1.0).contains(&config.beta2) || !(config.epsilon > 0.0) {
            return Err(Error::InvalidArgument("Adam betas must lie in [0, 1) and epsilon > 0".into()));
        }
        Ok(Self {
            config,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update, `params[i] -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::LengthMismatch {
                expected: self.m.len(),
                got: params.len().min(grads.len()),
            });
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[i].len() || g.len() != self.m[i].len() {
                return Err(Error::Shape {
                    op: "Adam::step",
                    detail: format!("tensor {i}: {} params, {} grads, state {}", p.len(), g.len(), self.m[i].len()),
                });
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for (j, (w, &gj)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
                m[j] = b1 * m[j] + (1.0 - b1) * gj;
                v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
                *w -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}
