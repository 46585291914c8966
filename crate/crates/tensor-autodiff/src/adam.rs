//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;
use crate::TensorError;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Per-parameter first and second moments plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &[Tensor], config: AdamConfig) -> Result<Self, TensorError> {
        if config.lr <= 0.0 {
            return Err(TensorError::InvalidHyperparameter {
                name: "lr",
                value: config.lr,
            });
        }
        Ok(AdamState {
            config,
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            step: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam update over all parameters. A non-finite gradient aborts
    /// the whole step so a diverging run fails loudly instead of
    /// poisoning the moments.
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<(), TensorError> {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(params.len(), grads.len());
        for (i, g) in grads.iter().enumerate() {
            if !g.all_finite() {
                return Err(TensorError::NonFiniteGradient { param_index: i });
            }
            if g.shape() != params[i].shape() {
                return Err(TensorError::ShapeMismatch {
                    context: "adam_step gradient shape",
                    expected: params[i].shape().to_vec(),
                    got: g.shape().to_vec(),
                });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let pd = p.data_mut();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let gi = g.data()[i];
                md[i] = c.beta1 * md[i] + (1.0 - c.beta1) * gi;
                vd[i] = c.beta2 * vd[i] + (1.0 - c.beta2) * gi * gi;
                let mhat = md[i] / bc1;
                let vhat = vd[i] / bc2;
                pd[i] -= c.lr * mhat / (vhat.sqrt() + c.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = vec![Tensor::from_vec(&[2], vec![1.5, -0.5]).unwrap()];
        let grads = vec![Tensor::zeros(&[2])];
        let mut st = AdamState::new(&params, AdamConfig::default()).unwrap();
        let before = params[0].clone();
        st.step(&mut params, &grads).unwrap();
        st.step(&mut params, &grads).unwrap();
        assert_eq!(params[0], before);
        assert_eq!(st.step_count(), 2);
    }

    #[test]
    fn first_step_magnitude_is_bias_corrected_lr() {
        // Hand evaluation: m1 = 0.1, v1 = 0.001, mhat = 1, vhat = 1,
        // delta = lr / (1 + eps).
        let cfg = AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        };
        let mut params = vec![Tensor::scalar(0.0)];
        let grads = vec![Tensor::scalar(1.0)];
        let mut st = AdamState::new(&params, cfg).unwrap();
        st.step(&mut params, &grads).unwrap();
        let expected = -0.1 / (1.0 + cfg.eps);
        assert!((params[0].scalar_value() - expected).abs() < 1e-15);
        assert!((params[0].scalar_value() + 0.1).abs() < 1e-8);
    }

    #[test]
    fn identical_params_get_identical_updates() {
        let mut params = vec![Tensor::scalar(0.7), Tensor::scalar(0.7)];
        let grads = vec![Tensor::scalar(-0.3), Tensor::scalar(-0.3)];
        let mut st = AdamState::new(&params, AdamConfig::default()).unwrap();
        st.step(&mut params, &grads).unwrap();
        assert_eq!(params[0], params[1]);
    }

    #[test]
    fn nan_gradient_aborts() {
        let mut params = vec![Tensor::scalar(0.0)];
        let grads = vec![Tensor::scalar(f64::NAN)];
        let mut st = AdamState::new(&params, AdamConfig::default()).unwrap();
        let err = st.step(&mut params, &grads);
        assert!(matches!(err, Err(TensorError::NonFiniteGradient { .. })));
        assert_eq!(st.step_count(), 0);
    }

    #[test]
    fn rejects_nonpositive_lr() {
        let cfg = AdamConfig {
            lr: 0.0,
            ..AdamConfig::default()
        };
        assert!(AdamState::new(&[Tensor::scalar(0.0)], cfg).is_err());
    }
}
