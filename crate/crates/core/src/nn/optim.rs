use serde::{Deserialize, Serialize};

use super::NetworkParams;
use crate::error::{Result, TarlError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { kind: OptimizerKind::Adam, learning_rate: 2.5e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        OptimizerConfig { kind: OptimizerKind::Sgd, learning_rate, ..Default::default() }
    }

    pub fn adam(learning_rate: f64) -> Self {
        OptimizerConfig { kind: OptimizerKind::Adam, learning_rate, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TarlError::arg(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(TarlError::arg(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(TarlError::arg("adam epsilon must be positive"));
        }
        Ok(())
    }
}

/// Optimizer hyperparameters plus Adam moment accumulators shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    config: OptimizerConfig,
    first_moment: NetworkParams<T>,
    second_moment: NetworkParams<T>,
    step_count: u64,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(config: OptimizerConfig, params: &NetworkParams<T>) -> Result<Self> {
        config.validate()?;
        Ok(OptimizerState {
            config,
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
            step_count: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One descent step on `params` with gradient `grads`.
    ///
    /// SGD: `θ ← θ − η g`. Adam: bias-corrected first and second moments,
    /// `θ ← θ − η m̂ / (sqrt(v̂) + ε)`.
    pub fn apply_update(&mut self, params: &mut NetworkParams<T>, grads: &NetworkParams<T>) -> Result<()> {
        if !params.same_shape(grads) || !params.same_shape(&self.first_moment) {
            return Err(TarlError::shape("parameters, gradients and optimizer state differ in shape"));
        }
        self.step_count += 1;
        let lr = T::lit(self.config.learning_rate);
        match self.config.kind {
            OptimizerKind::Sgd => {
                for (ps, gs) in params.slices_mut().zip(grads.slices()) {
                    for (p, &g) in ps.iter_mut().zip(gs) {
                        *p -= lr * g;
                    }
                }
            }
            OptimizerKind::Adam => {
                let b1 = T::lit(self.config.beta1);
                let b2 = T::lit(self.config.beta2);
                let eps = T::lit(self.config.epsilon);
                let t = self.step_count as i32;
                let c1 = T::one() - b1.powi(t);
                let c2 = T::one() - b2.powi(t);
                let step = lr / c1;
                let inv_c2 = T::one() / c2;
                let moments = self.first_moment.slices_mut().zip(self.second_moment.slices_mut());
                for ((ps, gs), (ms, vs)) in params.slices_mut().zip(grads.slices()).zip(moments) {
                    for (((p, &g), m), v) in ps.iter_mut().zip(gs).zip(ms.iter_mut()).zip(vs.iter_mut()) {
                        *m = b1 * *m + (T::one() - b1) * g;
                        *v = b2 * *v + (T::one() - b2) * g * g;
                        *p -= step * *m / ((*v * inv_c2).sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Layer, Matrix};

    fn scalar_net(w: f64) -> NetworkParams<f64> {
        NetworkParams::new(vec![Layer::new(Matrix::from_rows(&[[w]]).unwrap(), vec![0.0]).unwrap()]).unwrap()
    }

    fn weight(n: &NetworkParams<f64>) -> f64 {
        n.layers()[0].weights.get(0, 0)
    }

    #[test]
    fn sgd_step_arithmetic() {
        let mut p = scalar_net(1.0);
        let mut opt = OptimizerState::new(OptimizerConfig::sgd(0.1), &p).unwrap();
        opt.apply_update(&mut p, &scalar_net(2.0)).unwrap();
        assert!((weight(&p) - 0.8).abs() < 1e-15);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        for cfg in [OptimizerConfig::sgd(0.1), OptimizerConfig::adam(0.1)] {
            let mut p = scalar_net(1.5);
            let mut opt = OptimizerState::new(cfg, &p).unwrap();
            opt.apply_update(&mut p, &scalar_net(0.0)).unwrap();
            assert_eq!(weight(&p), 1.5);
        }
    }

    #[test]
    fn adam_first_step_is_learning_rate_sized() {
        // m̂ = g, v̂ = g², so Δ = η g / (|g| + ε).
        for g in [1e-3, 0.5, 40.0, -7.0] {
            let mut p = scalar_net(0.0);
            let mut opt = OptimizerState::new(OptimizerConfig::adam(0.01), &p).unwrap();
            opt.apply_update(&mut p, &scalar_net(g)).unwrap();
            let expected = -0.01 * g / (g.abs() + 1e-8);
            assert!((weight(&p) - expected).abs() < 1e-15, "g={g}");
            assert!((weight(&p).abs() - 0.01).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_config_and_shapes() {
        let p = scalar_net(0.0);
        assert!(OptimizerState::new(OptimizerConfig::sgd(0.0), &p).is_err());
        assert!(OptimizerState::new(OptimizerConfig { beta1: 1.0, ..Default::default() }, &p).is_err());
        let mut opt = OptimizerState::new(OptimizerConfig::sgd(0.1), &p).unwrap();
        let other = NetworkParams::new(vec![Layer::new(Matrix::<f64>::zeros(2, 1), vec![0.0; 2]).unwrap()]).unwrap();
        let mut q = p.clone();
        assert!(opt.apply_update(&mut q, &other).is_err());
    }
}
