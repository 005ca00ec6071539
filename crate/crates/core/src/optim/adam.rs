//! Adam parameter updates with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation("adam alpha must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::validation("adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::validation("adam epsilon must be positive"));
        }
        Ok(())
    }
}

/// First and second moment estimates for a fixed set of parameter tensors.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, tensor_sizes: &[usize]) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            t: 0,
            m: tensor_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: tensor_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One update over every tensor. The step counter advances once per
    /// call, not per tensor; the division by the bias corrections uses the
    /// shared counter. `epsilon` sits outside the square root.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dimension(format!(
                "adam state tracks {} tensors, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powi(self.t as i32);
        let bc2 = 1.0 - c.beta2.powi(self.t as i32);
        for ((tensor, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if tensor.len() != m.len() || grad.len() != m.len() {
                return Err(Error::dimension("adam tensor size mismatch"));
            }
            for j in 0..m.len() {
                let g = grad[j];
                m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
                v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                tensor[j] -= c.alpha * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_once(state: &mut AdamState, params: &mut [f64], grads: &[f64]) {
        let mut view: Vec<&mut [f64]> = vec![params];
        let gview: Vec<&[f64]> = vec![grads];
        state.step(&mut view, &gview).unwrap();
    }

    #[test]
    fn zero_gradient_leaves_parameters_alone() {
        let mut state = AdamState::new(AdamConfig::default(), &[3]).unwrap();
        let mut params = vec![1.0, -2.0, 0.5];
        step_once(&mut state, &mut params, &[0.0, 0.0, 0.0]);
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_size_is_alpha_regardless_of_gradient_scale() {
        // With bias correction the first update is alpha * g / (|g| + eps),
        // which is alpha up to an epsilon/|g| relative contribution.
        for &g in &[1e-2, 1.0, 1e6] {
            let mut state = AdamState::new(AdamConfig::default(), &[1]).unwrap();
            let mut params = vec![0.0];
            step_once(&mut state, &mut params, &[g]);
            let step = -params[0];
            assert!(
                (step - 1e-3).abs() / 1e-3 < 1e-4,
                "gradient {g} gave step {step}"
            );
        }
        let mut state = AdamState::new(AdamConfig::default(), &[1]).unwrap();
        let mut params = vec![0.0];
        step_once(&mut state, &mut params, &[1.0]);
        assert!(((-params[0] - 1e-3) / 1e-3).abs() < 1e-6);
    }

    #[test]
    fn negative_gradient_moves_parameters_up() {
        let mut state = AdamState::new(AdamConfig::default(), &[1]).unwrap();
        let mut params = vec![0.0];
        step_once(&mut state, &mut params, &[-2.0]);
        assert!(params[0] > 0.0);
    }

    #[test]
    fn counter_advances_once_per_call_over_many_tensors() {
        let mut state = AdamState::new(AdamConfig::default(), &[2, 3]).unwrap();
        let mut a = vec![0.0; 2];
        let mut b = vec![0.0; 3];
        {
            let mut view: Vec<&mut [f64]> = vec![&mut a, &mut b];
            let ga = vec![1.0; 2];
            let gb = vec![1.0; 3];
            let gview: Vec<&[f64]> = vec![&ga, &gb];
            state.step(&mut view, &gview).unwrap();
        }
        assert_eq!(state.steps_taken(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let config = AdamConfig {
            alpha: 0.05,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(config, &[1]).unwrap();
        let mut x = vec![0.0];
        for _ in 0..2000 {
            let g = 2.0 * (x[0] - 3.0);
            step_once(&mut state, &mut x, &[g]);
        }
        assert!((x[0] - 3.0).abs() < 1e-2, "x = {}", x[0]);
    }

    #[test]
    fn tensor_count_mismatch_is_an_error() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]).unwrap();
        let mut a = vec![0.0; 2];
        let mut view: Vec<&mut [f64]> = vec![&mut a];
        assert!(state.step(&mut view, &[]).is_err());
    }

    #[test]
    fn config_bounds_are_checked() {
        let bad = AdamConfig { alpha: 0.0, ..AdamConfig::default() };
        assert!(AdamState::new(bad, &[1]).is_err());
        let bad = AdamConfig { beta1: 1.0, ..AdamConfig::default() };
        assert!(AdamState::new(bad, &[1]).is_err());
    }
}
