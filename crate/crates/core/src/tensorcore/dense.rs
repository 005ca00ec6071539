//! Fully connected layer with ReLU or identity activation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorcore::conv::dot;

/// Output nonlinearity. Hidden layers use `Relu`; regression read-outs use
/// `Identity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

/// Dense layer parameters. Weights are stored `[n_in][n_out]`, output index
/// contiguous: `out[j] = bias[j] + sum_i w[i * n_out + j] * x[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    n_in: usize,
    n_out: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(n_in: usize, n_out: usize) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::validation("dense shape fields must be nonzero"));
        }
        Ok(DenseParams {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
        })
    }

    pub fn new(n_in: usize, n_out: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        let mut p = DenseParams::zeros(n_in, n_out)?;
        if weights.len() != n_in * n_out {
            return Err(Error::dimension(format!(
                "weight buffer has {} values, expected {}",
                weights.len(),
                n_in * n_out
            )));
        }
        if biases.len() != n_out {
            return Err(Error::dimension(format!(
                "bias buffer has {} values, expected {}",
                biases.len(),
                n_out
            )));
        }
        p.weights = weights;
        p.biases = biases;
        Ok(p)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Vec<f64> {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut Vec<f64> {
        &mut self.biases
    }

    /// Both tensors at once, for optimizers that walk every parameter.
    pub fn tensors_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>) {
        (&mut self.weights, &mut self.biases)
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Gradients with the same layout as [`DenseParams`] plus the input gradient.
#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Vec<f64>,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Forward pass: affine map followed by the activation.
pub fn dense_forward(input: &[f64], params: &DenseParams, activation: Activation) -> Result<Vec<f64>> {
    if input.len() != params.n_in {
        return Err(Error::dimension(format!(
            "dense expects {} inputs, got {}",
            params.n_in,
            input.len()
        )));
    }
    let mut out = params.biases.clone();
    for (i, &xi) in input.iter().enumerate() {
        let row = &params.weights[i * params.n_out..(i + 1) * params.n_out];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * xi;
        }
    }
    if activation == Activation::Relu {
        for v in out.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

/// Backward pass. `input` and `output` are the cached forward values; for
/// ReLU the gate is read from `output` (clamped units get exactly zero
/// gradient).
pub fn dense_backward(
    upstream: &[f64],
    input: &[f64],
    output: &[f64],
    params: &DenseParams,
    activation: Activation,
) -> Result<DenseGrads> {
    if input.len() != params.n_in {
        return Err(Error::dimension("dense backward: input width mismatch"));
    }
    if upstream.len() != params.n_out || output.len() != params.n_out {
        return Err(Error::dimension(
            "dense backward: upstream/output width must match layer output",
        ));
    }

    let delta: Vec<f64> = match activation {
        Activation::Identity => upstream.to_vec(),
        Activation::Relu => upstream
            .iter()
            .zip(output)
            .map(|(&u, &o)| if o > 0.0 { u } else { 0.0 })
            .collect(),
    };

    let mut grad_weights = vec![0.0; params.weights.len()];
    let mut grad_input = vec![0.0; params.n_in];
    for (i, &xi) in input.iter().enumerate() {
        let row = &params.weights[i * params.n_out..(i + 1) * params.n_out];
        let grow = &mut grad_weights[i * params.n_out..(i + 1) * params.n_out];
        for (g, &d) in grow.iter_mut().zip(&delta) {
            *g = xi * d;
        }
        grad_input[i] = dot(row, &delta);
    }

    Ok(DenseGrads {
        input: grad_input,
        weights: grad_weights,
        biases: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force reference: per output, bias first, then inputs in order.
    fn naive_dense(input: &[f64], params: &DenseParams, activation: Activation) -> Vec<f64> {
        let mut out = Vec::with_capacity(params.n_out());
        for j in 0..params.n_out() {
            let mut acc = params.biases()[j];
            for (i, &xi) in input.iter().enumerate() {
                acc += params.weights()[i * params.n_out() + j] * xi;
            }
            out.push(match activation {
                Activation::Relu => acc.max(0.0),
                Activation::Identity => acc,
            });
        }
        out
    }

    #[test]
    fn identity_weights_with_relu_clamp_negatives() {
        let params = DenseParams::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let out = dense_forward(&[1.0, -2.0], &params, Activation::Relu).unwrap();
        assert_eq!(out, vec![1.0, 0.0]);
    }

    #[test]
    fn identity_activation_passes_negatives_through() {
        let params = DenseParams::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let out = dense_forward(&[1.0, -2.0], &params, Activation::Identity).unwrap();
        assert_eq!(out, vec![1.0, -2.0]);
    }

    #[test]
    fn forward_matches_naive_oracle_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let n_in = rng.gen_range(1..=16);
            let n_out = rng.gen_range(1..=16);
            let weights: Vec<f64> = (0..n_in * n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let biases: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let params = DenseParams::new(n_in, n_out, weights, biases).unwrap();
            let input: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for act in [Activation::Relu, Activation::Identity] {
                assert_eq!(
                    dense_forward(&input, &params, act).unwrap(),
                    naive_dense(&input, &params, act)
                );
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let weights: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let params = DenseParams::new(4, 3, weights, vec![0.1, -0.2, 0.3]).unwrap();
        let input = [0.5, -0.5, 0.25, 1.0];
        let output = dense_forward(&input, &params, Activation::Relu).unwrap();
        let grads =
            dense_backward(&[0.0, 0.0, 0.0], &input, &output, &params, Activation::Relu).unwrap();
        assert!(grads.weights.iter().all(|&g| g == 0.0));
        assert!(grads.biases.iter().all(|&g| g == 0.0));
        assert!(grads.input.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn single_linear_unit_weight_grad_equals_input() {
        let params = DenseParams::new(3, 1, vec![0.3, -0.7, 0.2], vec![0.0]).unwrap();
        let input = [1.5, -2.0, 0.25];
        let output = dense_forward(&input, &params, Activation::Identity).unwrap();
        let grads =
            dense_backward(&[1.0], &input, &output, &params, Activation::Identity).unwrap();
        assert_eq!(grads.weights, input.to_vec());
        assert_eq!(grads.biases, vec![1.0]);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n_in = 5;
        let n_out = 4;
        let weights: Vec<f64> = (0..n_in * n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let biases: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let params = DenseParams::new(n_in, n_out, weights, biases).unwrap();
        let input: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let read: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();

        for act in [Activation::Relu, Activation::Identity] {
            let loss = |input: &[f64], params: &DenseParams| -> f64 {
                dense_forward(input, params, act)
                    .unwrap()
                    .iter()
                    .zip(&read)
                    .map(|(a, b)| a * b)
                    .sum()
            };
            let output = dense_forward(&input, &params, act).unwrap();
            let grads = dense_backward(&read, &input, &output, &params, act).unwrap();

            let h = 1e-4;
            let check = |analytic: f64, numeric: f64| {
                let denom = analytic.abs().max(numeric.abs());
                if denom > 1e-8 {
                    assert!((analytic - numeric).abs() / denom < 1e-4);
                }
            };
            for idx in 0..params.weights().len() {
                let mut plus = params.clone();
                plus.weights_mut()[idx] += h;
                let mut minus = params.clone();
                minus.weights_mut()[idx] -= h;
                check(
                    grads.weights[idx],
                    (loss(&input, &plus) - loss(&input, &minus)) / (2.0 * h),
                );
            }
            for idx in 0..params.biases().len() {
                let mut plus = params.clone();
                plus.biases_mut()[idx] += h;
                let mut minus = params.clone();
                minus.biases_mut()[idx] -= h;
                check(
                    grads.biases[idx],
                    (loss(&input, &plus) - loss(&input, &minus)) / (2.0 * h),
                );
            }
            for idx in 0..input.len() {
                let mut plus = input.clone();
                plus[idx] += h;
                let mut minus = input.clone();
                minus[idx] -= h;
                check(
                    grads.input[idx],
                    (loss(&plus, &params) - loss(&minus, &params)) / (2.0 * h),
                );
            }
        }
    }

    #[test]
    fn width_mismatch_is_a_dimension_error() {
        let params = DenseParams::zeros(3, 2).unwrap();
        assert!(dense_forward(&[1.0, 2.0], &params, Activation::Relu).is_err());
    }
}
