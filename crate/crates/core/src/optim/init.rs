//! Parameter initialization: truncated-normal weights, small constant
//! biases.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::nets::NetworkGraph;

const WEIGHT_STD: f64 = 0.01;
const BIAS_VALUE: f64 = 0.01;

/// Normal draw rejected and retried outside two standard deviations.
fn truncated_normal<R: Rng>(rng: &mut R, std: f64) -> f64 {
    let normal = Normal::new(0.0, std).expect("std is a fixed positive constant");
    loop {
        let x = normal.sample(rng);
        if x.abs() <= 2.0 * std {
            return x;
        }
    }
}

/// Fills every weight and kernel tensor with truncated-normal draws
/// (std 0.01, clipped at two sigma by resampling) and every bias with 0.01.
/// Draw order follows the parameter tensor order, so the result is a pure
/// function of the rng state.
pub fn init_network<R: Rng>(net: &mut NetworkGraph, rng: &mut R) {
    for tensor in net.param_tensors_mut() {
        if tensor.name.ends_with(".biases") {
            tensor.values.fill(BIAS_VALUE);
        } else {
            for v in tensor.values.iter_mut() {
                *v = truncated_normal(rng, WEIGHT_STD);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorcore::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wide_net() -> NetworkGraph {
        let mut net = NetworkGraph::new(4, 32);
        net.push_conv(8, 5).unwrap();
        net.push_pool(2).unwrap();
        net.push_flatten().unwrap();
        net.push_dense(96, Activation::Relu, 0.5).unwrap();
        net.push_dense(3, Activation::Identity, 0.0).unwrap();
        net
    }

    #[test]
    fn biases_are_a_small_positive_constant() {
        let mut net = wide_net();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        init_network(&mut net, &mut rng);
        for tensor in net.param_tensors_mut() {
            if tensor.name.ends_with(".biases") {
                assert!(tensor.values.iter().all(|&v| v == 0.01), "{}", tensor.name);
            }
        }
    }

    #[test]
    fn weights_match_the_truncated_normal_profile() {
        let mut net = wide_net();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        init_network(&mut net, &mut rng);
        let mut weights = Vec::new();
        for tensor in net.param_tensors_mut() {
            if !tensor.name.ends_with(".biases") {
                weights.extend_from_slice(tensor.values);
            }
        }
        assert!(weights.len() > 10_000);
        let max = weights.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(max <= 0.02, "max |w| = {max}");
        let mean: f64 = weights.iter().sum::<f64>() / weights.len() as f64;
        assert!(mean.abs() < 1e-3, "mean = {mean}");
        let var: f64 =
            weights.iter().map(|&w| (w - mean) * (w - mean)).sum::<f64>() / weights.len() as f64;
        let std = var.sqrt();
        // Clipping at two sigma shrinks the sample std a little below 0.01.
        assert!((0.0075..=0.0105).contains(&std), "std = {std}");
    }

    #[test]
    fn same_seed_reproduces_the_same_parameters() {
        let mut a = wide_net();
        let mut b = wide_net();
        init_network(&mut a, &mut ChaCha8Rng::seed_from_u64(9));
        init_network(&mut b, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.param_tensor_values(), b.param_tensor_values());

        let mut c = wide_net();
        init_network(&mut c, &mut ChaCha8Rng::seed_from_u64(10));
        assert_ne!(a.param_tensor_values(), c.param_tensor_values());
    }
}
