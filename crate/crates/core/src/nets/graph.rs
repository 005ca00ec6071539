//! Sequential layer stack with explicit forward caches.

use crate::error::{Error, Result};
use crate::tensorcore::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, maxpool_backward,
    maxpool_forward, Activation, ConvParams, DenseParams, DropoutMask, PoolRecord, Series,
};

/// One layer of a [`NetworkGraph`]. Convolutions always apply ReLU; dense
/// layers carry their own activation and an optional dropout probability
/// that only acts during training.
#[derive(Debug, Clone)]
pub enum Layer {
    Conv {
        name: String,
        params: ConvParams,
    },
    Pool {
        window: usize,
    },
    Flatten,
    Dense {
        name: String,
        params: DenseParams,
        activation: Activation,
        dropout: f64,
    },
}

/// Shape of the value flowing between layers while building.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Signal { channels: usize, length: usize },
    Flat { width: usize },
}

/// A sequential 1-D CNN. Layers are pushed front to back; shapes are
/// validated at build time so forward passes only check the input.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    input_channels: usize,
    input_length: usize,
    layers: Vec<Layer>,
    stage: Stage,
    conv_count: usize,
    dense_count: usize,
}

/// Intermediate values of one training forward pass, consumed by
/// [`NetworkGraph::backward`].
#[derive(Debug, Clone)]
enum LayerCache {
    Conv { input: Series, output: Series },
    Pool { record: PoolRecord },
    Flatten { channels: usize, length: usize },
    Dense {
        input: Vec<f64>,
        output: Vec<f64>,
        mask: Option<DropoutMask>,
    },
}

/// Opaque cache produced by a training forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    items: Vec<LayerCache>,
}

/// Output plus cache of one training forward pass.
#[derive(Debug, Clone)]
pub struct TrainPass {
    pub output: Vec<f64>,
    pub cache: ForwardCache,
}

/// Per-tensor parameter gradients, aligned with
/// [`NetworkGraph::param_tensors_mut`] (per parameterized layer: weights
/// first, then biases).
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub tensors: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &NetworkGraph) -> Self {
        NetGrads {
            tensors: net.tensor_sizes().iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Elementwise accumulation; shapes must agree.
    pub fn accumulate(&mut self, other: &NetGrads) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::dimension("gradient tensor count mismatch"));
        }
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            if a.len() != b.len() {
                return Err(Error::dimension("gradient tensor size mismatch"));
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        Ok(())
    }
}

/// Named mutable view of one parameter tensor.
pub struct ParamTensorMut<'a> {
    pub name: String,
    pub values: &'a mut Vec<f64>,
}

impl NetworkGraph {
    pub fn new(input_channels: usize, input_length: usize) -> Self {
        NetworkGraph {
            input_channels,
            input_length,
            layers: Vec::new(),
            stage: Stage::Signal {
                channels: input_channels,
                length: input_length,
            },
            conv_count: 0,
            dense_count: 0,
        }
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn input_length(&self) -> usize {
        self.input_length
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Appends a same-padding convolution with ReLU. Kernel widths come from
    /// the architecture spec; channel count is derived from the current
    /// stage.
    pub fn push_conv(&mut self, n_out: usize, kernel_len: usize) -> Result<()> {
        let (channels, length) = match self.stage {
            Stage::Signal { channels, length } => (channels, length),
            Stage::Flat { .. } => {
                return Err(Error::validation("cannot convolve after flatten"))
            }
        };
        let params = ConvParams::zeros(channels, n_out, kernel_len)?;
        self.conv_count += 1;
        self.layers.push(Layer::Conv {
            name: format!("conv{}", self.conv_count),
            params,
        });
        self.stage = Stage::Signal {
            channels: n_out,
            length,
        };
        Ok(())
    }

    pub fn push_pool(&mut self, window: usize) -> Result<()> {
        let (channels, length) = match self.stage {
            Stage::Signal { channels, length } => (channels, length),
            Stage::Flat { .. } => return Err(Error::validation("cannot pool after flatten")),
        };
        if window == 0 || length % window != 0 {
            return Err(Error::validation(format!(
                "pool window {window} does not divide length {length}"
            )));
        }
        self.layers.push(Layer::Pool { window });
        self.stage = Stage::Signal {
            channels,
            length: length / window,
        };
        Ok(())
    }

    pub fn push_flatten(&mut self) -> Result<()> {
        let (channels, length) = match self.stage {
            Stage::Signal { channels, length } => (channels, length),
            Stage::Flat { .. } => return Err(Error::validation("already flattened")),
        };
        self.layers.push(Layer::Flatten);
        self.stage = Stage::Flat {
            width: channels * length,
        };
        Ok(())
    }

    /// Appends a dense layer. `dropout` in `[0, 1)` only applies while
    /// training; the read-out layer uses `Identity` and no dropout.
    pub fn push_dense(&mut self, width: usize, activation: Activation, dropout: f64) -> Result<()> {
        let input_width = match self.stage {
            Stage::Flat { width } => width,
            Stage::Signal { .. } => {
                return Err(Error::validation("dense layers require a flattened input"))
            }
        };
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::validation(format!(
                "dropout probability must be in [0, 1), got {dropout}"
            )));
        }
        let params = DenseParams::zeros(input_width, width)?;
        self.dense_count += 1;
        let name = format!("dense{}", self.dense_count);
        self.layers.push(Layer::Dense {
            name,
            params,
            activation,
            dropout,
        });
        self.stage = Stage::Flat { width };
        Ok(())
    }

    /// Width of the final layer output.
    pub fn output_width(&self) -> usize {
        match self.stage {
            Stage::Flat { width } => width,
            Stage::Signal { channels, length } => channels * length,
        }
    }

    /// The flattened width, if the graph contains a flatten layer.
    pub fn flatten_width(&self) -> Option<usize> {
        let mut channels = self.input_channels;
        let mut length = self.input_length;
        for layer in &self.layers {
            match layer {
                Layer::Conv { params, .. } => channels = params.n_out(),
                Layer::Pool { window } => length /= window,
                Layer::Flatten => return Some(channels * length),
                Layer::Dense { .. } => return None,
            }
        }
        None
    }

    /// Total number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv { params, .. } => params.param_count(),
                Layer::Dense { params, .. } => params.param_count(),
                _ => 0,
            })
            .sum()
    }

    /// Sizes of the parameter tensors in update order.
    pub fn tensor_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv { params, .. } => {
                    sizes.push(params.kernels().len());
                    sizes.push(params.biases().len());
                }
                Layer::Dense { params, .. } => {
                    sizes.push(params.weights().len());
                    sizes.push(params.biases().len());
                }
                _ => {}
            }
        }
        sizes
    }

    /// Mutable views of all parameter tensors in update order. Names follow
    /// the layer (`conv1.kernels`, `dense2.biases`, ...).
    pub fn param_tensors_mut(&mut self) -> Vec<ParamTensorMut<'_>> {
        let mut out = Vec::new();
        for layer in self.layers.iter_mut() {
            match layer {
                Layer::Conv { name, params } => {
                    let (kernels, biases) = params.tensors_mut();
                    out.push(ParamTensorMut {
                        name: format!("{name}.kernels"),
                        values: kernels,
                    });
                    out.push(ParamTensorMut {
                        name: format!("{name}.biases"),
                        values: biases,
                    });
                }
                Layer::Dense { name, params, .. } => {
                    let (weights, biases) = params.tensors_mut();
                    out.push(ParamTensorMut {
                        name: format!("{name}.weights"),
                        values: weights,
                    });
                    out.push(ParamTensorMut {
                        name: format!("{name}.biases"),
                        values: biases,
                    });
                }
                _ => {}
            }
        }
        out
    }

    /// Read-only copies of all parameter tensors in update order.
    pub fn param_tensor_values(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv { params, .. } => {
                    out.push(params.kernels());
                    out.push(params.biases());
                }
                Layer::Dense { params, .. } => {
                    out.push(params.weights());
                    out.push(params.biases());
                }
                _ => {}
            }
        }
        out
    }

    /// Widths and probabilities of the dropout slots that need a sampled
    /// mask during training, in layer order.
    pub fn dropout_layout(&self) -> Vec<(usize, f64)> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Dense {
                    params, dropout, ..
                } if *dropout > 0.0 => Some((params.n_out(), *dropout)),
                _ => None,
            })
            .collect()
    }

    fn check_input(&self, input: &Series) -> Result<()> {
        if input.channels() != self.input_channels || input.length() != self.input_length {
            return Err(Error::dimension(format!(
                "network expects {}x{} input, got {}x{}",
                self.input_channels,
                self.input_length,
                input.channels(),
                input.length()
            )));
        }
        Ok(())
    }

    /// Inference forward pass: full network, no dropout.
    pub fn forward_inference(&self, input: &Series) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut signal: Option<Series> = None;
        let mut flat: Option<Vec<f64>> = None;
        for layer in &self.layers {
            match layer {
                Layer::Conv { params, .. } => {
                    let x = signal.as_ref().unwrap_or(input);
                    signal = Some(conv1d_forward(x, params)?);
                }
                Layer::Pool { window } => {
                    let x = signal.as_ref().unwrap_or(input);
                    let (out, _) = maxpool_forward(x, *window)?;
                    signal = Some(out);
                }
                Layer::Flatten => {
                    let x = signal.as_ref().unwrap_or(input);
                    flat = Some(x.flatten());
                    signal = None;
                }
                Layer::Dense {
                    params, activation, ..
                } => {
                    let x = flat
                        .as_ref()
                        .ok_or_else(|| Error::validation("dense layer before flatten"))?;
                    flat = Some(dense_forward(x, params, *activation)?);
                }
            }
        }
        flat.ok_or_else(|| Error::validation("network has no dense output"))
    }

    /// Training forward pass. `masks` must match [`Self::dropout_layout`]
    /// in count and widths; they are applied after the activation of their
    /// dense layer and recorded in the cache for the backward pass.
    pub fn forward_train(&self, input: &Series, masks: &[DropoutMask]) -> Result<TrainPass> {
        self.check_input(input)?;
        let layout = self.dropout_layout();
        if masks.len() != layout.len() {
            return Err(Error::dimension(format!(
                "expected {} dropout masks, got {}",
                layout.len(),
                masks.len()
            )));
        }
        let mut items = Vec::with_capacity(self.layers.len());
        let mut signal: Option<Series> = None;
        let mut flat: Option<Vec<f64>> = None;
        let mut mask_iter = masks.iter();
        for layer in &self.layers {
            match layer {
                Layer::Conv { params, .. } => {
                    let x = signal.as_ref().unwrap_or(input).clone();
                    let out = conv1d_forward(&x, params)?;
                    items.push(LayerCache::Conv {
                        input: x,
                        output: out.clone(),
                    });
                    signal = Some(out);
                }
                Layer::Pool { window } => {
                    let x = signal.as_ref().unwrap_or(input);
                    let (out, record) = maxpool_forward(x, *window)?;
                    items.push(LayerCache::Pool { record });
                    signal = Some(out);
                }
                Layer::Flatten => {
                    let x = signal.as_ref().unwrap_or(input);
                    items.push(LayerCache::Flatten {
                        channels: x.channels(),
                        length: x.length(),
                    });
                    flat = Some(x.flatten());
                    signal = None;
                }
                Layer::Dense {
                    params,
                    activation,
                    dropout,
                    ..
                } => {
                    let x = flat
                        .take()
                        .ok_or_else(|| Error::validation("dense layer before flatten"))?;
                    let out = dense_forward(&x, params, *activation)?;
                    let mask = if *dropout > 0.0 {
                        let m = mask_iter
                            .next()
                            .ok_or_else(|| Error::dimension("missing dropout mask"))?;
                        if m.width() != params.n_out() {
                            return Err(Error::dimension("dropout mask width mismatch"));
                        }
                        Some(m.clone())
                    } else {
                        None
                    };
                    let mut dropped = out.clone();
                    if let Some(m) = &mask {
                        m.apply(&mut dropped)?;
                    }
                    items.push(LayerCache::Dense {
                        input: x,
                        output: out,
                        mask,
                    });
                    flat = Some(dropped);
                }
            }
        }
        let output = flat.ok_or_else(|| Error::validation("network has no dense output"))?;
        Ok(TrainPass {
            output,
            cache: ForwardCache { items },
        })
    }

    /// Backward pass through the whole stack. `output_grad` is the loss
    /// gradient w.r.t. the network output; returns parameter gradients in
    /// update order.
    pub fn backward(&self, output_grad: &[f64], cache: &ForwardCache) -> Result<NetGrads> {
        if cache.items.len() != self.layers.len() {
            return Err(Error::dimension("cache does not match network depth"));
        }
        // Parameter gradients are produced back to front, then reversed into
        // update order.
        let mut rev_tensors: Vec<Vec<f64>> = Vec::new();
        let mut flat_grad: Option<Vec<f64>> = Some(output_grad.to_vec());
        let mut signal_grad: Option<Series> = None;

        for (layer, item) in self.layers.iter().zip(&cache.items).rev() {
            match (layer, item) {
                (
                    Layer::Dense {
                        params, activation, ..
                    },
                    LayerCache::Dense {
                        input,
                        output,
                        mask,
                    },
                ) => {
                    let mut upstream = flat_grad
                        .take()
                        .ok_or_else(|| Error::dimension("missing flat gradient"))?;
                    if let Some(m) = mask {
                        m.apply(&mut upstream)?;
                    }
                    let grads = dense_backward(&upstream, input, output, params, *activation)?;
                    rev_tensors.push(grads.biases);
                    rev_tensors.push(grads.weights);
                    flat_grad = Some(grads.input);
                }
                (Layer::Flatten, LayerCache::Flatten { channels, length }) => {
                    let g = flat_grad
                        .take()
                        .ok_or_else(|| Error::dimension("missing flat gradient"))?;
                    signal_grad = Some(Series::new(*channels, *length, g)?);
                }
                (Layer::Pool { .. }, LayerCache::Pool { record }) => {
                    let g = signal_grad
                        .take()
                        .ok_or_else(|| Error::dimension("missing signal gradient"))?;
                    signal_grad = Some(maxpool_backward(&g, record)?);
                }
                (Layer::Conv { params, .. }, LayerCache::Conv { input, output }) => {
                    let g = signal_grad
                        .take()
                        .ok_or_else(|| Error::dimension("missing signal gradient"))?;
                    let grads = conv1d_backward(&g, input, output, params)?;
                    rev_tensors.push(grads.biases);
                    rev_tensors.push(grads.kernels);
                    signal_grad = Some(grads.input);
                }
                _ => return Err(Error::dimension("cache and layer kinds disagree")),
            }
        }
        rev_tensors.reverse();
        Ok(NetGrads {
            tensors: rev_tensors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny_net() -> NetworkGraph {
        let mut net = NetworkGraph::new(2, 8);
        net.push_conv(3, 3).unwrap();
        net.push_pool(2).unwrap();
        net.push_flatten().unwrap();
        net.push_dense(5, Activation::Relu, 0.5).unwrap();
        net.push_dense(2, Activation::Identity, 0.0).unwrap();
        net
    }

    fn randomize(net: &mut NetworkGraph, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for tensor in net.param_tensors_mut() {
            for v in tensor.values.iter_mut() {
                *v = rng.gen_range(-0.5..0.5);
            }
        }
    }

    #[test]
    fn shape_tracking_rejects_misuse() {
        let mut net = NetworkGraph::new(2, 8);
        assert!(net.push_dense(4, Activation::Relu, 0.0).is_err());
        net.push_flatten().unwrap();
        assert!(net.push_conv(3, 3).is_err());
        assert!(net.push_pool(2).is_err());
        assert!(net.push_flatten().is_err());
    }

    #[test]
    fn dropout_probability_is_validated() {
        let mut net = NetworkGraph::new(2, 8);
        net.push_flatten().unwrap();
        assert!(net.push_dense(4, Activation::Relu, 1.0).is_err());
        assert!(net.push_dense(4, Activation::Relu, -0.5).is_err());
    }

    #[test]
    fn inference_and_train_forward_agree_without_dropout() {
        let mut net = NetworkGraph::new(2, 8);
        net.push_conv(3, 3).unwrap();
        net.push_pool(2).unwrap();
        net.push_flatten().unwrap();
        net.push_dense(5, Activation::Relu, 0.0).unwrap();
        net.push_dense(2, Activation::Identity, 0.0).unwrap();
        randomize(&mut net, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = Series::new(2, 8, values).unwrap();
        let inference = net.forward_inference(&input).unwrap();
        let pass = net.forward_train(&input, &[]).unwrap();
        assert_eq!(inference, pass.output);
    }

    #[test]
    fn train_forward_requires_matching_masks() {
        let net = tiny_net();
        let input = Series::zeros(2, 8);
        assert!(net.forward_train(&input, &[]).is_err());
        let mask = DropoutMask::all_keep(5);
        assert!(net.forward_train(&input, &[mask]).is_ok());
    }

    #[test]
    fn backward_matches_finite_differences_through_the_stack() {
        let mut net = tiny_net();
        randomize(&mut net, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = Series::new(2, 8, values).unwrap();
        // Fixed mask so the dropout scaling participates in the check.
        let mask = DropoutMask::sample(5, 0.5, &mut rng).unwrap();
        let read: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let loss = |net: &NetworkGraph| -> f64 {
            let pass = net.forward_train(&input, std::slice::from_ref(&mask)).unwrap();
            pass.output.iter().zip(&read).map(|(a, b)| a * b).sum()
        };

        let pass = net.forward_train(&input, std::slice::from_ref(&mask)).unwrap();
        let grads = net.backward(&read, &pass.cache).unwrap();

        let h = 1e-4;
        let sizes = net.tensor_sizes();
        for (ti, &size) in sizes.iter().enumerate() {
            for idx in 0..size {
                let mut plus = net.clone();
                plus.param_tensors_mut()[ti].values[idx] += h;
                let mut minus = net.clone();
                minus.param_tensors_mut()[ti].values[idx] -= h;
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
                let analytic = grads.tensors[ti][idx];
                let denom = analytic.abs().max(numeric.abs());
                if denom > 1e-8 {
                    assert!(
                        (analytic - numeric).abs() / denom < 1e-4,
                        "tensor {ti} index {idx}: analytic {analytic}, numeric {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn param_tensor_names_follow_layers() {
        let mut net = tiny_net();
        let names: Vec<String> = net.param_tensors_mut().into_iter().map(|t| t.name).collect();
        assert_eq!(
            names,
            vec![
                "conv1.kernels",
                "conv1.biases",
                "dense1.weights",
                "dense1.biases",
                "dense2.weights",
                "dense2.biases"
            ]
        );
    }
}
