//! 1-D convolution layer: cross-correlation plus bias, ReLU activation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorcore::Series;

/// Border handling. `SameZero` keeps the output length equal to the input
/// length by reading zeros outside the signal; for even kernel lengths the
/// left pad is `(k - 1) / 2` and the right pad one sample larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Padding {
    SameZero,
}

/// Convolution parameters.
///
/// Kernels are stored as one flat buffer indexed `[out][in][tap]`, taps
/// contiguous. No kernel flip is applied: `out[t] = sum_u k[u] * x[t + u - pad]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    n_in: usize,
    n_out: usize,
    kernel_len: usize,
    kernels: Vec<f64>,
    biases: Vec<f64>,
    pub padding: Padding,
}

impl ConvParams {
    /// Zero-valued parameters of the given shape.
    pub fn zeros(n_in: usize, n_out: usize, kernel_len: usize) -> Result<Self> {
        if n_in == 0 || n_out == 0 || kernel_len == 0 {
            return Err(Error::validation("conv shape fields must be nonzero"));
        }
        Ok(ConvParams {
            n_in,
            n_out,
            kernel_len,
            kernels: vec![0.0; n_out * n_in * kernel_len],
            biases: vec![0.0; n_out],
            padding: Padding::SameZero,
        })
    }

    pub fn new(
        n_in: usize,
        n_out: usize,
        kernel_len: usize,
        kernels: Vec<f64>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        let mut p = ConvParams::zeros(n_in, n_out, kernel_len)?;
        if kernels.len() != p.kernels.len() {
            return Err(Error::dimension(format!(
                "kernel buffer has {} values, expected {}",
                kernels.len(),
                p.kernels.len()
            )));
        }
        if biases.len() != n_out {
            return Err(Error::dimension(format!(
                "bias buffer has {} values, expected {}",
                biases.len(),
                n_out
            )));
        }
        p.kernels = kernels;
        p.biases = biases;
        Ok(p)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    /// Taps of the kernel connecting input channel `i` to output channel `o`.
    pub fn kernel(&self, o: usize, i: usize) -> &[f64] {
        let base = (o * self.n_in + i) * self.kernel_len;
        &self.kernels[base..base + self.kernel_len]
    }

    pub fn kernels(&self) -> &[f64] {
        &self.kernels
    }

    pub fn kernels_mut(&mut self) -> &mut Vec<f64> {
        &mut self.kernels
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut Vec<f64> {
        &mut self.biases
    }

    /// Both tensors at once, for optimizers that walk every parameter.
    pub fn tensors_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>) {
        (&mut self.kernels, &mut self.biases)
    }

    /// Weights plus biases.
    pub fn param_count(&self) -> usize {
        self.kernels.len() + self.biases.len()
    }

    fn pad_left(&self) -> usize {
        (self.kernel_len - 1) / 2
    }
}

/// Gradients with the same layout as [`ConvParams`] plus the input gradient.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Series,
    pub kernels: Vec<f64>,
    pub biases: Vec<f64>,
}

/// The overlap of the shifted input with the output, as index ranges.
/// Returns `(t_start, t_end, src_start)` such that output positions
/// `t_start..t_end` pair with input positions starting at `src_start`.
fn overlap(shift: isize, len: usize) -> (usize, usize, usize) {
    let t_start = if shift < 0 { (-shift) as usize } else { 0 };
    let t_end = if shift > 0 {
        len.saturating_sub(shift as usize)
    } else {
        len
    };
    let src_start = (t_start as isize + shift) as usize;
    (t_start, t_end.max(t_start), src_start)
}

/// Forward pass: zero-padded same-length cross-correlation over all input
/// channels, plus bias, then ReLU.
pub fn conv1d_forward(input: &Series, params: &ConvParams) -> Result<Series> {
    if input.channels() != params.n_in {
        return Err(Error::dimension(format!(
            "conv expects {} input channels, got {}",
            params.n_in,
            input.channels()
        )));
    }
    let len = input.length();
    let pad = params.pad_left() as isize;
    let mut out = Series::zeros(params.n_out, len);
    for o in 0..params.n_out {
        let row = out.channel_mut(o);
        row.fill(params.biases[o]);
        for i in 0..params.n_in {
            let kernel = params.kernel(o, i);
            let x = input.channel(i);
            for (u, &w) in kernel.iter().enumerate() {
                let (t0, t1, s0) = overlap(u as isize - pad, len);
                let src = &x[s0..s0 + (t1 - t0)];
                for (dst, &s) in row[t0..t1].iter_mut().zip(src) {
                    *dst += w * s;
                }
            }
        }
        for v in row.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

/// Four-lane unrolled dot product. Fixed grouping keeps results
/// deterministic across runs.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Backward pass. `input` and `output` are the cached forward values; the
/// ReLU gate is read from `output` (post-activation zero means a clamped
/// unit, which gets exactly zero gradient). Gradient of padded border
/// positions is discarded.
pub fn conv1d_backward(
    upstream: &Series,
    input: &Series,
    output: &Series,
    params: &ConvParams,
) -> Result<ConvGrads> {
    if input.channels() != params.n_in {
        return Err(Error::dimension("conv backward: input channel mismatch"));
    }
    if upstream.channels() != params.n_out
        || upstream.length() != input.length()
        || output.channels() != params.n_out
        || output.length() != input.length()
    {
        return Err(Error::dimension(
            "conv backward: upstream/output shape must match forward output",
        ));
    }
    let len = input.length();
    let pad = params.pad_left() as isize;

    // Gate upstream through ReLU once; everything below reads `delta`.
    let mut delta = Series::zeros(params.n_out, len);
    for o in 0..params.n_out {
        let up = upstream.channel(o);
        let out = output.channel(o);
        let d = delta.channel_mut(o);
        for t in 0..len {
            if out[t] > 0.0 {
                d[t] = up[t];
            }
        }
    }

    let mut grad_kernels = vec![0.0; params.kernels.len()];
    let mut grad_biases = vec![0.0; params.n_out];
    let mut grad_input = Series::zeros(params.n_in, len);

    for o in 0..params.n_out {
        let d = delta.channel(o);
        grad_biases[o] = d.iter().sum();
        for i in 0..params.n_in {
            let x = input.channel(i);
            let base = (o * params.n_in + i) * params.kernel_len;
            let kernel = &params.kernels[base..base + params.kernel_len];
            let gk = &mut grad_kernels[base..base + params.kernel_len];
            let gx = grad_input.channel_mut(i);
            for u in 0..params.kernel_len {
                let (t0, t1, s0) = overlap(u as isize - pad, len);
                let n = t1 - t0;
                gk[u] = dot(&d[t0..t1], &x[s0..s0 + n]);
                let w = kernel[u];
                for (g, &dv) in gx[s0..s0 + n].iter_mut().zip(&d[t0..t1]) {
                    *g += w * dv;
                }
            }
        }
    }

    Ok(ConvGrads {
        input: grad_input,
        kernels: grad_kernels,
        biases: grad_biases,
    })
}
