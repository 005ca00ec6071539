//! Non-overlapping 1-D max pooling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorcore::Series;

/// Where each pooled maximum came from, for gradient routing. `argmax`
/// holds absolute input indices, one per `(channel, output position)`,
/// channel-major like [`Series`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub window: usize,
    pub channels: usize,
    pub in_length: usize,
    pub out_length: usize,
    argmax: Vec<usize>,
}

impl PoolRecord {
    /// Input index that produced the maximum for `(channel, t_out)`.
    pub fn source(&self, channel: usize, t_out: usize) -> usize {
        self.argmax[channel * self.out_length + t_out]
    }
}

/// Forward pass over non-overlapping windows. The window must evenly divide
/// the signal length. Ties keep the first (lowest) index.
pub fn maxpool_forward(input: &Series, window: usize) -> Result<(Series, PoolRecord)> {
    if window == 0 {
        return Err(Error::validation("pool window must be nonzero"));
    }
    if input.length() % window != 0 {
        return Err(Error::validation(format!(
            "pool window {} does not divide signal length {}",
            window,
            input.length()
        )));
    }
    let out_length = input.length() / window;
    let mut out = Series::zeros(input.channels(), out_length);
    let mut argmax = vec![0usize; input.channels() * out_length];
    for c in 0..input.channels() {
        let x = input.channel(c);
        let row = out.channel_mut(c);
        for (t_out, chunk) in x.chunks_exact(window).enumerate() {
            let mut best = chunk[0];
            let mut best_idx = 0;
            for (k, &v) in chunk.iter().enumerate().skip(1) {
                if v > best {
                    best = v;
                    best_idx = k;
                }
            }
            row[t_out] = best;
            argmax[c * out_length + t_out] = t_out * window + best_idx;
        }
    }
    Ok((
        out,
        PoolRecord {
            window,
            channels: input.channels(),
            in_length: input.length(),
            out_length,
            argmax,
        },
    ))
}

/// Backward pass: routes each upstream value to the input position that won
/// the forward maximum; all other positions get zero.
pub fn maxpool_backward(upstream: &Series, record: &PoolRecord) -> Result<Series> {
    if upstream.channels() != record.channels || upstream.length() != record.out_length {
        return Err(Error::dimension(
            "pool backward: upstream shape must match forward output",
        ));
    }
    let mut grad = Series::zeros(record.channels, record.in_length);
    for c in 0..record.channels {
        let up = upstream.channel(c);
        let g = grad.channel_mut(c);
        for t_out in 0..record.out_length {
            g[record.argmax[c * record.out_length + t_out]] += up[t_out];
        }
    }
    Ok(grad)
}
