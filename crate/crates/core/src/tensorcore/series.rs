//! Multichannel fixed-rate signal buffer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multichannel signal of uniform length, stored channel-major: all
/// samples of channel 0, then all samples of channel 1, and so on.
///
/// Values are finite; this is checked at construction so the numeric layers
/// can skip per-element checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    channels: usize,
    length: usize,
    values: Vec<f64>,
}

impl Series {
    /// Builds a series from a channel-major buffer of `channels * length`
    /// finite values.
    pub fn new(channels: usize, length: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || length == 0 {
            return Err(Error::validation("series must have nonzero shape"));
        }
        if values.len() != channels * length {
            return Err(Error::dimension(format!(
                "series buffer has {} values, expected {} ({} channels x {} samples)",
                values.len(),
                channels * length,
                channels,
                length
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("series contains non-finite values"));
        }
        Ok(Series {
            channels,
            length,
            values,
        })
    }

    /// All-zero series of the given shape.
    pub fn zeros(channels: usize, length: usize) -> Self {
        Series {
            channels,
            length,
            values: vec![0.0; channels * length],
        }
    }

    /// Builds a series from per-channel rows of equal length.
    pub fn from_channels(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("series must have at least one channel"));
        }
        let length = rows[0].len();
        if rows.iter().any(|r| r.len() != length) {
            return Err(Error::dimension("channel rows differ in length".to_string()));
        }
        let mut values = Vec::with_capacity(rows.len() * length);
        for row in rows {
            values.extend_from_slice(row);
        }
        Series::new(rows.len(), length, values)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn get(&self, channel: usize, t: usize) -> f64 {
        debug_assert!(channel < self.channels && t < self.length);
        self.values[channel * self.length + t]
    }

    pub fn set(&mut self, channel: usize, t: usize, value: f64) {
        debug_assert!(channel < self.channels && t < self.length);
        self.values[channel * self.length + t] = value;
    }

    /// One channel as a contiguous slice.
    pub fn channel(&self, channel: usize) -> &[f64] {
        debug_assert!(channel < self.channels);
        &self.values[channel * self.length..(channel + 1) * self.length]
    }

    pub fn channel_mut(&mut self, channel: usize) -> &mut [f64] {
        debug_assert!(channel < self.channels);
        &mut self.values[channel * self.length..(channel + 1) * self.length]
    }

    /// The full channel-major buffer.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Flattens to a single vector in channel-major order (channel 0 first).
    /// This order is part of the checkpoint format and pinned by tests.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Copy of the sample window `[start, end)` across all channels.
    pub fn window(&self, start: usize, end: usize) -> Result<Series> {
        if start >= end || end > self.length {
            return Err(Error::dimension(format!(
                "window [{start}, {end}) does not fit a length-{} series",
                self.length
            )));
        }
        let mut out = Series::zeros(self.channels, end - start);
        for c in 0..self.channels {
            out.channel_mut(c).copy_from_slice(&self.channel(c)[start..end]);
        }
        Ok(out)
    }
}
