//! Count-to-physical calibration, cross-foot axis alignment, and range
//! normalization.
//!
//! Sensors deliver 12-bit counts per channel. Calibration maps counts to
//! g and deg/s; the default config spans exactly +-6 g and +-500 deg/s
//! over the count range. Left-foot recordings are mirrored about the
//! sagittal plane so both feet share one axis convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaitio::types::Foot;
use crate::tensorcore::Series;

pub const SAMPLE_RATE_HZ: f64 = 102.4;
pub const MAX_COUNT: u16 = 4095;
pub const ACCEL_RANGE_G: f64 = 6.0;
pub const GYRO_RANGE_DPS: f64 = 500.0;

/// Channel order of every signal in the pipeline.
pub const CHANNEL_NAMES: [&str; 6] = ["ax", "ay", "az", "gx", "gy", "gz"];

/// Index of the sagittal-plane angular rate, the channel gait events are
/// detected on.
pub const SAGITTAL_GYRO: usize = 4;

/// Channels whose sign flips when mirroring a left-foot recording: lateral
/// acceleration and the two non-sagittal angular rates.
pub const MIRRORED_CHANNELS: [usize; 3] = [1, 3, 5];

/// Per-channel affine count calibration: physical = (count - offset) / gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibConfig {
    pub offsets: [f64; 6],
    pub gains: [f64; 6],
}

impl Default for CalibConfig {
    fn default() -> Self {
        // Mid-range offset; gains put the count endpoints exactly on the
        // sensor range endpoints.
        let accel_gain = (MAX_COUNT as f64 / 2.0) / ACCEL_RANGE_G;
        let gyro_gain = (MAX_COUNT as f64 / 2.0) / GYRO_RANGE_DPS;
        CalibConfig {
            offsets: [MAX_COUNT as f64 / 2.0; 6],
            gains: [
                accel_gain, accel_gain, accel_gain, gyro_gain, gyro_gain, gyro_gain,
            ],
        }
    }
}

impl CalibConfig {
    pub fn validate(&self) -> Result<()> {
        for (c, &g) in self.gains.iter().enumerate() {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::validation(format!(
                    "gain for channel {} must be positive",
                    CHANNEL_NAMES[c]
                )));
            }
        }
        if !self.offsets.iter().all(|o| o.is_finite()) {
            return Err(Error::validation("calibration offsets must be finite"));
        }
        Ok(())
    }
}

/// Raw 12-bit counts for one foot, channel-major like [`Series`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSignal {
    counts: Vec<u16>,
    length: usize,
}

impl CountSignal {
    pub fn new(counts: Vec<u16>, length: usize) -> Result<Self> {
        if length == 0 || counts.len() != 6 * length {
            return Err(Error::dimension(format!(
                "count signal needs 6 x {length} values, got {}",
                counts.len()
            )));
        }
        if let Some(&bad) = counts.iter().find(|&&c| c > MAX_COUNT) {
            return Err(Error::validation(format!(
                "count {bad} exceeds the 12-bit range"
            )));
        }
        Ok(CountSignal { counts, length })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channel(&self, c: usize) -> &[u16] {
        &self.counts[c * self.length..(c + 1) * self.length]
    }

    pub fn get(&self, c: usize, t: usize) -> u16 {
        self.counts[c * self.length + t]
    }
}

/// Counts to physical units (g, deg/s).
pub fn calibrate(signal: &CountSignal, config: &CalibConfig) -> Result<Series> {
    config.validate()?;
    let mut out = Series::zeros(6, signal.length());
    for c in 0..6 {
        let offset = config.offsets[c];
        let gain = config.gains[c];
        let src = signal.channel(c);
        let dst = out.channel_mut(c);
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = (s as f64 - offset) / gain;
        }
    }
    Ok(out)
}

/// Physical units back to counts: rounded to the nearest count and
/// saturated at the 12-bit range. Inverse of [`calibrate`] for any value
/// that was a count to begin with.
pub fn decalibrate(series: &Series, config: &CalibConfig) -> Result<CountSignal> {
    config.validate()?;
    if series.channels() != 6 {
        return Err(Error::dimension("decalibration expects 6 channels"));
    }
    let mut counts = vec![0u16; 6 * series.length()];
    for c in 0..6 {
        let offset = config.offsets[c];
        let gain = config.gains[c];
        let src = series.channel(c);
        let dst = &mut counts[c * series.length()..(c + 1) * series.length()];
        for (d, &s) in dst.iter_mut().zip(src) {
            let raw = (s * gain + offset).round();
            *d = raw.clamp(0.0, MAX_COUNT as f64) as u16;
        }
    }
    CountSignal::new(counts, series.length())
}

/// Mirrors a left-foot signal into the right-foot axis convention by
/// negating the lateral acceleration and the two non-sagittal angular
/// rates. Right-foot signals pass through. Applying it twice for the same
/// foot is the identity.
pub fn align_axes(series: &mut Series, foot: Foot) -> Result<()> {
    if series.channels() != 6 {
        return Err(Error::dimension("axis alignment expects 6 channels"));
    }
    if foot == Foot::Right {
        return Ok(());
    }
    for &c in &MIRRORED_CHANNELS {
        for v in series.channel_mut(c) {
            *v = -*v;
        }
    }
    Ok(())
}

/// Scales accelerations by the 6 g range and angular rates by the
/// 500 deg/s range, then clamps to [-1, 1]. Returns how many values were
/// clamped; any clamping is logged since it means the sensor saturated or
/// the calibration is off.
pub fn normalize_ranges(series: &mut Series) -> Result<usize> {
    if series.channels() != 6 {
        return Err(Error::dimension("range normalization expects 6 channels"));
    }
    let mut clamped = 0usize;
    for c in 0..6 {
        let range = if c < 3 { ACCEL_RANGE_G } else { GYRO_RANGE_DPS };
        for v in series.channel_mut(c) {
            let scaled = *v / range;
            if scaled.abs() > 1.0 {
                clamped += 1;
            }
            *v = scaled.clamp(-1.0, 1.0);
        }
    }
    if clamped > 0 {
        log::warn!("range normalization clamped {clamped} samples to [-1, 1]");
    }
    Ok(clamped)
}
