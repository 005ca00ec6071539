//! Gait event detection on the sagittal angular rate.
//!
//! Within one annotated window the swing phase shows as the dominant
//! positive peak of the sagittal gyroscope channel. Toe off is the deepest
//! minimum before that peak, heel strike the deepest minimum after it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaitio::SAGITTAL_GYRO;
use crate::tensorcore::Series;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    /// Minimum peak-to-trough spread of the sagittal rate, deg/s. A window
    /// flatter than this has no detectable swing.
    pub min_prominence_dps: f64,
}

impl Default for EventConfig {
    fn default() -> Self {
        EventConfig {
            min_prominence_dps: 20.0,
        }
    }
}

/// Sample indices of the events inside one window, local to that window.
/// Always `toe_off < swing_peak < heel_strike`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaitEvents {
    pub toe_off: usize,
    pub swing_peak: usize,
    pub heel_strike: usize,
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Detects the three events in one annotated window of a physical-unit
/// signal (deg/s on the gyro channels). Ties keep the earliest index, so
/// detection commutes with shifting the window within the recording.
pub fn detect_events(window: &Series, config: &EventConfig) -> Result<GaitEvents> {
    if window.channels() != 6 {
        return Err(Error::dimension("event detection expects 6 channels"));
    }
    let gy = window.channel(SAGITTAL_GYRO);
    if gy.len() < 3 {
        return Err(Error::Detection(format!(
            "window of {} samples cannot hold toe off, swing, and heel strike",
            gy.len()
        )));
    }
    let peak = argmax_first(gy);
    let spread = gy[peak] - gy[argmin_first(gy)];
    if spread < config.min_prominence_dps {
        return Err(Error::Detection(format!(
            "sagittal rate spread {spread:.1} deg/s is below the {} deg/s prominence floor",
            config.min_prominence_dps
        )));
    }
    if peak == 0 || peak == gy.len() - 1 {
        return Err(Error::Detection(
            "swing peak sits on the window edge, events cannot bracket it".into(),
        ));
    }
    let toe_off = argmin_first(&gy[..peak]);
    let heel_strike = peak + 1 + argmin_first(&gy[peak + 1..]);
    Ok(GaitEvents {
        toe_off,
        swing_peak: peak,
        heel_strike,
    })
}
