//! Population model and synthesis settings for the walk generator.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaitio::CalibConfig;

/// Normal distribution with saturating bounds for one gait parameter.
///
/// Out-of-range draws clamp to the nearest bound instead of being redrawn,
/// so every sample consumes exactly one variate and the stream layout stays
/// independent of the draw values. Saturation keeps the sample standard
/// deviation close to `std` as long as the bounds sit a sigma or more from
/// the mean; rejection sampling would shrink it noticeably.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    pub fn new(mean: f64, std: f64, min: f64, max: f64) -> Self {
        ParamRange {
            mean,
            std,
            min,
            max,
        }
    }

    /// One clamped draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let normal = Normal::new(self.mean, self.std).expect("range validated before sampling");
        normal.sample(rng).clamp(self.min, self.max)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.mean.is_finite() && self.std.is_finite() && self.std > 0.0) {
            return Err(Error::validation(format!(
                "{name}: mean must be finite and std positive"
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::validation(format!(
                "{name}: bounds must be finite with min < max"
            )));
        }
        if self.mean < self.min || self.mean > self.max {
            return Err(Error::validation(format!(
                "{name}: mean lies outside the bounds"
            )));
        }
        Ok(())
    }
}

/// Per-parameter population distributions. Stride time is not listed; it is
/// always the sum of the sampled stance and swing times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDistribution {
    pub stride_length_cm: ParamRange,
    pub stride_width_cm: ParamRange,
    pub foot_angle_deg: ParamRange,
    pub stance_time_s: ParamRange,
    pub swing_time_s: ParamRange,
    pub heel_contact_s: ParamRange,
    pub toe_contact_s: ParamRange,
}

impl Default for ParamDistribution {
    /// Geriatric-cohort statistics. The swing floor is raised to 0.15 s so
    /// every synthesized swing is long enough to carry the event geometry.
    fn default() -> Self {
        ParamDistribution {
            stride_length_cm: ParamRange::new(80.63, 23.23, 20.01, 129.81),
            stride_width_cm: ParamRange::new(-1.44, 13.29, -37.52, 33.03),
            foot_angle_deg: ParamRange::new(0.07, 3.49, -11.93, 15.86),
            stance_time_s: ParamRange::new(0.85, 0.16, 0.48, 1.65),
            swing_time_s: ParamRange::new(0.37, 0.08, 0.15, 1.05),
            heel_contact_s: ParamRange::new(0.64, 0.14, 0.16, 1.52),
            toe_contact_s: ParamRange::new(0.69, 0.17, 0.25, 1.57),
        }
    }
}

impl ParamDistribution {
    pub fn validate(&self) -> Result<()> {
        self.stride_length_cm.validate("stride length")?;
        self.stride_width_cm.validate("stride width")?;
        self.foot_angle_deg.validate("foot angle")?;
        self.stance_time_s.validate("stance time")?;
        self.swing_time_s.validate("swing time")?;
        self.heel_contact_s.validate("heel contact time")?;
        self.toe_contact_s.validate("toe contact time")?;
        // The lateral pulse pair needs both amplitudes positive, which caps
        // usable stride width magnitudes at the lateral base amplitude.
        if self.stride_width_cm.min <= -40.0 || self.stride_width_cm.max >= 40.0 {
            return Err(Error::validation(
                "stride width bounds must stay inside (-40, 40) cm",
            ));
        }
        Ok(())
    }
}

/// Everything the generator needs besides patient and stride counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub params: ParamDistribution,
    /// Scales every gyroscope feature. Values well below 0.1 push the swing
    /// prominence under the detector floor, which is useful for exercising
    /// failure paths.
    pub gyro_scale: f64,
    /// Additive Gaussian noise std as a fraction of each channel's full
    /// range (6 g, 500 deg/s). Zero gives a noiseless walk.
    pub noise_level: f64,
    pub calib: CalibConfig,
    /// Samples the annotation window extends beyond its toe-off and heel
    /// strike.
    pub event_pad: usize,
    /// Flat samples before the lead-in toe-off.
    pub lead_stance: usize,
    /// Length of the unannotated lead-in swing that plants the first heel
    /// strike.
    pub lead_swing: usize,
    /// Flat samples after the last annotation window.
    pub tail: usize,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            params: ParamDistribution::default(),
            gyro_scale: 1.0,
            noise_level: 0.005,
            calib: CalibConfig::default(),
            event_pad: 4,
            lead_stance: 50,
            lead_swing: 40,
            tail: 4,
        }
    }
}

impl SynthProfile {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.calib.validate()?;
        if !(self.gyro_scale.is_finite() && self.gyro_scale > 0.0) {
            return Err(Error::validation("gyro scale must be positive"));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return Err(Error::validation("noise level must be nonnegative"));
        }
        if self.event_pad == 0 || self.event_pad > 20 {
            return Err(Error::validation("event pad must be in 1..=20 samples"));
        }
        if self.lead_stance < self.event_pad {
            return Err(Error::validation(
                "lead stance must cover the first annotation window margin",
            ));
        }
        if self.lead_swing < 16 || self.lead_swing % 2 != 0 {
            return Err(Error::validation(
                "lead swing must be an even sample count of at least 16",
            ));
        }
        Ok(())
    }
}
