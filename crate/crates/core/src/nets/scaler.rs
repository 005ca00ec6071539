//! Per-target min-max scaling of regression targets.
//!
//! Networks train against targets scaled to `[0, 1]`. The scaler is always
//! fitted on the training split alone and stored with the model so
//! predictions can be mapped back to physical units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl TargetScaler {
    /// Fits per-target extrema over `rows`, one target vector per stride.
    /// A target with zero spread cannot be scaled and is rejected.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::validation("cannot fit a scaler on zero strides"))?;
        let width = first.len();
        if width == 0 {
            return Err(Error::validation("cannot fit a scaler on zero targets"));
        }
        let mut mins = vec![f64::INFINITY; width];
        let mut maxs = vec![f64::NEG_INFINITY; width];
        for row in rows {
            if row.len() != width {
                return Err(Error::dimension(format!(
                    "target row width {} does not match {}",
                    row.len(),
                    width
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::validation("target values must be finite"));
                }
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        for j in 0..width {
            if maxs[j] <= mins[j] {
                return Err(Error::validation(format!(
                    "target {j} is constant ({}) across the training split",
                    mins[j]
                )));
            }
        }
        Ok(TargetScaler { mins, maxs })
    }

    /// Builds a scaler from known extrema, e.g. read back from a checkpoint.
    pub fn from_bounds(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self> {
        if mins.len() != maxs.len() || mins.is_empty() {
            return Err(Error::dimension("scaler bounds must be non-empty and paired"));
        }
        for (j, (&lo, &hi)) in mins.iter().zip(&maxs).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::validation(format!(
                    "scaler bounds for target {j} are not an increasing finite pair"
                )));
            }
        }
        Ok(TargetScaler { mins, maxs })
    }

    pub fn n_targets(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    /// Physical value to the unit interval (training values land in
    /// `[0, 1]`; unseen values may fall outside, which is fine).
    pub fn scale_value(&self, target: usize, value: f64) -> f64 {
        (value - self.mins[target]) / (self.maxs[target] - self.mins[target])
    }

    /// Unit-interval value back to physical units.
    pub fn rescale_value(&self, target: usize, value: f64) -> f64 {
        value * (self.maxs[target] - self.mins[target]) + self.mins[target]
    }

    pub fn scale_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row)?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.scale_value(j, v))
            .collect())
    }

    pub fn rescale_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row)?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.rescale_value(j, v))
            .collect())
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.mins.len() {
            return Err(Error::dimension(format!(
                "row width {} does not match scaler width {}",
                row.len(),
                self.mins.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_extrema_map_to_the_unit_interval() {
        let rows = vec![vec![20.01, -37.52], vec![129.81, 33.03], vec![80.63, 0.0]];
        let scaler = TargetScaler::fit(&rows).unwrap();
        assert_eq!(scaler.scale_value(0, 20.01), 0.0);
        assert_eq!(scaler.scale_value(0, 129.81), 1.0);
        // Mid-range stride length against the cohort extrema.
        assert!((scaler.scale_value(0, 80.63) - 0.5520947176684882).abs() < 1e-9);
    }

    #[test]
    fn scale_then_rescale_is_identity_to_machine_noise() {
        let rows = vec![
            vec![1.0, -5.0, 100.0],
            vec![3.5, 2.5, 400.0],
            vec![2.0, 0.0, 250.0],
        ];
        let scaler = TargetScaler::fit(&rows).unwrap();
        for row in &rows {
            let back = scaler.rescale_row(&scaler.scale_row(row).unwrap()).unwrap();
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_target_is_rejected() {
        let rows = vec![vec![1.0, 7.0], vec![2.0, 7.0]];
        let err = TargetScaler::fit(&rows).unwrap_err();
        assert!(err.to_string().contains("constant"));
    }

    #[test]
    fn empty_and_ragged_input_is_rejected() {
        assert!(TargetScaler::fit(&[]).is_err());
        let ragged = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(TargetScaler::fit(&ragged).is_err());
    }

    #[test]
    fn bounds_round_trip_through_serde() {
        let scaler = TargetScaler::from_bounds(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let text = serde_json::to_string(&scaler).unwrap();
        let back: TargetScaler = serde_json::from_str(&text).unwrap();
        assert_eq!(back, scaler);
    }

    #[test]
    fn out_of_range_values_extrapolate_linearly() {
        let scaler = TargetScaler::from_bounds(vec![0.0], vec![2.0]).unwrap();
        assert_eq!(scaler.scale_value(0, 4.0), 2.0);
        assert_eq!(scaler.rescale_value(0, -0.5), -1.0);
    }
}
