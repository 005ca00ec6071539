//! Target and foot identifiers shared across the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which foot a recording or stride belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn key(self) -> &'static str {
        match self {
            Foot::Left => "left",
            Foot::Right => "right",
        }
    }
}

impl std::str::FromStr for Foot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Foot::Left),
            "right" => Ok(Foot::Right),
            other => Err(Error::validation(format!(
                "unknown foot {other:?}, expected \"left\" or \"right\""
            ))),
        }
    }
}

impl std::fmt::Display for Foot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// One gait parameter. The first five are regressed by the networks, in
/// exactly this output order; the last three come from detected events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetId {
    StrideLength,
    StrideWidth,
    FootAngle,
    HeelContact,
    ToeContact,
    StrideTime,
    SwingTime,
    StanceTime,
}

impl TargetId {
    /// Network readout order.
    pub const LEARNED: [TargetId; 5] = [
        TargetId::StrideLength,
        TargetId::StrideWidth,
        TargetId::FootAngle,
        TargetId::HeelContact,
        TargetId::ToeContact,
    ];

    /// Parameters computed from detected gait events instead of regression.
    pub const TEMPORAL: [TargetId; 3] = [
        TargetId::StrideTime,
        TargetId::SwingTime,
        TargetId::StanceTime,
    ];

    /// Everything a report covers.
    pub const ALL: [TargetId; 8] = [
        TargetId::StrideLength,
        TargetId::StrideWidth,
        TargetId::FootAngle,
        TargetId::HeelContact,
        TargetId::ToeContact,
        TargetId::StrideTime,
        TargetId::SwingTime,
        TargetId::StanceTime,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TargetId::StrideLength => "stride_length",
            TargetId::StrideWidth => "stride_width",
            TargetId::FootAngle => "foot_angle",
            TargetId::HeelContact => "heel_contact",
            TargetId::ToeContact => "toe_contact",
            TargetId::StrideTime => "stride_time",
            TargetId::SwingTime => "swing_time",
            TargetId::StanceTime => "stance_time",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            TargetId::StrideLength | TargetId::StrideWidth => "cm",
            TargetId::FootAngle => "deg",
            TargetId::HeelContact
            | TargetId::ToeContact
            | TargetId::StrideTime
            | TargetId::SwingTime
            | TargetId::StanceTime => "s",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TargetId::StrideLength => "stride length",
            TargetId::StrideWidth => "stride width",
            TargetId::FootAngle => "foot angle",
            TargetId::HeelContact => "heel contact time",
            TargetId::ToeContact => "toe contact time",
            TargetId::StrideTime => "stride time",
            TargetId::SwingTime => "swing time",
            TargetId::StanceTime => "stance time",
        }
    }

    pub fn from_key(s: &str) -> Result<Self> {
        TargetId::ALL
            .iter()
            .copied()
            .find(|t| t.key() == s)
            .ok_or_else(|| Error::validation(format!("unknown target {s:?}")))
    }
}

impl std::fmt::Display for TargetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// Reference values for one stride, physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitTargets {
    pub stride_length_cm: f64,
    pub stride_width_cm: f64,
    pub foot_angle_deg: f64,
    pub stride_time_s: f64,
    pub swing_time_s: f64,
    pub stance_time_s: f64,
    pub heel_contact_s: f64,
    pub toe_contact_s: f64,
}

impl GaitTargets {
    pub fn get(&self, id: TargetId) -> f64 {
        match id {
            TargetId::StrideLength => self.stride_length_cm,
            TargetId::StrideWidth => self.stride_width_cm,
            TargetId::FootAngle => self.foot_angle_deg,
            TargetId::HeelContact => self.heel_contact_s,
            TargetId::ToeContact => self.toe_contact_s,
            TargetId::StrideTime => self.stride_time_s,
            TargetId::SwingTime => self.swing_time_s,
            TargetId::StanceTime => self.stance_time_s,
        }
    }

    /// The five regressed targets in network readout order.
    pub fn learned_vector(&self) -> Vec<f64> {
        TargetId::LEARNED.iter().map(|&t| self.get(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learned_order_is_pinned() {
        let keys: Vec<&str> = TargetId::LEARNED.iter().map(|t| t.key()).collect();
        assert_eq!(
            keys,
            vec!["stride_length", "stride_width", "foot_angle", "heel_contact", "toe_contact"]
        );
    }

    #[test]
    fn learned_vector_follows_readout_order() {
        let t = GaitTargets {
            stride_length_cm: 1.0,
            stride_width_cm: 2.0,
            foot_angle_deg: 3.0,
            stride_time_s: 6.0,
            swing_time_s: 7.0,
            stance_time_s: 8.0,
            heel_contact_s: 4.0,
            toe_contact_s: 5.0,
        };
        assert_eq!(t.learned_vector(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn keys_round_trip() {
        for t in TargetId::ALL {
            assert_eq!(TargetId::from_key(t.key()).unwrap(), t);
        }
        assert!(TargetId::from_key("cadence").is_err());
    }

    #[test]
    fn foot_parses_and_prints() {
        assert_eq!("left".parse::<Foot>().unwrap(), Foot::Left);
        assert_eq!(Foot::Right.to_string(), "right");
        assert!("up".parse::<Foot>().is_err());
    }
}
