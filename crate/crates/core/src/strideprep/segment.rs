//! Resegmentation of annotated windows into heel-strike-to-heel-strike
//! strides, and the temporal parameters that fall out of the events.

use crate::error::{Error, Result};
use crate::gaitio::{GaitTargets, StrideAnnotation};
use crate::strideprep::events::{detect_events, EventConfig, GaitEvents};
use crate::tensorcore::Series;

/// Exact binary representation of 1 / 102.4 Hz. Writing the reciprocal as
/// 5/512 keeps sample-count-to-seconds conversions exact in f64, so
/// stance + swing equals stride time bit for bit.
pub const SAMPLE_PERIOD_S: f64 = 5.0 / 512.0;

pub fn samples_to_seconds(n: usize) -> f64 {
    n as f64 * SAMPLE_PERIOD_S
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalParams {
    pub stride_time_s: f64,
    pub swing_time_s: f64,
    pub stance_time_s: f64,
}

/// Temporal parameters from event sample indices: stance runs from heel
/// strike to the following toe off, swing from that toe off to the next
/// heel strike. The two phases add up to the stride time exactly.
pub fn temporal_params(
    heel_strike: usize,
    toe_off: usize,
    heel_strike_next: usize,
) -> Result<TemporalParams> {
    if toe_off < heel_strike || heel_strike_next < toe_off || heel_strike_next <= heel_strike {
        return Err(Error::Detection(format!(
            "events out of order: heel strike {heel_strike}, toe off {toe_off}, next heel strike {heel_strike_next}"
        )));
    }
    let stance_time_s = samples_to_seconds(toe_off - heel_strike);
    let swing_time_s = samples_to_seconds(heel_strike_next - toe_off);
    Ok(TemporalParams {
        stride_time_s: stance_time_s + swing_time_s,
        swing_time_s,
        stance_time_s,
    })
}

/// One usable stride: the span between consecutive detected heel strikes,
/// indices global to the foot's recording.
#[derive(Debug, Clone, PartialEq)]
pub struct StrideSegment {
    /// Index of the annotation that supplied the reference targets.
    pub annotation_index: usize,
    pub heel_strike: usize,
    pub toe_off: usize,
    pub heel_strike_next: usize,
    pub targets: GaitTargets,
}

impl StrideSegment {
    pub fn len(&self) -> usize {
        self.heel_strike_next - self.heel_strike
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn temporal(&self) -> Result<TemporalParams> {
        temporal_params(self.heel_strike, self.toe_off, self.heel_strike_next)
    }
}

/// Bookkeeping of one foot's resegmentation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentOutcome {
    pub segments: Vec<StrideSegment>,
    pub windows: usize,
    /// Windows where event detection failed (each costs its two adjacent
    /// segments).
    pub failed_windows: usize,
    /// Segments dropped because a neighboring window had no events or the
    /// events ran out of order.
    pub dropped_segments: usize,
}

/// Cuts one foot's recording into heel-strike aligned strides.
///
/// Each annotated window contributes the heel strike that opens a segment;
/// the toe off and closing heel strike come from the following window. The
/// final window therefore only closes its predecessor. Detection failures
/// are logged and skipped, not fatal: real recordings contain the odd
/// unusable window.
pub fn segment_foot(
    physical: &Series,
    patient_id: &str,
    annotations: &[(usize, StrideAnnotation)],
    config: &EventConfig,
) -> Result<SegmentOutcome> {
    let mut outcome = SegmentOutcome {
        windows: annotations.len(),
        ..SegmentOutcome::default()
    };
    if annotations.is_empty() {
        return Ok(outcome);
    }
    let foot = annotations[0].1.foot;

    // Detect per window first; pairing below needs both neighbors.
    let mut events: Vec<Option<GaitEvents>> = Vec::with_capacity(annotations.len());
    for (index, annotation) in annotations {
        if annotation.foot != foot {
            return Err(Error::validation("segment_foot got mixed feet"));
        }
        let window = physical.window(annotation.start, annotation.end)?;
        match detect_events(&window, config) {
            Ok(local) => events.push(Some(GaitEvents {
                toe_off: annotation.start + local.toe_off,
                swing_peak: annotation.start + local.swing_peak,
                heel_strike: annotation.start + local.heel_strike,
            })),
            Err(e) => {
                log::warn!("patient {patient_id} {foot} annotation {index}: {e}");
                outcome.failed_windows += 1;
                events.push(None);
            }
        }
    }

    for k in 0..annotations.len().saturating_sub(1) {
        let (annotation_index, annotation) = &annotations[k];
        let (open, close) = match (&events[k], &events[k + 1]) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                outcome.dropped_segments += 1;
                continue;
            }
        };
        let segment = StrideSegment {
            annotation_index: *annotation_index,
            heel_strike: open.heel_strike,
            toe_off: close.toe_off,
            heel_strike_next: close.heel_strike,
            targets: annotation.targets,
        };
        if segment.temporal().is_err() {
            log::warn!(
                "patient {patient_id} {foot} annotation {annotation_index}: events out of order, stride dropped"
            );
            outcome.dropped_segments += 1;
            continue;
        }
        outcome.segments.push(segment);
    }
    Ok(outcome)
}
