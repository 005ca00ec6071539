//! Raw recordings to network-ready stride tensors.
//!
//! Per foot: calibrate counts, mirror left onto the right-foot axis
//! convention, detect events on the physical signal, cut heel-strike
//! aligned segments, then slice the range-normalized signal and zero-pad
//! each segment to the fixed tensor length. Strides that cannot be used
//! (failed detection, over-long segments) are logged and skipped so one
//! bad window never kills a run.

use crate::error::{Error, Result};
use crate::gaitio::{
    align_axes, calibrate, normalize_ranges, CalibConfig, Foot, GaitTargets, RawRecording,
};
use crate::strideprep::events::EventConfig;
use crate::strideprep::segment::{segment_foot, TemporalParams};
use crate::tensorcore::Series;

/// Fixed sample length of every network input tensor.
pub const STRIDE_TENSOR_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrepConfig {
    pub calib: CalibConfig,
    pub events: EventConfig,
}

/// One stride ready for training or prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedStride {
    pub patient_id: String,
    pub foot: Foot,
    /// Position within the patient's prepared strides, output order.
    pub stride_index: usize,
    /// Which annotation supplied the reference targets.
    pub annotation_index: usize,
    /// Range-normalized 6 x 256 input.
    pub tensor: Series,
    /// Reference values from the annotation.
    pub reference: GaitTargets,
    /// Temporal parameters computed from the detected events.
    pub event_temporal: TemporalParams,
    /// Segment length before padding.
    pub segment_samples: usize,
}

/// Aggregate bookkeeping over a preparation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrepSummary {
    pub patients: usize,
    pub annotated_windows: usize,
    pub strides: usize,
    pub failed_windows: usize,
    pub dropped_segments: usize,
    pub overlong_segments: usize,
    pub clamped_samples: usize,
}

/// Zero-pads `segment` on the right to `length` samples.
pub fn pad_stride(segment: &Series, length: usize) -> Result<Series> {
    if segment.length() > length {
        return Err(Error::validation(format!(
            "segment of {} samples exceeds the {length}-sample tensor",
            segment.length()
        )));
    }
    let mut out = Series::zeros(segment.channels(), length);
    for c in 0..segment.channels() {
        out.channel_mut(c)[..segment.length()].copy_from_slice(segment.channel(c));
    }
    Ok(out)
}

fn prepare_foot(
    rec: &RawRecording,
    foot: Foot,
    config: &PrepConfig,
    strides: &mut Vec<PreparedStride>,
    stride_index: &mut usize,
    summary: &mut PrepSummary,
) -> Result<()> {
    let annotations: Vec<(usize, _)> = rec
        .strides()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.foot == foot)
        .map(|(i, s)| (i, s.clone()))
        .collect();
    summary.annotated_windows += annotations.len();
    if annotations.is_empty() {
        return Ok(());
    }

    let mut physical = calibrate(rec.signal(foot), &config.calib)?;
    align_axes(&mut physical, foot)?;
    let outcome = segment_foot(&physical, rec.patient_id(), &annotations, &config.events)?;
    summary.failed_windows += outcome.failed_windows;
    summary.dropped_segments += outcome.dropped_segments;

    let mut normalized = physical;
    summary.clamped_samples += normalize_ranges(&mut normalized)?;

    for segment in outcome.segments {
        if segment.len() > STRIDE_TENSOR_LEN {
            log::warn!(
                "patient {} {foot} annotation {}: {}-sample stride exceeds the {}-sample tensor, skipped",
                rec.patient_id(),
                segment.annotation_index,
                segment.len(),
                STRIDE_TENSOR_LEN
            );
            summary.overlong_segments += 1;
            continue;
        }
        let slice = normalized.window(segment.heel_strike, segment.heel_strike_next)?;
        let tensor = pad_stride(&slice, STRIDE_TENSOR_LEN)?;
        let event_temporal = segment.temporal()?;
        strides.push(PreparedStride {
            patient_id: rec.patient_id().to_string(),
            foot,
            stride_index: *stride_index,
            annotation_index: segment.annotation_index,
            tensor,
            reference: segment.targets,
            event_temporal,
            segment_samples: segment.len(),
        });
        *stride_index += 1;
    }
    Ok(())
}

/// Prepares one recording; left foot first, then right, segments in time
/// order.
pub fn prepare_recording(
    rec: &RawRecording,
    config: &PrepConfig,
) -> Result<(Vec<PreparedStride>, PrepSummary)> {
    let mut summary = PrepSummary {
        patients: 1,
        ..PrepSummary::default()
    };
    let mut strides = Vec::new();
    let mut stride_index = 0usize;
    for foot in [Foot::Left, Foot::Right] {
        prepare_foot(rec, foot, config, &mut strides, &mut stride_index, &mut summary)?;
    }
    summary.strides = strides.len();
    Ok((strides, summary))
}

/// Prepares a whole dataset, patients in input order.
pub fn prepare_dataset(
    recordings: &[RawRecording],
    config: &PrepConfig,
) -> Result<(Vec<PreparedStride>, PrepSummary)> {
    let mut all = Vec::new();
    let mut summary = PrepSummary::default();
    for rec in recordings {
        let (strides, part) = prepare_recording(rec, config)?;
        all.extend(strides);
        summary.patients += part.patients;
        summary.annotated_windows += part.annotated_windows;
        summary.strides += part.strides;
        summary.failed_windows += part.failed_windows;
        summary.dropped_segments += part.dropped_segments;
        summary.overlong_segments += part.overlong_segments;
        summary.clamped_samples += part.clamped_samples;
    }
    if summary.strides == 0 {
        log::warn!("preparation produced no usable strides");
    }
    Ok((all, summary))
}
