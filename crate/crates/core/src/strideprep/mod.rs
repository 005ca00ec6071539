//! Stride preparation: event detection, heel-strike resegmentation,
//! temporal parameters, and fixed-length tensor assembly.

mod events;
mod prepare;
mod segment;

pub use events::{detect_events, EventConfig, GaitEvents};
pub use prepare::{
    pad_stride, prepare_dataset, prepare_recording, PrepConfig, PrepSummary, PreparedStride,
    STRIDE_TENSOR_LEN,
};
pub use segment::{
    samples_to_seconds, segment_foot, temporal_params, SegmentOutcome, StrideSegment,
    TemporalParams, SAMPLE_PERIOD_S,
};
