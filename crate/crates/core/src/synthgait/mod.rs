//! Synthetic walking data with known, machine-recoverable ground truth.
//!
//! The generator draws per-stride gait parameters from a clamped normal
//! population model and embeds each one as a distinct signal feature, so a
//! regressor trained on the output has something real to learn and every
//! pipeline stage can be verified against exact references. Left feet are
//! mirrored count-level twins of the right feet, which pins the axis
//! convention end to end.

mod dataset;
mod profile;
mod walk;

pub use dataset::{generate_dataset, generate_recording, mirror_counts, SynthConfig};
pub use profile::{ParamDistribution, ParamRange, SynthProfile};
pub use walk::{
    decode_targets, sample_stride, synth_walk, DecodedTargets, EmbeddedStride, StrideSpec,
    SynthWalk, EVENT_DIP_DPS, EVENT_DIP_HALF_WIDTH, LATERAL_BASE_CM, LATERAL_GAIN_G,
    LATERAL_HALF_WIDTH, PLATEAU_EDGE, PLATEAU_G, SWING_BASE_DPS, SWING_GAIN_DPS_PER_CM,
    TURN_DPS_PER_DEG,
};
