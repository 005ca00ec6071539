//! Sensor data model: raw count signals, calibration to physical units,
//! axis alignment across feet, range normalization, and the on-disk
//! dataset layout.

mod calib;
mod dataset;
mod types;

pub use calib::{
    align_axes, calibrate, decalibrate, normalize_ranges, CalibConfig, CountSignal,
    ACCEL_RANGE_G, CHANNEL_NAMES, GYRO_RANGE_DPS, MAX_COUNT, MIRRORED_CHANNELS, SAGITTAL_GYRO,
    SAMPLE_RATE_HZ,
};
pub use dataset::{
    load_dataset, plausible_range, write_dataset, LoadSummary, RawRecording, StrideAnnotation,
};
pub use types::{Foot, GaitTargets, TargetId};
