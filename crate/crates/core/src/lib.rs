//! Stride-wise gait parameter estimation from foot-mounted inertial sensors.
//!
//! The library covers the full path from raw 12-bit sensor counts to an
//! evaluated regression model:
//!
//! * [`gaitio`] loads recordings and stride annotations, calibrates counts
//!   into physical units, mirrors left-foot axes, and normalizes ranges.
//! * [`strideprep`] detects heel-strike and toe-off events, re-segments
//!   walks into heel-strike-to-heel-strike strides, zero-pads them to a
//!   fixed tensor length, and derives the event-based temporal parameters.
//! * [`tensorcore`] provides the dense, convolutional, pooling, and dropout
//!   primitives the networks are built from, together with their gradients.
//! * [`nets`] assembles the two regression architectures, scales targets,
//!   and persists trained models as self-contained checkpoint files.
//! * [`optim`] implements the sum-of-RMSE training loss, Adam, parameter
//!   initialization, and the mini-batch training loop.
//! * [`synthgait`] generates synthetic walks with known embedded ground
//!   truth so every stage can be tested end to end without recorded data.
//! * [`evalstats`] runs patient-wise cross-validation and the statistical
//!   read-outs (accuracy/precision, Bland-Altman, Levene, ICC).
//!
//! All numerics are `f64`; training and evaluation are deterministic for a
//! fixed seed.

pub mod error;
pub mod evalstats;
pub mod gaitio;
pub mod nets;
pub mod optim;
pub mod seed;
pub mod strideprep;
pub mod synthgait;
pub mod tensorcore;

pub use error::{Error, Result};
