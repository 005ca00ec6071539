//! Network assembly, target scaling, prediction, and checkpoints.
//!
//! Two architectures are provided: model A, a single network regressing all
//! five stride parameters at once, and model B, an ensemble of five smaller
//! single-target networks. Both consume a fixed 6-channel, 256-sample
//! stride tensor.

mod build;
mod checkpoint;
mod graph;
mod model;
mod scaler;

pub use build::{build_model_a, build_model_b_member, ConvSpec, DenseSpec, ModelKind, NetSpec, Preset};
pub use checkpoint::{
    load_checkpoint, load_member_checkpoint, load_model, save_checkpoint,
    save_member_checkpoint, EnsembleMember, CHECKPOINT_VERSION,
};
pub use graph::{ForwardCache, Layer, NetGrads, NetworkGraph, ParamTensorMut, TrainPass};
pub use model::{predict, Model, TrainedNet};
pub use scaler::TargetScaler;
