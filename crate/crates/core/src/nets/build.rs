//! Architecture descriptions and builders for the two estimator networks.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nets::graph::NetworkGraph;
use crate::tensorcore::Activation;

/// Which estimator family a run trains.
///
/// `A` is a single network with one output per gait parameter. `B` is an
/// ensemble of five single-output networks, one per parameter, each two
/// convolution blocks deep instead of three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    A,
    B,
}

impl ModelKind {
    /// Networks trained for this kind.
    pub fn member_count(self) -> usize {
        match self {
            ModelKind::A => 1,
            ModelKind::B => 5,
        }
    }

    /// Readout width of each network.
    pub fn outputs_per_member(self) -> usize {
        match self {
            ModelKind::A => 5,
            ModelKind::B => 1,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::A => write!(f, "a"),
            ModelKind::B => write!(f, "b"),
        }
    }
}

/// Layer-width profile. `Paper` is the full published size; `Desk` halves
/// the convolution channels and dense widths so a run fits interactive use
/// on a laptop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Desk,
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Preset::Paper => write!(f, "paper"),
            Preset::Desk => write!(f, "desk"),
        }
    }
}

/// One convolution block: same-padding ReLU convolution followed by a
/// non-overlapping max pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub channels: usize,
    pub kernel_len: usize,
}

/// One hidden dense layer (ReLU) with its training-time dropout rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseSpec {
    pub width: usize,
    pub dropout: f64,
}

/// Complete shape of one network, serializable for checkpoints and run
/// configs. Hidden dense layers use ReLU; the readout is linear with no
/// dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_channels: usize,
    pub input_length: usize,
    pub conv: Vec<ConvSpec>,
    pub pool_window: usize,
    pub dense: Vec<DenseSpec>,
    pub outputs: usize,
}

impl NetSpec {
    /// Materializes the graph with zeroed parameters.
    pub fn build(&self) -> Result<NetworkGraph> {
        let mut net = NetworkGraph::new(self.input_channels, self.input_length);
        for conv in &self.conv {
            net.push_conv(conv.channels, conv.kernel_len)?;
            net.push_pool(self.pool_window)?;
        }
        net.push_flatten()?;
        for dense in &self.dense {
            net.push_dense(dense.width, Activation::Relu, dense.dropout)?;
        }
        net.push_dense(self.outputs, Activation::Identity, 0.0)?;
        Ok(net)
    }
}

/// Input tensor shape shared by both architectures: six sensor channels,
/// 256 samples per stride.
pub const INPUT_CHANNELS: usize = 6;
pub const INPUT_LENGTH: usize = 256;

/// Three convolution blocks and three hidden dense layers feeding a
/// five-wide readout, one output per gait parameter.
pub fn build_model_a(preset: Preset) -> NetSpec {
    let (conv_channels, dense_widths) = match preset {
        Preset::Paper => ([32, 64, 128], [2048, 1024, 512]),
        Preset::Desk => ([16, 32, 64], [1024, 512, 256]),
    };
    NetSpec {
        input_channels: INPUT_CHANNELS,
        input_length: INPUT_LENGTH,
        conv: vec![
            ConvSpec { channels: conv_channels[0], kernel_len: 30 },
            ConvSpec { channels: conv_channels[1], kernel_len: 15 },
            ConvSpec { channels: conv_channels[2], kernel_len: 7 },
        ],
        pool_window: 2,
        dense: vec![
            DenseSpec { width: dense_widths[0], dropout: 0.75 },
            DenseSpec { width: dense_widths[1], dropout: 0.5 },
            DenseSpec { width: dense_widths[2], dropout: 0.0 },
        ],
        outputs: 5,
    }
}

/// One ensemble member: two convolution blocks, one hidden dense layer,
/// single-output readout. Five such members cover the five parameters.
pub fn build_model_b_member(preset: Preset) -> NetSpec {
    let (conv_channels, dense_width) = match preset {
        Preset::Paper => ([16, 32], 1024),
        Preset::Desk => ([8, 16], 512),
    };
    NetSpec {
        input_channels: INPUT_CHANNELS,
        input_length: INPUT_LENGTH,
        conv: vec![
            ConvSpec { channels: conv_channels[0], kernel_len: 30 },
            ConvSpec { channels: conv_channels[1], kernel_len: 15 },
        ],
        pool_window: 2,
        dense: vec![DenseSpec { width: dense_width, dropout: 0.5 }],
        outputs: 1,
    }
}
