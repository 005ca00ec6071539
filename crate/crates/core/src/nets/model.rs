//! Trained model wrapper: one network or a five-member ensemble, plus the
//! target scaler that maps readouts back to physical units.

use crate::error::{Error, Result};
use crate::gaitio::TargetId;
use crate::nets::build::{ModelKind, NetSpec, Preset};
use crate::nets::graph::NetworkGraph;
use crate::nets::scaler::TargetScaler;
use crate::tensorcore::Series;

/// One network with the spec it was built from.
#[derive(Debug, Clone)]
pub struct TrainedNet {
    pub spec: NetSpec,
    pub graph: NetworkGraph,
}

impl TrainedNet {
    pub fn new(spec: NetSpec, graph: NetworkGraph) -> Result<Self> {
        if graph.output_width() != spec.outputs
            || graph.input_channels() != spec.input_channels
            || graph.input_length() != spec.input_length
        {
            return Err(Error::dimension("network does not match its spec"));
        }
        Ok(TrainedNet { spec, graph })
    }
}

/// A complete estimator. For kind `A` there is a single five-output member;
/// for kind `B` there are five single-output members, one per target in
/// [`TargetId::LEARNED`] order.
#[derive(Debug, Clone)]
pub struct Model {
    kind: ModelKind,
    preset: Preset,
    members: Vec<TrainedNet>,
    scaler: TargetScaler,
}

impl Model {
    pub fn new(
        kind: ModelKind,
        preset: Preset,
        members: Vec<TrainedNet>,
        scaler: TargetScaler,
    ) -> Result<Self> {
        if members.len() != kind.member_count() {
            return Err(Error::validation(format!(
                "model kind {kind} needs {} member networks, got {}",
                kind.member_count(),
                members.len()
            )));
        }
        for member in &members {
            if member.spec.outputs != kind.outputs_per_member() {
                return Err(Error::validation(format!(
                    "model kind {kind} members must have {} outputs, got {}",
                    kind.outputs_per_member(),
                    member.spec.outputs
                )));
            }
        }
        if scaler.n_targets() != TargetId::LEARNED.len() {
            return Err(Error::dimension(format!(
                "scaler covers {} targets, expected {}",
                scaler.n_targets(),
                TargetId::LEARNED.len()
            )));
        }
        Ok(Model {
            kind,
            preset,
            members,
            scaler,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    pub fn members(&self) -> &[TrainedNet] {
        &self.members
    }

    pub fn scaler(&self) -> &TargetScaler {
        &self.scaler
    }

    /// Regressed targets in readout order.
    pub fn targets(&self) -> [TargetId; 5] {
        TargetId::LEARNED
    }

    /// Predicts the five regressed parameters for one stride tensor,
    /// physical units.
    pub fn predict_one(&self, input: &Series) -> Result<Vec<f64>> {
        match self.kind {
            ModelKind::A => {
                let scaled = self.members[0].graph.forward_inference(input)?;
                self.scaler.rescale_row(&scaled)
            }
            ModelKind::B => {
                let mut out = Vec::with_capacity(self.members.len());
                for (j, member) in self.members.iter().enumerate() {
                    let scaled = member.graph.forward_inference(input)?;
                    out.push(self.scaler.rescale_value(j, scaled[0]));
                }
                Ok(out)
            }
        }
    }
}

/// Predicts every stride in `inputs`; row order follows input order.
pub fn predict(model: &Model, inputs: &[Series]) -> Result<Vec<Vec<f64>>> {
    inputs.iter().map(|s| model.predict_one(s)).collect()
}
