//! Mini-batch training loop.
//!
//! Batches are drawn uniformly with replacement. Per iteration the rng is
//! consumed in a fixed order: first the sample indices, then one dropout
//! mask per sample and dropout slot. Training is therefore a pure function
//! of the initial network, the data, and the rng state.

use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::{NetGrads, NetworkGraph, Preset};
use crate::optim::adam::{AdamConfig, AdamState};
use crate::optim::init::init_network;
use crate::optim::loss::{loss_backward, loss_sum_rmse};
use crate::tensorcore::{DropoutMask, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    /// Evaluate the loss over the full training set every this many
    /// iterations (and at the final one).
    pub loss_every: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl TrainConfig {
    /// Iteration and batch budgets that pair with the architecture presets.
    pub fn for_preset(preset: Preset, seed: u64) -> Self {
        let (iterations, batch_size) = match preset {
            Preset::Paper => (4000, 100),
            Preset::Desk => (500, 32),
        };
        TrainConfig {
            iterations,
            batch_size,
            loss_every: 50,
            adam: AdamConfig::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::validation("iterations must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        if self.loss_every == 0 {
            return Err(Error::validation("loss interval must be at least 1"));
        }
        self.adam.validate()
    }
}

/// Training inputs with their scaled regression targets, index-aligned.
#[derive(Debug, Clone)]
pub struct TrainSet {
    inputs: Vec<Series>,
    targets: Vec<Vec<f64>>,
}

impl TrainSet {
    pub fn new(inputs: Vec<Series>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::validation("training set is empty"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::dimension(format!(
                "{} inputs vs {} target rows",
                inputs.len(),
                targets.len()
            )));
        }
        let width = targets[0].len();
        let (channels, length) = (inputs[0].channels(), inputs[0].length());
        for (input, target) in inputs.iter().zip(&targets) {
            if input.channels() != channels || input.length() != length {
                return Err(Error::dimension("training inputs have mixed shapes"));
            }
            if target.len() != width {
                return Err(Error::dimension("ragged training targets"));
            }
            if !target.iter().all(|v| v.is_finite()) {
                return Err(Error::validation("training targets must be finite"));
            }
        }
        Ok(TrainSet { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn target_width(&self) -> usize {
        self.targets[0].len()
    }

    pub fn inputs(&self) -> &[Series] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub iteration: usize,
    pub minibatch_loss: f64,
    pub trainset_loss: Option<f64>,
}

/// Loss trajectory of one training run, one row per iteration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossCurve {
    rows: Vec<LossRow>,
}

impl LossCurve {
    pub fn rows(&self) -> &[LossRow] {
        &self.rows
    }

    pub fn final_trainset_loss(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.trainset_loss)
    }

    pub fn first_trainset_loss(&self) -> Option<f64> {
        self.rows.iter().find_map(|r| r.trainset_loss)
    }

    /// Least-squares slope of the full-set loss over its last `window`
    /// evaluations, in loss units per iteration. `None` with fewer than two
    /// points.
    pub fn tail_slope(&self, window: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.trainset_loss.map(|l| (r.iteration as f64, l)))
            .collect();
        let tail = if pts.len() > window { &pts[pts.len() - window..] } else { &pts[..] };
        if tail.len() < 2 {
            return None;
        }
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if den == 0.0 {
            return None;
        }
        Some(num / den)
    }

    /// CSV with header `iteration,minibatch_loss,trainset_loss`; the last
    /// column is empty on iterations without a full-set evaluation.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "iteration,minibatch_loss,trainset_loss")?;
        for row in &self.rows {
            match row.trainset_loss {
                Some(l) => writeln!(file, "{},{},{}", row.iteration, row.minibatch_loss, l)?,
                None => writeln!(file, "{},{},", row.iteration, row.minibatch_loss)?,
            }
        }
        file.flush()?;
        Ok(())
    }
}

/// Loss over the whole training set with dropout disabled.
pub fn full_set_loss(net: &NetworkGraph, set: &TrainSet) -> Result<f64> {
    let mut preds = Vec::with_capacity(set.len());
    for input in set.inputs() {
        preds.push(net.forward_inference(input)?);
    }
    loss_sum_rmse(&preds, set.targets())
}

/// Runs the mini-batch loop on an already initialized network.
pub fn train_network<R: Rng>(
    net: &mut NetworkGraph,
    set: &TrainSet,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<LossCurve> {
    config.validate()?;
    if net.output_width() != set.target_width() {
        return Err(Error::dimension(format!(
            "network outputs {} values but targets have width {}",
            net.output_width(),
            set.target_width()
        )));
    }
    let layout = net.dropout_layout();
    let mut adam = AdamState::new(config.adam, &net.tensor_sizes())?;
    let mut acc = NetGrads::zeros_like(net);
    let mut rows = Vec::with_capacity(config.iterations);

    for iteration in 1..=config.iterations {
        let indices: Vec<usize> =
            (0..config.batch_size).map(|_| rng.gen_range(0..set.len())).collect();
        let masks: Vec<Vec<DropoutMask>> = (0..config.batch_size)
            .map(|_| {
                layout
                    .iter()
                    .map(|&(width, p)| DropoutMask::sample(width, p, rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut passes = Vec::with_capacity(config.batch_size);
        let mut preds = Vec::with_capacity(config.batch_size);
        let mut refs = Vec::with_capacity(config.batch_size);
        for (&idx, sample_masks) in indices.iter().zip(&masks) {
            let pass = net.forward_train(&set.inputs()[idx], sample_masks)?;
            preds.push(pass.output.clone());
            refs.push(set.targets()[idx].clone());
            passes.push(pass);
        }

        let minibatch_loss = loss_sum_rmse(&preds, &refs)?;
        if !minibatch_loss.is_finite() {
            return Err(Error::Training {
                iteration,
                message: format!("loss became {minibatch_loss}"),
            });
        }

        // The loss gradient already carries the 1/batch factor, so the
        // per-sample parameter gradients just add up.
        let out_grads = loss_backward(&preds, &refs)?;
        for tensor in acc.tensors.iter_mut() {
            tensor.fill(0.0);
        }
        for (pass, grad) in passes.iter().zip(&out_grads) {
            let sample = net.backward(grad, &pass.cache)?;
            acc.accumulate(&sample)?;
        }
        {
            let mut tensors = net.param_tensors_mut();
            let mut views: Vec<&mut [f64]> =
                tensors.iter_mut().map(|t| t.values.as_mut_slice()).collect();
            let gviews: Vec<&[f64]> = acc.tensors.iter().map(|v| v.as_slice()).collect();
            adam.step(&mut views, &gviews)?;
        }

        let trainset_loss = if iteration % config.loss_every == 0 || iteration == config.iterations
        {
            Some(full_set_loss(net, set)?)
        } else {
            None
        };
        rows.push(LossRow {
            iteration,
            minibatch_loss,
            trainset_loss,
        });
    }
    Ok(LossCurve { rows })
}

/// Initializes the network from `config.seed` and trains it; the one-stop
/// entry used per fold and ensemble member.
pub fn fit_network(net: &mut NetworkGraph, set: &TrainSet, config: &TrainConfig) -> Result<LossCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_network(net, &mut rng);
    train_network(net, set, config, &mut rng)
}
