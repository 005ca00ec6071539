//! Patient-wise cross-validation: fold assignment, per-fold training, and
//! pooled prediction/reference pairs for downstream agreement statistics.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaitio::TargetId;
use crate::nets::{
    build_model_a, build_model_b_member, Model, ModelKind, Preset, TargetScaler, TrainedNet,
};
use crate::optim::{fit_network, LossCurve, TrainConfig, TrainSet};
use crate::seed::derive_seed;
use crate::strideprep::{PreparedStride, TemporalParams};
use crate::tensorcore::Series;

/// Seed lane reserved for the fold-assignment shuffle so it never collides
/// with the per-member training streams.
const FOLD_LANE: u64 = 0xF0;

/// Assigns patient ids to `folds` groups: ids are deduplicated, sorted,
/// shuffled once, then dealt round-robin. Sorting first makes the result a
/// function of the id set and the seed alone, not of input order.
pub fn split_folds(ids: &[String], folds: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    if folds < 2 {
        return Err(Error::validation("cross-validation needs at least two folds"));
    }
    let mut unique: Vec<String> = ids.to_vec();
    unique.sort();
    unique.dedup();
    if unique.len() < folds {
        return Err(Error::validation(format!(
            "{} folds need at least as many patients, found {}",
            folds,
            unique.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    unique.shuffle(&mut rng);
    let mut groups: Vec<Vec<String>> = vec![Vec::new(); folds];
    for (i, id) in unique.into_iter().enumerate() {
        groups[i % folds].push(id);
    }
    for group in &mut groups {
        group.sort();
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub kind: ModelKind,
    pub preset: Preset,
    pub train: TrainConfig,
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::validation("cross-validation needs at least two folds"));
        }
        self.train.validate()
    }
}

/// One prediction/reference pair for one stride and one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub patient_id: String,
    pub stride_index: usize,
    pub target: TargetId,
    pub prediction: f64,
    pub reference: f64,
}

/// Bookkeeping for a single fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub test_patients: Vec<String>,
    pub train_strides: usize,
    pub test_strides: usize,
    /// Scaler fitted on this fold's training strides; recorded so leakage
    /// is auditable (folds with different training data must disagree).
    pub scaler: TargetScaler,
    /// One curve per trained network, member order.
    pub curves: Vec<LossCurve>,
}

/// Pooled cross-validation result. `samples` holds the regressed targets
/// evaluated on held-out patients only; `temporal` holds the event-based
/// parameters for every stride, since those need no training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub samples: Vec<PairedSample>,
    pub temporal: Vec<PairedSample>,
    pub folds: Vec<FoldRecord>,
}

fn temporal_value(params: &TemporalParams, id: TargetId) -> f64 {
    match id {
        TargetId::StrideTime => params.stride_time_s,
        TargetId::SwingTime => params.swing_time_s,
        TargetId::StanceTime => params.stance_time_s,
        _ => unreachable!("not an event-based target"),
    }
}

/// Trains one model on `strides`. The target scaler is fitted on these
/// strides only, so held-out data never leaks into the scaling. Each
/// member's RNG seed is derived from the base seed, `seed_group` (the fold
/// number under cross-validation), and the member index.
pub fn train_model(
    strides: &[&PreparedStride],
    kind: ModelKind,
    preset: Preset,
    train: &TrainConfig,
    seed_group: u64,
) -> Result<(Model, Vec<LossCurve>)> {
    if strides.is_empty() {
        return Err(Error::validation("training needs at least one stride"));
    }
    train.validate()?;
    let rows: Vec<Vec<f64>> = strides.iter().map(|s| s.reference.learned_vector()).collect();
    let scaler = TargetScaler::fit(&rows)?;
    let inputs: Vec<Series> = strides.iter().map(|s| s.tensor.clone()).collect();

    let mut members = Vec::with_capacity(kind.member_count());
    let mut curves = Vec::with_capacity(kind.member_count());
    match kind {
        ModelKind::A => {
            let spec = build_model_a(preset);
            let mut graph = spec.build()?;
            let scaled: Vec<Vec<f64>> =
                rows.iter().map(|r| scaler.scale_row(r)).collect::<Result<_>>()?;
            let set = TrainSet::new(inputs, scaled)?;
            let mut cfg = train.clone();
            cfg.seed = derive_seed(train.seed, seed_group, 0);
            curves.push(fit_network(&mut graph, &set, &cfg)?);
            members.push(TrainedNet::new(spec, graph)?);
        }
        ModelKind::B => {
            for member in 0..TargetId::LEARNED.len() {
                let spec = build_model_b_member(preset);
                let mut graph = spec.build()?;
                let scaled: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| vec![scaler.scale_value(member, r[member])])
                    .collect();
                let set = TrainSet::new(inputs.clone(), scaled)?;
                let mut cfg = train.clone();
                cfg.seed = derive_seed(train.seed, seed_group, member as u64);
                curves.push(fit_network(&mut graph, &set, &cfg)?);
                members.push(TrainedNet::new(spec, graph)?);
            }
        }
    }
    let model = Model::new(kind, preset, members, scaler)?;
    Ok((model, curves))
}

/// Patient-wise cross-validation over prepared strides. Folds never share
/// patients; each fold trains from scratch on the remaining patients and
/// predicts the held-out ones. Folds run in parallel and are derived from
/// independent seed streams, so the outcome does not depend on scheduling.
pub fn run_cv(strides: &[PreparedStride], config: &CvConfig) -> Result<CvOutcome> {
    config.validate()?;
    if strides.is_empty() {
        return Err(Error::validation("cross-validation needs at least one stride"));
    }
    let ids: Vec<String> = strides.iter().map(|s| s.patient_id.clone()).collect();
    let fold_seed = derive_seed(config.train.seed, FOLD_LANE, 0);
    let groups = split_folds(&ids, config.folds, fold_seed)?;

    let per_fold: Vec<(FoldRecord, Vec<PairedSample>)> = groups
        .par_iter()
        .enumerate()
        .map(|(fold, test_patients)| {
            let held_out: HashSet<&str> = test_patients.iter().map(String::as_str).collect();
            let train_set: Vec<&PreparedStride> = strides
                .iter()
                .filter(|s| !held_out.contains(s.patient_id.as_str()))
                .collect();
            let test_set: Vec<&PreparedStride> = strides
                .iter()
                .filter(|s| held_out.contains(s.patient_id.as_str()))
                .collect();
            let (model, curves) =
                train_model(&train_set, config.kind, config.preset, &config.train, fold as u64)
                    .map_err(|e| match e {
                        Error::Training { iteration, message } => Error::Training {
                            iteration,
                            message: format!("fold {fold}: {message}"),
                        },
                        other => other,
                    })?;

            let mut samples = Vec::with_capacity(test_set.len() * TargetId::LEARNED.len());
            for stride in &test_set {
                let predicted = model.predict_one(&stride.tensor)?;
                for (j, &target) in TargetId::LEARNED.iter().enumerate() {
                    samples.push(PairedSample {
                        patient_id: stride.patient_id.clone(),
                        stride_index: stride.stride_index,
                        target,
                        prediction: predicted[j],
                        reference: stride.reference.get(target),
                    });
                }
            }
            let record = FoldRecord {
                fold,
                test_patients: test_patients.clone(),
                train_strides: train_set.len(),
                test_strides: test_set.len(),
                scaler: model.scaler().clone(),
                curves,
            };
            Ok((record, samples))
        })
        .collect::<Result<_>>()?;

    let mut folds = Vec::with_capacity(per_fold.len());
    let mut samples = Vec::new();
    for (record, fold_samples) in per_fold {
        folds.push(record);
        samples.extend(fold_samples);
    }

    let mut temporal = Vec::with_capacity(strides.len() * TargetId::TEMPORAL.len());
    for stride in strides {
        for &target in &TargetId::TEMPORAL {
            temporal.push(PairedSample {
                patient_id: stride.patient_id.clone(),
                stride_index: stride.stride_index,
                target,
                prediction: temporal_value(&stride.event_temporal, target),
                reference: stride.reference.get(target),
            });
        }
    }

    Ok(CvOutcome {
        samples,
        temporal,
        folds,
    })
}
