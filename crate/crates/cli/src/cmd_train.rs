//! `gaitcnn train`: fit one model on a whole dataset.
//!
//! Model A produces a single checkpoint holding the joint network; model
//! B produces one checkpoint per ensemble member. Loss curves are written
//! alongside, one CSV per member.

use std::path::{Path, PathBuf};

use gaitcnn::evalstats::train_model;
use gaitcnn::gaitio::load_dataset;
use gaitcnn::nets::{save_checkpoint, save_member_checkpoint, Model, ModelKind, Preset};
use gaitcnn::optim::{LossCurve, TrainConfig};
use gaitcnn::strideprep::{prepare_dataset, PrepConfig, PreparedStride};
use gaitcnn::{Error, Result};

use crate::config::{
    prepare_out_dir, FileConfig, ModelArg, PresetArg, CONFIG_FORMAT_VERSION, DEFAULT_SEED,
};

/// Training gets seed group 0; evaluation folds derive their own lanes.
const TRAIN_SEED_GROUP: u64 = 0;

pub fn model_tag(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::A => "a",
        ModelKind::B => "b",
    }
}

/// Budget resolution shared with `crossval`: the preset sets iterations
/// and batch size, explicit values override them field by field.
pub fn resolve_train(merged: &FileConfig) -> (Preset, TrainConfig) {
    let preset_arg = merged.preset.unwrap_or(PresetArg::Desk);
    let preset: Preset = preset_arg.into();
    let seed = merged.seed.unwrap_or(DEFAULT_SEED);
    let mut train = TrainConfig::for_preset(preset, seed);
    if let Some(iterations) = merged.iterations {
        train.iterations = iterations;
        // Short exploratory budgets still deserve a loss curve.
        train.loss_every = train.loss_every.min(iterations.max(1));
    }
    if let Some(batch_size) = merged.batch_size {
        train.batch_size = batch_size;
    }
    (preset, train)
}

/// Loads and prepares every stride of the dataset, with the usual
/// per-stride skip logging.
pub fn load_prepared(data: &Path) -> Result<Vec<PreparedStride>> {
    let (recordings, load) = load_dataset(data)?;
    let (strides, prep) = prepare_dataset(&recordings, &PrepConfig::default())?;
    println!(
        "loaded {} patients, {} annotated strides; prepared {} ({} window failures, {} over-long)",
        load.patients, load.strides, prep.strides, prep.failed_windows, prep.overlong_segments
    );
    if strides.is_empty() {
        return Err(Error::validation(format!(
            "{} yields no usable strides",
            data.display()
        )));
    }
    Ok(strides)
}

pub fn write_curves(
    out: &Path,
    tag: &str,
    fold: Option<usize>,
    curves: &[LossCurve],
) -> Result<()> {
    for (member, curve) in curves.iter().enumerate() {
        let name = match fold {
            Some(f) => format!("loss_{tag}_fold{f}_member{member}.csv"),
            None => format!("loss_{tag}_member{member}.csv"),
        };
        curve.write_csv(&out.join(name))?;
    }
    Ok(())
}

fn save_model(out: &Path, model: &Model, metadata: &serde_json::Value) -> Result<Vec<PathBuf>> {
    let tag = model_tag(model.kind());
    let mut paths = Vec::new();
    match model.kind() {
        ModelKind::A => {
            let path = out.join(format!("model_{tag}.ckpt"));
            save_checkpoint(&path, model, metadata)?;
            paths.push(path);
        }
        ModelKind::B => {
            for member in 0..model.members().len() {
                let path = out.join(format!("model_{tag}_member_{member}.ckpt"));
                save_member_checkpoint(&path, model, member, metadata)?;
                paths.push(path);
            }
        }
    }
    Ok(paths)
}

pub fn run(merged: FileConfig, force: bool) -> Result<()> {
    let data = merged
        .data
        .clone()
        .ok_or_else(|| Error::validation("train needs --data"))?;
    let out = merged
        .out
        .clone()
        .ok_or_else(|| Error::validation("train needs --out"))?;
    let model_arg = merged.model.unwrap_or(ModelArg::B);
    let kind: ModelKind = model_arg.into();
    let (preset, train) = resolve_train(&merged);

    prepare_out_dir(&out, force)?;
    let strides = load_prepared(&data)?;
    let refs: Vec<&PreparedStride> = strides.iter().collect();

    let metadata = serde_json::json!({
        "command": "train",
        "dataset": data.to_string_lossy(),
        "strides": refs.len(),
        "model": model_tag(kind),
        "preset": format!("{preset:?}").to_lowercase(),
        "train": train,
    });

    let (model, curves) = train_model(&refs, kind, preset, &train, TRAIN_SEED_GROUP)?;
    let paths = save_model(&out, &model, &metadata)?;
    write_curves(&out, model_tag(kind), None, &curves)?;

    let echo = FileConfig {
        format_version: Some(CONFIG_FORMAT_VERSION),
        command: Some("train".into()),
        seed: Some(train.seed),
        preset: Some(merged.preset.unwrap_or(PresetArg::Desk)),
        model: Some(model_arg),
        iterations: Some(train.iterations),
        batch_size: Some(train.batch_size),
        jobs: merged.jobs,
        data: Some(data),
        out: Some(out.clone()),
        ..FileConfig::default()
    };
    echo.write_echo(&out)?;

    for (path, curve) in paths.iter().zip(&curves) {
        println!(
            "saved {} (final training loss {:.4})",
            path.display(),
            curve.final_trainset_loss().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
