//! `gaitcnn crossval`: patient-wise k-fold evaluation.
//!
//! One or two architectures run under the same fold plan (the split
//! derives from the shared seed, so a comparison is paired patient for
//! patient). The statistical report lands in the output directory and a
//! rendered table goes to stdout.

use gaitcnn::evalstats::{build_report, render_table, run_cv, write_report_files, CvConfig};
use gaitcnn::nets::ModelKind;
use gaitcnn::{Error, Result};

use crate::cmd_train::{load_prepared, model_tag, resolve_train, write_curves};
use crate::config::{
    prepare_out_dir, CenterArg, FileConfig, ModelArg, PresetArg, CONFIG_FORMAT_VERSION,
    DEFAULT_FOLDS,
};

pub fn run(merged: FileConfig, force: bool) -> Result<()> {
    let data = merged
        .data
        .clone()
        .ok_or_else(|| Error::validation("crossval needs --data"))?;
    let out = merged
        .out
        .clone()
        .ok_or_else(|| Error::validation("crossval needs --out"))?;

    let compare = merged.compare.clone();
    if let Some(pair) = &compare {
        if pair.len() != 2 {
            return Err(Error::validation("--compare takes exactly two models"));
        }
        if pair[0] == pair[1] {
            return Err(Error::validation(
                "--compare needs two different models; variances of identical runs are equal by construction",
            ));
        }
    }
    let kinds: Vec<ModelKind> = match &compare {
        Some(pair) => pair.iter().map(|&m| m.into()).collect(),
        None => vec![merged.model.unwrap_or(ModelArg::B).into()],
    };

    let folds = merged.folds.unwrap_or(DEFAULT_FOLDS);
    let (preset, train) = resolve_train(&merged);
    let center = merged.levene_center.unwrap_or(CenterArg::Median);

    prepare_out_dir(&out, force)?;
    let strides = load_prepared(&data)?;

    let mut outcomes = Vec::new();
    for &kind in &kinds {
        let config = CvConfig {
            folds,
            kind,
            preset,
            train: train.clone(),
        };
        println!(
            "cross-validating model {} ({folds} folds, {} iterations)",
            model_tag(kind).to_uppercase(),
            train.iterations
        );
        let outcome = run_cv(&strides, &config)?;
        outcomes.push((kind, outcome));
    }

    let runs: Vec<(ModelKind, &gaitcnn::evalstats::CvOutcome)> =
        outcomes.iter().map(|(k, o)| (*k, o)).collect();
    let report = build_report(&runs, center.into())?;
    write_report_files(&out, &report)?;
    for (kind, outcome) in &outcomes {
        for record in &outcome.folds {
            write_curves(&out, model_tag(*kind), Some(record.fold), &record.curves)?;
        }
    }

    let echo = FileConfig {
        format_version: Some(CONFIG_FORMAT_VERSION),
        command: Some("crossval".into()),
        seed: Some(train.seed),
        preset: Some(merged.preset.unwrap_or(PresetArg::Desk)),
        model: if compare.is_none() { Some(merged.model.unwrap_or(ModelArg::B)) } else { None },
        compare,
        folds: Some(folds),
        iterations: Some(train.iterations),
        batch_size: Some(train.batch_size),
        levene_center: Some(center),
        jobs: merged.jobs,
        data: Some(data),
        out: Some(out.clone()),
        ..FileConfig::default()
    };
    echo.write_echo(&out)?;

    print!("{}", render_table(&report));
    println!("report files under {}", out.display());
    Ok(())
}
