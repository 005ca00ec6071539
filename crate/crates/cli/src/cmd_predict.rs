//! `gaitcnn predict`: run saved checkpoints over a dataset.
//!
//! Output is one CSV row per usable stride with all eight parameters,
//! the five regressed ones followed by the three event-based times.
//! Strides the preparation stage rejects (failed event detection,
//! over-long segments) are logged and skipped; the run continues.

use std::io::Write;
use std::path::PathBuf;

use gaitcnn::gaitio::TargetId;
use gaitcnn::nets::load_model;
use gaitcnn::{Error, Result};

use crate::cmd_train::{load_prepared, model_tag};
use crate::config::{prepare_out_dir, FileConfig, CONFIG_FORMAT_VERSION};

/// A directory argument stands for every checkpoint file inside it.
fn resolve_checkpoints(given: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if let [single] = given {
        if single.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(single)?
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .map(|e| e.path())
                .filter(|p| p.extension().map_or(false, |x| x == "ckpt"))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(Error::validation(format!(
                    "{} contains no .ckpt files",
                    single.display()
                )));
            }
            return Ok(found);
        }
    }
    Ok(given.to_vec())
}

pub fn run(merged: FileConfig, force: bool) -> Result<()> {
    let data = merged
        .data
        .clone()
        .ok_or_else(|| Error::validation("predict needs --data"))?;
    let out = merged
        .out
        .clone()
        .ok_or_else(|| Error::validation("predict needs --out"))?;
    let given = merged
        .checkpoint
        .clone()
        .ok_or_else(|| Error::validation("predict needs --checkpoint"))?;

    let paths = resolve_checkpoints(&given)?;
    let (model, _metadata) = load_model(&paths)?;
    println!(
        "loaded model {} from {} file(s)",
        model_tag(model.kind()).to_uppercase(),
        paths.len()
    );

    prepare_out_dir(&out, force)?;
    let strides = load_prepared(&data)?;

    let mut header = vec!["patient_id".to_string(), "foot".to_string(), "stride".to_string()];
    header.extend(TargetId::LEARNED.iter().map(|t| t.key().to_string()));
    header.extend(TargetId::TEMPORAL.iter().map(|t| t.key().to_string()));

    let csv_path = out.join("predictions.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    writeln!(file, "{}", header.join(","))?;
    let mut rows = 0usize;
    for stride in &strides {
        let learned = model.predict_one(&stride.tensor)?;
        let mut cells = vec![
            stride.patient_id.clone(),
            stride.foot.key().to_string(),
            stride.stride_index.to_string(),
        ];
        cells.extend(learned.iter().map(|v| v.to_string()));
        let t = &stride.event_temporal;
        for value in [t.stride_time_s, t.swing_time_s, t.stance_time_s] {
            cells.push(value.to_string());
        }
        writeln!(file, "{}", cells.join(","))?;
        rows += 1;
    }
    file.flush()?;

    let echo = FileConfig {
        format_version: Some(CONFIG_FORMAT_VERSION),
        command: Some("predict".into()),
        jobs: merged.jobs,
        data: Some(data),
        out: Some(out.clone()),
        checkpoint: Some(paths),
        ..FileConfig::default()
    };
    echo.write_echo(&out)?;

    println!("wrote {rows} strides to {}", csv_path.display());
    Ok(())
}
