//! `gaitcnn synth`: write a synthetic labeled dataset.

use std::path::PathBuf;

use gaitcnn::gaitio::write_dataset;
use gaitcnn::synthgait::{generate_dataset, SynthConfig};
use gaitcnn::{Error, Result};

use crate::config::{
    prepare_out_dir, FileConfig, CONFIG_FORMAT_VERSION, DEFAULT_PATIENTS, DEFAULT_SEED,
    DEFAULT_STRIDES_PER_PATIENT, DEFAULT_TOTAL_STRIDES,
};

pub fn run(merged: FileConfig, force: bool) -> Result<()> {
    let out: PathBuf = merged
        .out
        .clone()
        .ok_or_else(|| Error::validation("synth needs --out"))?;
    let seed = merged.seed.unwrap_or(DEFAULT_SEED);
    let patients = merged.patients.unwrap_or(DEFAULT_PATIENTS);
    // The unmodified default cohort mirrors the benchmark scale, where the
    // stride count is not an exact multiple of the patient count.
    let total_strides = match merged.strides {
        Some(per_patient) => patients * per_patient,
        None if patients == DEFAULT_PATIENTS => DEFAULT_TOTAL_STRIDES,
        None => patients * DEFAULT_STRIDES_PER_PATIENT,
    };

    let mut config = SynthConfig {
        patients,
        total_strides,
        seed,
        ..SynthConfig::default()
    };
    if let Some(noise) = merged.noise {
        config.profile.noise_level = noise;
    }

    prepare_out_dir(&out, force)?;
    let recordings = generate_dataset(&config)?;
    write_dataset(&out, &recordings)?;

    let echo = FileConfig {
        format_version: Some(CONFIG_FORMAT_VERSION),
        command: Some("synth".into()),
        seed: Some(seed),
        patients: Some(patients),
        strides: merged.strides,
        noise: Some(config.profile.noise_level),
        jobs: merged.jobs,
        out: Some(out.clone()),
        ..FileConfig::default()
    };
    echo.write_echo(&out)?;

    let strides: usize = recordings.iter().map(|r| r.strides().len()).sum();
    println!(
        "wrote {} patients, {strides} annotated strides to {}",
        recordings.len(),
        out.display()
    );
    Ok(())
}
