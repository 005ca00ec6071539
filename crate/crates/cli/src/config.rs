//! Layered run configuration.
//!
//! Values resolve in fixed precedence: command-line flags beat
//! `GAITCNN_*` environment variables, which beat the `--config` TOML
//! file, which beats built-in defaults. Training budgets default from
//! the resolved preset and can then be overridden individually.
//!
//! Every command echoes its fully resolved configuration as
//! `run_config.toml` into the output directory. The echo uses the same
//! schema as the `--config` input, so a run can be repeated by pointing
//! `--config` at a previous run's echo.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use gaitcnn::evalstats::LeveneCenter;
use gaitcnn::nets::{ModelKind, Preset};
use gaitcnn::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FOLDS: usize = 10;
/// Cohort written by `synth` when patients and strides are left at their
/// defaults; mirrors the benchmark scale of 1185 strides over 99 patients.
pub const DEFAULT_PATIENTS: usize = 99;
pub const DEFAULT_TOTAL_STRIDES: usize = 1185;
pub const DEFAULT_STRIDES_PER_PATIENT: usize = 12;

pub const CONFIG_FORMAT_VERSION: u32 = 1;
const ENV_PREFIX: &str = "GAITCNN_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    A,
    B,
}

impl From<ModelArg> for ModelKind {
    fn from(arg: ModelArg) -> ModelKind {
        match arg {
            ModelArg::A => ModelKind::A,
            ModelArg::B => ModelKind::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetArg {
    Paper,
    Desk,
}

impl From<PresetArg> for Preset {
    fn from(arg: PresetArg) -> Preset {
        match arg {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Desk => Preset::Desk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterArg {
    Mean,
    Median,
}

impl From<CenterArg> for LeveneCenter {
    fn from(arg: CenterArg) -> LeveneCenter {
        match arg {
            CenterArg::Mean => LeveneCenter::Mean,
            CenterArg::Median => LeveneCenter::Median,
        }
    }
}

/// One flat key/value document shared by the `--config` input and the
/// `run_config.toml` echo. Unknown keys are rejected so typos fail loud.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format_version: Option<u32>,
    /// Which subcommand wrote the echo; informational on input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<Vec<ModelArg>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patients: Option<usize>,
    /// Annotated strides per patient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strides: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levene_center: Option<CenterArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<Vec<PathBuf>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(1);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    /// Environment overrides, `GAITCNN_<KEY>` per field.
    pub fn from_env() -> Result<Self> {
        Ok(FileConfig {
            format_version: None,
            command: None,
            seed: env_parsed("SEED")?,
            preset: env_enum("PRESET")?,
            model: env_enum("MODEL")?,
            compare: None,
            folds: env_parsed("FOLDS")?,
            iterations: env_parsed("ITERATIONS")?,
            batch_size: env_parsed("BATCH_SIZE")?,
            jobs: env_parsed("JOBS")?,
            patients: env_parsed("PATIENTS")?,
            strides: env_parsed("STRIDES")?,
            noise: env_parsed("NOISE")?,
            levene_center: env_enum("LEVENE_CENTER")?,
            data: None,
            out: None,
            checkpoint: None,
        })
    }

    /// Fills unset fields from `lower`-precedence values.
    pub fn or(self, lower: &FileConfig) -> Self {
        FileConfig {
            format_version: self.format_version.or(lower.format_version),
            command: self.command.or_else(|| lower.command.clone()),
            seed: self.seed.or(lower.seed),
            preset: self.preset.or(lower.preset),
            model: self.model.or(lower.model),
            compare: self.compare.or_else(|| lower.compare.clone()),
            folds: self.folds.or(lower.folds),
            iterations: self.iterations.or(lower.iterations),
            batch_size: self.batch_size.or(lower.batch_size),
            jobs: self.jobs.or(lower.jobs),
            patients: self.patients.or(lower.patients),
            strides: self.strides.or(lower.strides),
            noise: self.noise.or(lower.noise),
            levene_center: self.levene_center.or(lower.levene_center),
            data: self.data.or_else(|| lower.data.clone()),
            out: self.out.or_else(|| lower.out.clone()),
            checkpoint: self.checkpoint.or_else(|| lower.checkpoint.clone()),
        }
    }

    /// Writes the echo file a later run can be pointed back at.
    pub fn write_echo(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::validation(format!("cannot encode run config: {e}")))?;
        std::fs::write(dir.join("run_config.toml"), text)?;
        Ok(())
    }
}

fn env_raw(key: &str) -> Result<Option<String>> {
    match std::env::var(format!("{ENV_PREFIX}{key}")) {
        Ok(v) if v.is_empty() => Ok(None),
        Ok(v) => Ok(Some(v)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::validation(format!("{ENV_PREFIX}{key}: {e}"))),
    }
}

fn env_parsed<T: std::str::FromStr>(key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    env_raw(key)?
        .map(|v| {
            v.parse()
                .map_err(|e| Error::validation(format!("{ENV_PREFIX}{key}={v:?}: {e}")))
        })
        .transpose()
}

fn env_enum<T: ValueEnum>(key: &str) -> Result<Option<T>> {
    env_raw(key)?
        .map(|v| {
            T::from_str(&v, true)
                .map_err(|e| Error::validation(format!("{ENV_PREFIX}{key}={v:?}: {e}")))
        })
        .transpose()
}

/// Validates and empties the output directory. A non-empty directory is
/// only replaced under `--force`; everything inside it is removed so the
/// run's artifacts are never mixed with stale files.
pub fn prepare_out_dir(path: &Path, force: bool) -> Result<()> {
    if path.exists() {
        if !path.is_dir() {
            return Err(Error::validation(format!(
                "{} exists and is not a directory",
                path.display()
            )));
        }
        if std::fs::read_dir(path)?.next().is_some() {
            if !force {
                return Err(Error::validation(format!(
                    "{} is not empty; pass --force to replace it",
                    path.display()
                )));
            }
            std::fs::remove_dir_all(path)?;
        }
    }
    std::fs::create_dir_all(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "seed = 7\nitertions = 9\n").unwrap();
        let err = FileConfig::load(&path).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bad.toml"), "got {text}");
        assert!(text.contains("itertions"), "got {text}");

        // Malformed syntax keeps its line number.
        std::fs::write(&path, "seed = 7\nnoise 0.1\n").unwrap();
        let err = FileConfig::load(&path).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bad.toml:2"), "got {text}");
    }

    #[test]
    fn echo_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let config = FileConfig {
            format_version: Some(CONFIG_FORMAT_VERSION),
            command: Some("synth".into()),
            seed: Some(7),
            patients: Some(3),
            strides: Some(5),
            noise: Some(0.005),
            out: Some(PathBuf::from("data")),
            ..FileConfig::default()
        };
        config.write_echo(dir.path()).unwrap();
        let back = FileConfig::load(&dir.path().join("run_config.toml")).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn precedence_is_flag_env_file() {
        let file = FileConfig {
            seed: Some(1),
            folds: Some(4),
            patients: Some(9),
            ..FileConfig::default()
        };
        let env = FileConfig {
            seed: Some(2),
            folds: Some(5),
            ..FileConfig::default()
        };
        let flags = FileConfig {
            seed: Some(3),
            ..FileConfig::default()
        };
        let merged = flags.or(&env).or(&file);
        assert_eq!(merged.seed, Some(3));
        assert_eq!(merged.folds, Some(5));
        assert_eq!(merged.patients, Some(9));
    }

    #[test]
    fn out_dir_rules() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        prepare_out_dir(&out, false).unwrap();
        // Empty directory is reusable without force.
        prepare_out_dir(&out, false).unwrap();
        std::fs::write(out.join("x"), "y").unwrap();
        assert!(prepare_out_dir(&out, false).is_err());
        prepare_out_dir(&out, true).unwrap();
        assert!(!out.join("x").exists());
    }
}
