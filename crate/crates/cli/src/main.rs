//! `gaitcnn`: train and evaluate stride parameter regressors.
//!
//! Four subcommands cover the pipeline end to end: `synth` writes a
//! synthetic labeled dataset, `train` fits a model and saves checkpoints,
//! `crossval` runs the patient-wise cross-validation with the statistical
//! report, and `predict` applies a saved model to a dataset. Every run
//! echoes its resolved configuration into the output directory; exit
//! codes separate bad input (2), aborted training (3), and I/O (4).

mod cmd_crossval;
mod cmd_predict;
mod cmd_synth;
mod cmd_train;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CenterArg, FileConfig, ModelArg, PresetArg};
use gaitcnn::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "gaitcnn", version, about = "Stride parameter estimation from foot-mounted inertial sensors")]
struct Cli {
    /// TOML configuration file; flags and GAITCNN_* variables override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Cap the worker thread count.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Master seed for data generation, fold splits, and training.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset in the on-disk layout.
    Synth {
        /// Dataset directory to create.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Number of patients.
        #[arg(long)]
        patients: Option<usize>,
        /// Annotated strides per patient.
        #[arg(long)]
        strides: Option<usize>,
        /// Sensor noise std as a fraction of each channel's full range.
        #[arg(long)]
        noise: Option<f64>,
        /// Replace an existing non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Train a model on a full dataset and write checkpoint files.
    Train {
        /// Dataset directory.
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
        /// Output directory for checkpoints and loss curves.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Architecture: one joint network (a) or an ensemble (b).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Network widths and training budget.
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Override the preset's iteration count.
        #[arg(long)]
        iterations: Option<usize>,
        /// Override the preset's mini-batch size.
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        force: bool,
    },
    /// Patient-wise k-fold cross-validation with a statistical report.
    Crossval {
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Evaluate a single architecture.
        #[arg(long, value_enum, conflicts_with = "compare")]
        model: Option<ModelArg>,
        /// Evaluate two architectures and test their error variances
        /// against each other.
        #[arg(long, value_enum, num_args = 2, value_names = ["FIRST", "SECOND"])]
        compare: Option<Vec<ModelArg>>,
        /// Number of patient folds.
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Centering for the variance test.
        #[arg(long, value_enum)]
        levene_center: Option<CenterArg>,
        #[arg(long)]
        force: bool,
    },
    /// Apply saved checkpoints to a dataset, one row of eight parameters
    /// per stride.
    Predict {
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
        /// Checkpoint file(s): one combined file, every member file, or a
        /// directory containing them.
        #[arg(long, value_name = "PATH", num_args = 1..)]
        checkpoint: Option<Vec<PathBuf>>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Training { .. } => 3,
                Error::Io(_) => 4,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env = FileConfig::from_env()?;
    // Global flags join the per-command ones at the highest layer.
    let globals = FileConfig {
        seed: cli.seed,
        jobs: cli.jobs,
        ..FileConfig::default()
    };
    let lower = globals.or(&env).or(&file);

    if let Some(jobs) = lower.jobs {
        if jobs == 0 {
            return Err(Error::validation("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::validation(format!("cannot size the worker pool: {e}")))?;
    }

    match cli.command {
        Command::Synth {
            out,
            patients,
            strides,
            noise,
            force,
        } => {
            let flags = FileConfig {
                out,
                patients,
                strides,
                noise,
                ..FileConfig::default()
            };
            cmd_synth::run(flags.or(&lower), force)
        }
        Command::Train {
            data,
            out,
            model,
            preset,
            iterations,
            batch_size,
            force,
        } => {
            let flags = FileConfig {
                data,
                out,
                model,
                preset,
                iterations,
                batch_size,
                ..FileConfig::default()
            };
            cmd_train::run(flags.or(&lower), force)
        }
        Command::Crossval {
            data,
            out,
            model,
            compare,
            folds,
            preset,
            iterations,
            batch_size,
            levene_center,
            force,
        } => {
            // An explicit flag settles the single-vs-compare question even
            // when the config file says otherwise.
            let single_flag = model.is_some();
            let compare_flag = compare.is_some();
            let flags = FileConfig {
                data,
                out,
                model,
                compare,
                folds,
                preset,
                iterations,
                batch_size,
                levene_center,
                ..FileConfig::default()
            };
            let mut merged = flags.or(&lower);
            if single_flag {
                merged.compare = None;
            }
            if compare_flag {
                merged.model = None;
            }
            cmd_crossval::run(merged, force)
        }
        Command::Predict {
            data,
            checkpoint,
            out,
            force,
        } => {
            let flags = FileConfig {
                data,
                checkpoint,
                out,
                ..FileConfig::default()
            };
            cmd_predict::run(flags.or(&lower), force)
        }
    }
}
