//! Evaluation reports: per-target agreement summaries, optional two-model
//! variance comparison, and the file outputs of an evaluation run.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalstats::cv::CvOutcome;
use crate::evalstats::stats::{
    bland_altman, error_stats, icc_prediction_agreement, levene_test, BlandAltman, LeveneCenter,
    LeveneResult,
};
use crate::gaitio::TargetId;
use crate::nets::ModelKind;

/// Agreement summary for one target under one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub target: TargetId,
    pub n_strides: usize,
    pub n_patients: usize,
    /// Mean signed error (accuracy).
    pub mean_error: f64,
    /// Sample standard deviation of the signed error (precision).
    pub std_error: f64,
    pub bland_altman: BlandAltman,
    pub icc: f64,
}

/// All eight target summaries for one evaluated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub targets: Vec<TargetSummary>,
}

/// Variance comparison between two models on one regressed target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetComparison {
    pub target: TargetId,
    pub levene: LeveneResult,
}

/// Complete evaluation of one or two models. With a single model the
/// comparison section stays empty; with two, every regressed target gets a
/// Levene verdict on the two error distributions. Event-based parameters
/// are identical across models and are never compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub models: Vec<ModelSection>,
    pub comparisons: Vec<TargetComparison>,
    pub levene_center: LeveneCenter,
}

fn pairs_for(outcome: &CvOutcome, target: TargetId) -> (Vec<f64>, Vec<f64>, usize) {
    let pool = if TargetId::TEMPORAL.contains(&target) {
        &outcome.temporal
    } else {
        &outcome.samples
    };
    let mut predictions = Vec::new();
    let mut references = Vec::new();
    let mut patients: HashSet<&str> = HashSet::new();
    for sample in pool.iter().filter(|s| s.target == target) {
        predictions.push(sample.prediction);
        references.push(sample.reference);
        patients.insert(sample.patient_id.as_str());
    }
    (predictions, references, patients.len())
}

fn summarize(outcome: &CvOutcome, target: TargetId) -> Result<TargetSummary> {
    let (predictions, references, n_patients) = pairs_for(outcome, target);
    let errors: Vec<f64> = predictions
        .iter()
        .zip(&references)
        .map(|(&p, &r)| p - r)
        .collect();
    let stats = error_stats(&errors)?;
    let ba = bland_altman(&predictions, &references)?;
    let icc = icc_prediction_agreement(&predictions, &references)?;
    Ok(TargetSummary {
        target,
        n_strides: errors.len(),
        n_patients,
        mean_error: stats.mean,
        std_error: stats.std,
        bland_altman: ba,
        icc,
    })
}

/// Builds the report from one or two cross-validation outcomes.
pub fn build_report(
    runs: &[(ModelKind, &CvOutcome)],
    center: LeveneCenter,
) -> Result<EvalReport> {
    if runs.is_empty() || runs.len() > 2 {
        return Err(Error::validation("a report covers one or two evaluated models"));
    }
    let mut models = Vec::with_capacity(runs.len());
    for &(kind, outcome) in runs {
        let targets = TargetId::ALL
            .iter()
            .map(|&t| summarize(outcome, t))
            .collect::<Result<Vec<_>>>()?;
        models.push(ModelSection { kind, targets });
    }

    let mut comparisons = Vec::new();
    if let [(_, first), (_, second)] = runs {
        for &target in &TargetId::LEARNED {
            let (pa, ra, _) = pairs_for(first, target);
            let (pb, rb, _) = pairs_for(second, target);
            let errors_a: Vec<f64> = pa.iter().zip(&ra).map(|(&p, &r)| p - r).collect();
            let errors_b: Vec<f64> = pb.iter().zip(&rb).map(|(&p, &r)| p - r).collect();
            comparisons.push(TargetComparison {
                target,
                levene: levene_test(&errors_a, &errors_b, center)?,
            });
        }
    }

    Ok(EvalReport {
        models,
        comparisons,
        levene_center: center,
    })
}

fn model_tag(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::A => "a",
        ModelKind::B => "b",
    }
}

/// Writes `report.json`, `report.csv`, and one Bland-Altman point file per
/// model and target into `dir`. Point files are named
/// `bland_altman_<target>.csv` for a single model and gain a model tag
/// (`bland_altman_a_<target>.csv`) when two models are present.
pub fn write_report_files(dir: &Path, report: &EvalReport) -> Result<()> {
    fs::create_dir_all(dir)?;

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::validation(format!("report serialization failed: {e}")))?;
    fs::write(dir.join("report.json"), json + "\n")?;

    let mut csv = std::io::BufWriter::new(fs::File::create(dir.join("report.csv"))?);
    writeln!(
        csv,
        "model,target,unit,n_strides,n_patients,mean_error,std_error,lower_limit,upper_limit,icc"
    )?;
    for section in &report.models {
        for s in &section.targets {
            writeln!(
                csv,
                "{:?},{},{},{},{},{},{},{},{},{}",
                section.kind,
                s.target.key(),
                s.target.unit(),
                s.n_strides,
                s.n_patients,
                s.mean_error,
                s.std_error,
                s.bland_altman.lower_limit,
                s.bland_altman.upper_limit,
                s.icc
            )?;
        }
    }
    csv.flush()?;

    for section in &report.models {
        for s in &section.targets {
            let name = if report.models.len() == 1 {
                format!("bland_altman_{}.csv", s.target.key())
            } else {
                format!("bland_altman_{}_{}.csv", model_tag(section.kind), s.target.key())
            };
            let mut points = std::io::BufWriter::new(fs::File::create(dir.join(name))?);
            writeln!(points, "mean,diff")?;
            for &(m, d) in &s.bland_altman.points {
                writeln!(points, "{m},{d}")?;
            }
            points.flush()?;
        }
    }
    Ok(())
}

/// One "accuracy ± precision" cell.
fn format_cell(mean: f64, std: f64, unit: &str) -> String {
    format!("{mean:.2} ± {std:.2} {unit}")
}

/// Renders the report as a fixed-width text table: one row per target, an
/// accuracy ± precision and ICC column per model, and a variance verdict
/// column when two models were compared.
pub fn render_table(report: &EvalReport) -> String {
    let rows = &report.models[0].targets;
    let mut header: Vec<String> = vec!["target".to_string(), "n".to_string()];
    for section in &report.models {
        header.push(format!("model {:?}", section.kind));
        header.push("ICC".to_string());
    }
    if !report.comparisons.is_empty() {
        header.push("variances".to_string());
    }

    let mut body: Vec<Vec<String>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut cells = vec![row.target.label().to_string(), row.n_strides.to_string()];
        for section in &report.models {
            let s = &section.targets[i];
            cells.push(format_cell(s.mean_error, s.std_error, s.target.unit()));
            cells.push(format!("{:.2}", s.icc));
        }
        if !report.comparisons.is_empty() {
            let verdict = report
                .comparisons
                .iter()
                .find(|c| c.target == row.target)
                .map(|c| if c.levene.significant() { "sign." } else { "n.s." })
                .unwrap_or("-");
            cells.push(verdict.to_string());
        }
        body.push(cells);
    }

    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }

    let mut out = String::new();
    let render_row = |out: &mut String, cells: &[String]| {
        for (i, (cell, &w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:<w$}");
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    render_row(&mut out, &header);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in &body {
        render_row(&mut out, row);
    }
    out
}
