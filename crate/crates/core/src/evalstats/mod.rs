//! Patient-wise cross-validation and statistical model evaluation.
//!
//! The pipeline is: [`split_folds`] assigns patients to folds, [`run_cv`]
//! trains and predicts per fold and pools the prediction/reference pairs,
//! and [`build_report`] condenses the pools into per-target agreement
//! summaries plus an optional two-model variance comparison.
//!
//! The statistical layer (signed-error stats, Bland-Altman, Levene, ICC)
//! and the special functions backing the p-values live here as well and
//! are usable on their own.

mod cv;
mod report;
mod special;
mod stats;

pub use crate::seed::derive_seed;
pub use cv::{
    run_cv, split_folds, train_model, CvConfig, CvOutcome, FoldRecord, PairedSample,
};
pub use report::{
    build_report, render_table, write_report_files, EvalReport, ModelSection, TargetComparison,
    TargetSummary,
};
pub use special::{f_survival, ln_gamma, regularized_incomplete_beta};
pub use stats::{
    bland_altman, error_stats, icc_prediction_agreement, icc_two_way_single, levene, levene_test,
    mean, median, sample_std, BlandAltman, ErrorStats, LeveneCenter, LeveneResult,
    AGREEMENT_FACTOR, LEVENE_ALPHA,
};
