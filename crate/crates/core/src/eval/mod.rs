//! Accuracy, folds, cross-validation, the experiment matrix and synthetic data.

pub mod experiment;
pub mod folds;
pub mod metrics;
pub mod synth;

pub use experiment::{
    cross_validate, fit_cell, table_grid, run_experiment_matrix, Algorithm, CellResult,
    ExperimentConfig, MetricsReport, TablePreset, Protocol, DEFAULT_HOLDOUT,
};
pub use folds::{make_folds, stratified_split, FoldPlan};
pub use metrics::accuracy;
pub use synth::{separable_fixture, synthesize, synthesize_dataset, SynthParams};
