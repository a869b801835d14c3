//! Experiment harness: configuration, training runs, the benchmark suite,
//! and plot-data exports.
//!
//! A run is fully determined by its configuration (model choice,
//! hyperparameters, seed): the seed drives the train/test split, weight
//! initialization, batch shuffling, and dropout through independent
//! derived streams, so repeated runs produce bit-identical reports.

mod config;
mod export;
mod models;
mod run;

pub use config::{
    default_suite_configs, load_config_file, validate, ExperimentConfig, ModelKind, ResolvedConfig,
    StandardizationMode,
};
pub use export::{
    export_scatter, export_trace, render_text_table, write_report_json, write_suite_outputs,
    FeatureGroup,
};
pub use run::{
    read_report_json, run_experiment, run_kfold, run_suite, KfoldReport, RunReport, SuiteResult,
    SuiteRow, TracePoint,
};
