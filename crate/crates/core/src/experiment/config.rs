//! Experiment configuration: model selection, hyperparameter defaults,
//! and validation.
//!
//! Defaults reproduce the benchmark grid: batch 128, 3000 optimizer steps,
//! learning rate 1e-3 (1e-2 for the MLP), GRU cell size 128, hidden sizes
//! 500-500-500, dropout keep probability 0.5, SVM C = 5, split ratio 0.7,
//! seed 42. Fields that a model does not use are ignored with a warning,
//! mirroring the "N/A" cells of a hyperparameter table.

use serde::{Deserialize, Serialize};

use crate::dataset::NUM_FEATURES;
use crate::error::{Error, Result};
use crate::neighbors::Norm;

/// The seven benchmark configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "gru-svm")]
    GruSvm,
    #[serde(rename = "linreg")]
    LinReg,
    #[serde(rename = "mlp")]
    Mlp,
    #[serde(rename = "nn-l1")]
    NnL1,
    #[serde(rename = "nn-l2")]
    NnL2,
    #[serde(rename = "softmax")]
    Softmax,
    #[serde(rename = "svm")]
    Svm,
}

impl ModelKind {
    /// All models in results-table column order.
    pub const ALL: [ModelKind; 7] = [
        ModelKind::GruSvm,
        ModelKind::LinReg,
        ModelKind::Mlp,
        ModelKind::NnL1,
        ModelKind::NnL2,
        ModelKind::Softmax,
        ModelKind::Svm,
    ];

    /// CLI / config-file identifier.
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::GruSvm => "gru-svm",
            ModelKind::LinReg => "linreg",
            ModelKind::Mlp => "mlp",
            ModelKind::NnL1 => "nn-l1",
            ModelKind::NnL2 => "nn-l2",
            ModelKind::Softmax => "softmax",
            ModelKind::Svm => "svm",
        }
    }

    /// Human-readable table header.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::GruSvm => "GRU-SVM",
            ModelKind::LinReg => "Linear Regression",
            ModelKind::Mlp => "MLP",
            ModelKind::NnL1 => "L1-NN",
            ModelKind::NnL2 => "L2-NN",
            ModelKind::Softmax => "Softmax Regression",
            ModelKind::Svm => "SVM",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown model {name:?}; expected one of: {}",
                    ModelKind::ALL.map(|m| m.name()).join(", ")
                ))
            })
    }

    /// Nearest-neighbor models skip the training phase entirely.
    pub fn is_trained(&self) -> bool {
        !matches!(self, ModelKind::NnL1 | ModelKind::NnL2)
    }
}

/// Which data the standardization statistics are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StandardizationMode {
    /// Fit mean/std on the full dataset before splitting (the benchmark's
    /// procedure; leaks test statistics into training by construction).
    #[default]
    FullFit,
    /// Fit on the training split only and apply to the test split.
    TrainOnly,
}

/// One experiment as written by a user: everything optional except the
/// model, with defaults filled in by [`validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub seed: Option<u64>,
    pub split_ratio: Option<f64>,
    pub standardization: Option<StandardizationMode>,
    pub batch_size: Option<usize>,
    pub steps: Option<usize>,
    pub learning_rate: Option<f64>,
    pub cell_size: Option<usize>,
    /// Scalars consumed per GRU time step; must divide the feature count.
    pub gru_input_size: Option<usize>,
    pub hidden_sizes: Option<Vec<usize>>,
    pub dropout_keep: Option<f64>,
    pub svm_c: Option<f64>,
    pub norm: Option<Norm>,
    pub trace_interval: Option<usize>,
}

impl ExperimentConfig {
    pub fn for_model(model: ModelKind) -> Self {
        Self {
            model,
            seed: None,
            split_ratio: None,
            standardization: None,
            batch_size: None,
            steps: None,
            learning_rate: None,
            cell_size: None,
            gru_input_size: None,
            hidden_sizes: None,
            dropout_keep: None,
            svm_c: None,
            norm: None,
            trace_interval: None,
        }
    }
}

/// A fully resolved configuration: defaults applied, irrelevant fields
/// cleared, everything validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub split_ratio: f64,
    pub standardization: StandardizationMode,
    pub trace_interval: usize,
    pub batch_size: Option<usize>,
    pub steps: Option<usize>,
    pub learning_rate: Option<f64>,
    pub cell_size: Option<usize>,
    pub gru_input_size: Option<usize>,
    pub hidden_sizes: Option<Vec<usize>>,
    pub dropout_keep: Option<f64>,
    pub svm_c: Option<f64>,
    pub norm: Option<Norm>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.7;
pub const DEFAULT_BATCH_SIZE: usize = 128;
pub const DEFAULT_STEPS: usize = 3000;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_MLP_LEARNING_RATE: f64 = 1e-2;
pub const DEFAULT_CELL_SIZE: usize = 128;
pub const DEFAULT_GRU_INPUT_SIZE: usize = 1;
pub const DEFAULT_HIDDEN_SIZES: [usize; 3] = [500, 500, 500];
pub const DEFAULT_DROPOUT_KEEP: f64 = 0.5;
pub const DEFAULT_SVM_C: f64 = 5.0;
pub const DEFAULT_TRACE_INTERVAL: usize = 100;

/// Applies per-model defaults and rejects invalid combinations before any
/// compute happens. Returns the resolved configuration plus one warning
/// per ignored field.
pub fn validate(cfg: &ExperimentConfig) -> Result<(ResolvedConfig, Vec<String>)> {
    let mut warnings = Vec::new();
    let model = cfg.model;

    let mut ignore = |set: bool, field: &str| {
        if set {
            warnings.push(format!(
                "{} does not use `{field}`; ignoring it",
                model.display_name()
            ));
        }
    };

    let uses_batches = model.is_trained();
    let uses_cell = model == ModelKind::GruSvm;
    let uses_hidden = model == ModelKind::Mlp;
    let uses_dropout = model == ModelKind::GruSvm;
    let uses_svm_c = matches!(model, ModelKind::GruSvm | ModelKind::Svm);

    if !uses_batches {
        ignore(cfg.batch_size.is_some(), "batch_size");
        ignore(cfg.steps.is_some(), "steps");
        ignore(cfg.learning_rate.is_some(), "learning_rate");
        ignore(cfg.trace_interval.is_some(), "trace_interval");
    }
    if !uses_cell {
        ignore(cfg.cell_size.is_some(), "cell_size");
        ignore(cfg.gru_input_size.is_some(), "gru_input_size");
    }
    if !uses_hidden {
        ignore(cfg.hidden_sizes.is_some(), "hidden_sizes");
    }
    if !uses_dropout {
        ignore(cfg.dropout_keep.is_some(), "dropout_keep");
    }
    if !uses_svm_c {
        ignore(cfg.svm_c.is_some(), "svm_c");
    }
    // The norm is implied by the model everywhere: L1/L2 neighbor search
    // by the model kind, the L2 hinge for the SVM family.
    ignore(cfg.norm.is_some(), "norm");

    let split_ratio = cfg.split_ratio.unwrap_or(DEFAULT_SPLIT_RATIO);
    if !(split_ratio > 0.0 && split_ratio < 1.0) {
        return Err(Error::Config(format!(
            "split_ratio must be in (0, 1), got {split_ratio}"
        )));
    }

    let mut resolved = ResolvedConfig {
        model,
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        split_ratio,
        standardization: cfg.standardization.unwrap_or_default(),
        trace_interval: cfg.trace_interval.unwrap_or(DEFAULT_TRACE_INTERVAL),
        batch_size: None,
        steps: None,
        learning_rate: None,
        cell_size: None,
        gru_input_size: None,
        hidden_sizes: None,
        dropout_keep: None,
        svm_c: None,
        norm: None,
    };

    if resolved.trace_interval == 0 {
        return Err(Error::Config("trace_interval must be >= 1".into()));
    }

    if uses_batches {
        let batch_size = cfg.batch_size.unwrap_or(DEFAULT_BATCH_SIZE);
        let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
        let learning_rate = cfg.learning_rate.unwrap_or(if model == ModelKind::Mlp {
            DEFAULT_MLP_LEARNING_RATE
        } else {
            DEFAULT_LEARNING_RATE
        });
        if batch_size == 0 || steps == 0 {
            return Err(Error::Config("batch_size and steps must be >= 1".into()));
        }
        if learning_rate.is_nan() || learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be nonnegative, got {learning_rate}"
            )));
        }
        resolved.batch_size = Some(batch_size);
        resolved.steps = Some(steps);
        resolved.learning_rate = Some(learning_rate);
    }

    if uses_cell {
        let cell_size = cfg.cell_size.unwrap_or(DEFAULT_CELL_SIZE);
        let input_size = cfg.gru_input_size.unwrap_or(DEFAULT_GRU_INPUT_SIZE);
        if cell_size == 0 {
            return Err(Error::Config("cell_size must be >= 1".into()));
        }
        if input_size == 0 || !NUM_FEATURES.is_multiple_of(input_size) {
            return Err(Error::Config(format!(
                "gru_input_size must divide the feature count {NUM_FEATURES}, got {input_size}"
            )));
        }
        resolved.cell_size = Some(cell_size);
        resolved.gru_input_size = Some(input_size);
    }

    if uses_hidden {
        let hidden = cfg
            .hidden_sizes
            .clone()
            .unwrap_or_else(|| DEFAULT_HIDDEN_SIZES.to_vec());
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Config(
                "hidden_sizes must be non-empty positive values".into(),
            ));
        }
        resolved.hidden_sizes = Some(hidden);
    }

    if uses_dropout {
        let keep = cfg.dropout_keep.unwrap_or(DEFAULT_DROPOUT_KEEP);
        if keep.is_nan() || keep <= 0.0 || keep > 1.0 {
            return Err(Error::Config(format!(
                "dropout_keep must be in (0, 1], got {keep}"
            )));
        }
        resolved.dropout_keep = Some(keep);
    }

    if uses_svm_c {
        let c = cfg.svm_c.unwrap_or(DEFAULT_SVM_C);
        if c.is_nan() || c <= 0.0 {
            return Err(Error::Config(format!("svm_c must be positive, got {c}")));
        }
        resolved.svm_c = Some(c);
    }

    resolved.norm = match model {
        ModelKind::NnL1 => Some(Norm::L1),
        ModelKind::NnL2 => Some(Norm::L2),
        _ => None,
    };

    Ok((resolved, warnings))
}

/// The default seven-model suite, in results-table column order.
pub fn default_suite_configs(seed: u64) -> Vec<ExperimentConfig> {
    ModelKind::ALL
        .into_iter()
        .map(|model| {
            let mut cfg = ExperimentConfig::for_model(model);
            cfg.seed = Some(seed);
            cfg
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    run: Vec<ExperimentConfig>,
}

/// Parses a TOML experiment file: one `[[run]]` section per experiment,
/// flat key-value fields, preserved in file order.
pub fn load_config_file(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
    if file.run.is_empty() {
        return Err(Error::Config("config file defines no runs".into()));
    }
    Ok(file.run)
}
