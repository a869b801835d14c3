//! Experiment execution: single runs, the full suite, and k-fold
//! cross-validation.
//!
//! Seed handling: a master generator seeded from the configuration derives
//! four independent streams in a fixed order (split, weight init, batch
//! shuffling, dropout), so any two runs with the same configuration are
//! bit-identical, and changing one consumer does not disturb the others.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{batches, split, standardize, Dataset, Diagnosis, StatsSource};
use crate::error::{Error, Result};
use crate::metrics::{confusion, rates, ConfusionCounts, MetricReport};
use crate::neighbors::{nn_classify, NeighborIndex};
use crate::numerics::Rng;

use super::config::{validate, ExperimentConfig, ModelKind, ResolvedConfig};
use super::models::build_model;

/// One training-trace sample: batch accuracy and loss at a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub accuracy: f64,
    pub loss: f64,
}

/// Everything a single experiment produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ResolvedConfig,
    pub warnings: Vec<String>,
    /// Confusion counts with malignant as the positive class.
    pub confusion: ConfusionCounts,
    /// Rates with malignant as the positive class.
    pub metrics: MetricReport,
    /// The same rates under the opposite convention (benign positive).
    pub metrics_benign_positive: MetricReport,
    /// Optimizer passes: the step count for trained models, 1 for
    /// nearest-neighbor models.
    pub epochs: usize,
    /// Rows consumed: `steps * batch_size` for trained models, the test
    /// set size for nearest-neighbor models.
    pub data_points_consumed: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub trace: Vec<TracePoint>,
    /// Informational only; never asserted and excluded from suite files.
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn test_accuracy(&self) -> f64 {
        self.metrics.accuracy
    }
}

fn standardized_split(
    data: &Dataset,
    cfg: &ResolvedConfig,
    split_seed: u64,
) -> Result<(Dataset, Dataset)> {
    match cfg.standardization {
        super::StandardizationMode::FullFit => {
            let z = standardize(data, StatsSource::SelfFit)?;
            let pair = split(&z, cfg.split_ratio, split_seed)?;
            Ok((pair.train, pair.test))
        }
        super::StandardizationMode::TrainOnly => {
            let pair = split(data, cfg.split_ratio, split_seed)?;
            let train = standardize(&pair.train, StatsSource::SelfFit)?;
            let (mu, sigma) = train.standardization.clone().expect("just fitted");
            let test = standardize(&pair.test, StatsSource::Provided { mu, sigma })?;
            Ok((train, test))
        }
    }
}

fn evaluate(
    predicted: &[Diagnosis],
    actual: &[Diagnosis],
) -> Result<(ConfusionCounts, MetricReport, MetricReport)> {
    let counts = confusion(predicted, actual, Diagnosis::Malignant)?;
    let malignant_positive = rates(&counts)?;
    let flipped = confusion(predicted, actual, Diagnosis::Benign)?;
    let benign_positive = rates(&flipped)?;
    Ok((counts, malignant_positive, benign_positive))
}

/// Runs one experiment end to end: standardize, split, train (unless
/// nearest-neighbor), evaluate on the held-out test split.
pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<RunReport> {
    let (resolved, warnings) = validate(cfg)?;
    let started = Instant::now();

    let mut master = Rng::new(resolved.seed);
    let split_seed = master.next_u64();
    let mut init_rng = master.derive();
    let batch_rng = master.derive();
    let dropout_rng = master.derive();

    let (train, test) = standardized_split(data, &resolved, split_seed)?;

    let (predicted, epochs, data_points, trace) = if resolved.model.is_trained() {
        let batch_size = resolved.batch_size.expect("validated");
        let steps = resolved.steps.expect("validated");
        let mut model = build_model(&resolved, train.x.cols(), &mut init_rng, dropout_rng)?;
        let mut trace = Vec::with_capacity(steps / resolved.trace_interval);
        for (step, (x, y)) in batches(&train, batch_size, steps, batch_rng)?.enumerate() {
            let stats = model.train_step(&x, &y)?;
            let step = step + 1;
            if step % resolved.trace_interval == 0 {
                trace.push(TracePoint {
                    step,
                    accuracy: stats.batch_accuracy,
                    loss: stats.loss,
                });
            }
        }
        let predicted = model.predict(&test.x)?;
        (predicted, steps, steps * batch_size, trace)
    } else {
        let index = NeighborIndex::new(
            train.x.clone(),
            train.y.clone(),
            resolved.norm.expect("neighbor model has a norm"),
        )?;
        let predicted = nn_classify(&index, &test.x)?;
        (predicted, 1, test.n(), Vec::new())
    };

    let (counts, malignant_positive, benign_positive) = evaluate(&predicted, &test.y)?;
    Ok(RunReport {
        config: resolved,
        warnings,
        confusion: counts,
        metrics: malignant_positive,
        metrics_benign_positive: benign_positive,
        epochs,
        data_points_consumed: data_points,
        train_size: train.n(),
        test_size: test.n(),
        trace,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// One suite entry: the model plus either its report or the error that
/// stopped it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRow {
    pub model: ModelKind,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

impl SuiteRow {
    pub fn succeeded(&self) -> bool {
        self.report.is_some()
    }
}

/// Reports for a batch of experiments, in input order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub rows: Vec<SuiteRow>,
}

impl SuiteResult {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(SuiteRow::succeeded)
    }

    pub fn report_for(&self, model: ModelKind) -> Option<&RunReport> {
        self.rows
            .iter()
            .find(|r| r.model == model)
            .and_then(|r| r.report.as_ref())
    }
}

/// Runs every configuration, continuing past individual failures.
///
/// With `parallel`, independent runs execute concurrently; results are
/// identical either way because each run derives its own random streams.
pub fn run_suite(configs: &[ExperimentConfig], data: &Dataset, parallel: bool) -> SuiteResult {
    let run_one = |cfg: &ExperimentConfig| -> SuiteRow {
        match run_experiment(cfg, data) {
            Ok(report) => SuiteRow {
                model: cfg.model,
                report: Some(report),
                error: None,
            },
            Err(e) => SuiteRow {
                model: cfg.model,
                report: None,
                error: Some(e.to_string()),
            },
        }
    };
    let rows = if parallel {
        configs.par_iter().map(run_one).collect()
    } else {
        configs.iter().map(run_one).collect()
    };
    SuiteResult { rows }
}

/// Per-fold accuracies from k-fold cross-validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KfoldReport {
    pub folds: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Optional k-fold protocol: the seeded permutation is cut into `folds`
/// contiguous chunks; each chunk serves once as the test set.
pub fn run_kfold(cfg: &ExperimentConfig, data: &Dataset, folds: usize) -> Result<KfoldReport> {
    let (resolved, _) = validate(cfg)?;
    if folds < 2 || folds > data.n() {
        return Err(Error::Config(format!(
            "folds must be in [2, {}], got {folds}",
            data.n()
        )));
    }

    let prepared = match resolved.standardization {
        super::StandardizationMode::FullFit => standardize(data, StatsSource::SelfFit)?,
        super::StandardizationMode::TrainOnly => data.clone(),
    };

    let mut master = Rng::new(resolved.seed);
    let mut indices: Vec<usize> = (0..prepared.n()).collect();
    let mut perm_rng = Rng::new(master.next_u64());
    perm_rng.shuffle(&mut indices);

    let select = |idx: &[usize]| Dataset {
        x: prepared.x.select_rows(idx),
        y: idx.iter().map(|&i| prepared.y[i]).collect(),
        feature_names: prepared.feature_names.clone(),
        standardization: prepared.standardization.clone(),
    };

    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let lo = fold * prepared.n() / folds;
        let hi = (fold + 1) * prepared.n() / folds;
        let test_idx = &indices[lo..hi];
        let train_idx: Vec<usize> = indices[..lo]
            .iter()
            .chain(&indices[hi..])
            .copied()
            .collect();
        let (train, test) = match resolved.standardization {
            super::StandardizationMode::FullFit => (select(&train_idx), select(test_idx)),
            super::StandardizationMode::TrainOnly => {
                let train = standardize(&select(&train_idx), StatsSource::SelfFit)?;
                let (mu, sigma) = train.standardization.clone().expect("just fitted");
                let test = standardize(&select(test_idx), StatsSource::Provided { mu, sigma })?;
                (train, test)
            }
        };

        let mut init_rng = master.derive();
        let batch_rng = master.derive();
        let dropout_rng = master.derive();
        let predicted = if resolved.model.is_trained() {
            let batch_size = resolved.batch_size.expect("validated").min(train.n());
            let steps = resolved.steps.expect("validated");
            let mut model = build_model(&resolved, train.x.cols(), &mut init_rng, dropout_rng)?;
            for (x, y) in batches(&train, batch_size, steps, batch_rng)? {
                model.train_step(&x, &y)?;
            }
            model.predict(&test.x)?
        } else {
            let index = NeighborIndex::new(
                train.x.clone(),
                train.y.clone(),
                resolved.norm.expect("neighbor model has a norm"),
            )?;
            nn_classify(&index, &test.x)?
        };
        let hits = predicted
            .iter()
            .zip(&test.y)
            .filter(|(p, a)| p == a)
            .count();
        fold_accuracies.push(hits as f64 / test.n() as f64);
    }

    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
    Ok(KfoldReport {
        folds,
        fold_accuracies,
        mean_accuracy,
    })
}

/// Reads a run report back from its JSON file.
pub fn read_report_json(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("report file: {e}")))
}
