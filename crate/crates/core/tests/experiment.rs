//! Harness integration tests: run reports, suite behavior, exports.

mod common;

use common::wdbc;
use wdbc_core::experiment::{
    default_suite_configs, export_scatter, export_trace, load_config_file, render_text_table,
    run_experiment, run_kfold, run_suite, validate, write_report_json, write_suite_outputs,
    ExperimentConfig, FeatureGroup, ModelKind,
};

fn quick_config(model: ModelKind, seed: u64, steps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_model(model);
    cfg.seed = Some(seed);
    if model.is_trained() {
        cfg.steps = Some(steps);
    }
    cfg
}

#[test]
fn nearest_neighbor_consumes_test_set_once() {
    let report = run_experiment(&quick_config(ModelKind::NnL1, 5, 0), wdbc()).unwrap();
    assert_eq!(report.data_points_consumed, 171);
    assert_eq!(report.epochs, 1);
    assert_eq!(report.test_size, 171);
    assert!(report.trace.is_empty());
}

#[test]
fn trained_model_consumes_steps_times_batch() {
    let mut cfg = quick_config(ModelKind::Svm, 5, 40);
    cfg.batch_size = Some(32);
    let report = run_experiment(&cfg, wdbc()).unwrap();
    assert_eq!(report.data_points_consumed, 40 * 32);
    assert_eq!(report.epochs, 40);
}

#[test]
fn zero_learning_rate_training_is_a_no_op() {
    // With lr = 0 the parameters never move, so the number of steps must
    // not affect the test metrics: both equal the untrained evaluation.
    for model in [ModelKind::LinReg, ModelKind::Softmax, ModelKind::Svm] {
        let mut one = quick_config(model, 11, 1);
        one.learning_rate = Some(0.0);
        let mut many = quick_config(model, 11, 17);
        many.learning_rate = Some(0.0);
        let a = run_experiment(&one, wdbc()).unwrap();
        let b = run_experiment(&many, wdbc()).unwrap();
        assert_eq!(a.confusion, b.confusion, "{model:?}");
        assert_eq!(a.metrics.accuracy, b.metrics.accuracy, "{model:?}");
    }
}

#[test]
fn identical_seeds_give_identical_reports() {
    let cfg = quick_config(ModelKind::GruSvm, 31, 20);
    let a = run_experiment(&cfg, wdbc()).unwrap();
    let b = run_experiment(&cfg, wdbc()).unwrap();
    assert_eq!(a.confusion, b.confusion);
    assert_eq!(a.trace, b.trace);
    assert_eq!(
        serde_json::to_string(&a.metrics).unwrap(),
        serde_json::to_string(&b.metrics).unwrap()
    );
}

#[test]
fn trace_respects_interval() {
    let mut cfg = quick_config(ModelKind::Softmax, 3, 300);
    cfg.trace_interval = Some(100);
    let report = run_experiment(&cfg, wdbc()).unwrap();
    assert_eq!(report.trace.len(), 3);
    assert_eq!(report.trace[0].step, 100);
    assert_eq!(report.trace[2].step, 300);
}

#[test]
fn suite_isolates_failures() {
    let mut configs: Vec<ExperimentConfig> = [
        ModelKind::LinReg,
        ModelKind::NnL1,
        ModelKind::NnL2,
        ModelKind::Softmax,
        ModelKind::Svm,
        ModelKind::Mlp,
    ]
    .into_iter()
    .map(|m| quick_config(m, 2, 5))
    .collect();
    // Sabotage one run with an invalid hyperparameter combination.
    configs.push({
        let mut bad = quick_config(ModelKind::GruSvm, 2, 5);
        bad.gru_input_size = Some(7);
        bad
    });

    let suite = run_suite(&configs, wdbc(), false);
    assert_eq!(suite.rows.len(), 7);
    let completed = suite.rows.iter().filter(|r| r.succeeded()).count();
    assert_eq!(completed, 6);
    assert!(!suite.all_succeeded());
    let failed = suite.rows.last().unwrap();
    assert!(failed.error.as_ref().unwrap().contains("gru_input_size"));

    let table = render_text_table(&suite);
    assert!(table.contains("failed"));
    assert!(table.contains("Failed runs:"));
}

#[test]
fn parallel_and_sequential_suites_agree() {
    let configs: Vec<ExperimentConfig> = [ModelKind::LinReg, ModelKind::Softmax, ModelKind::NnL2]
        .into_iter()
        .map(|m| quick_config(m, 9, 25))
        .collect();
    let seq = run_suite(&configs, wdbc(), false);
    let par = run_suite(&configs, wdbc(), true);
    let render_seq = render_text_table(&seq);
    let render_par = render_text_table(&par);
    assert_eq!(render_seq, render_par);
}

#[test]
fn default_suite_has_table_column_order() {
    let configs = default_suite_configs(42);
    let names: Vec<&str> = configs.iter().map(|c| c.model.name()).collect();
    assert_eq!(
        names,
        ["gru-svm", "linreg", "mlp", "nn-l1", "nn-l2", "softmax", "svm"]
    );
}

#[test]
fn scatter_export_selects_groups() {
    let dir = tempfile::tempdir().unwrap();
    for (group, first, last) in [
        (FeatureGroup::Mean, "x0", "x9"),
        (FeatureGroup::Error, "x10", "x19"),
        (FeatureGroup::Worst, "x20", "x29"),
    ] {
        let path = dir.path().join(format!("scatter_{}.csv", group.name()));
        export_scatter(wdbc(), group, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with(&format!("{first},")));
        assert!(header.contains(&format!("{last},label")));
        assert_eq!(lines.count(), 569);
    }
}

#[test]
fn trace_export_and_nn_notice() {
    let dir = tempfile::tempdir().unwrap();
    let trained = run_experiment(&quick_config(ModelKind::Softmax, 3, 200), wdbc()).unwrap();
    let path = dir.path().join("trace.csv");
    assert!(export_trace(&trained, &path).unwrap());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("step,accuracy,loss\n"));
    assert_eq!(text.lines().count(), 1 + trained.trace.len());

    let nn = run_experiment(&quick_config(ModelKind::NnL2, 3, 0), wdbc()).unwrap();
    let nn_path = dir.path().join("trace_nn.csv");
    assert!(!export_trace(&nn, &nn_path).unwrap());
    assert!(!nn_path.exists());
}

#[test]
fn report_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&quick_config(ModelKind::LinReg, 8, 30), wdbc()).unwrap();
    let path = dir.path().join("report.json");
    write_report_json(&report, &path).unwrap();
    let loaded = wdbc_core::experiment::read_report_json(&path).unwrap();
    assert_eq!(loaded.config, report.config);
    assert_eq!(loaded.confusion, report.confusion);
    assert_eq!(loaded.trace, report.trace);
}

#[test]
fn suite_outputs_mirror_the_results_table() {
    let dir = tempfile::tempdir().unwrap();
    let configs: Vec<ExperimentConfig> = ModelKind::ALL
        .into_iter()
        .map(|m| {
            let mut cfg = quick_config(m, 4, 10);
            if m.is_trained() {
                cfg.trace_interval = Some(5);
            }
            cfg
        })
        .collect();
    let suite = run_suite(&configs, wdbc(), true);
    let written = write_suite_outputs(&suite, dir.path()).unwrap();
    let results = dir.path().join("results.csv");
    assert!(written.contains(&results));

    let text = std::fs::read_to_string(&results).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,gru-svm,linreg,mlp,nn-l1,nn-l2,softmax,svm"
    );
    let rows: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        rows,
        [
            "accuracy",
            "data_points",
            "epochs",
            "fpr",
            "fnr",
            "tpr",
            "tnr"
        ]
    );
    // One trace file per trained model, none for the neighbor models.
    for model in ModelKind::ALL {
        let trace = dir.path().join(format!("trace_{}.csv", model.name()));
        assert_eq!(trace.exists(), model.is_trained(), "{model:?}");
    }
}

#[test]
fn config_file_drives_a_suite() {
    let text = r#"
[[run]]
model = "nn-l1"
seed = 3

[[run]]
model = "softmax"
seed = 3
steps = 15
"#;
    let configs = load_config_file(text).unwrap();
    let suite = run_suite(&configs, wdbc(), false);
    assert!(suite.all_succeeded());
    assert_eq!(suite.rows[0].model, ModelKind::NnL1);
    assert_eq!(
        suite.rows[1].report.as_ref().unwrap().data_points_consumed,
        15 * 128
    );
}

#[test]
fn kfold_reports_every_fold() {
    let mut cfg = quick_config(ModelKind::NnL2, 6, 0);
    cfg.standardization = Some(wdbc_core::experiment::StandardizationMode::TrainOnly);
    let report = run_kfold(&cfg, wdbc(), 5).unwrap();
    assert_eq!(report.folds, 5);
    assert_eq!(report.fold_accuracies.len(), 5);
    for acc in &report.fold_accuracies {
        assert!((0.0..=1.0).contains(acc));
    }
    let mean = report.fold_accuracies.iter().sum::<f64>() / 5.0;
    assert!((mean - report.mean_accuracy).abs() < 1e-12);
    // Nearest neighbor on standardized WDBC folds is a strong baseline.
    assert!(report.mean_accuracy > 0.85, "{}", report.mean_accuracy);
}

#[test]
fn svm_loss_trend_is_nonincreasing_under_smoothing() {
    let mut cfg = quick_config(ModelKind::Svm, 42, 3000);
    cfg.trace_interval = Some(1);
    let report = run_experiment(&cfg, wdbc()).unwrap();
    assert_eq!(report.trace.len(), 3000);
    let window_means: Vec<f64> = report
        .trace
        .chunks(100)
        .map(|w| w.iter().map(|p| p.loss).sum::<f64>() / w.len() as f64)
        .collect();
    // Nonincreasing up to mini-batch noise at the convergence plateau
    // (0.5% slack per step), with a strong overall decrease.
    for pair in window_means.windows(2) {
        assert!(
            pair[1] <= pair[0] * 1.005,
            "smoothed loss rose: {} -> {}",
            pair[0],
            pair[1]
        );
    }
    let first = *window_means.first().unwrap();
    let last = *window_means.last().unwrap();
    assert!(last < first * 0.2, "loss only moved {first} -> {last}");
}

#[test]
fn warnings_are_reported_for_ignored_fields() {
    let mut cfg = quick_config(ModelKind::NnL1, 1, 0);
    cfg.learning_rate = Some(0.5);
    let (_, warnings) = validate(&cfg).unwrap();
    assert_eq!(warnings.len(), 1);
    let report = run_experiment(&cfg, wdbc()).unwrap();
    assert_eq!(report.warnings, warnings);
}

#[test]
fn train_only_standardization_avoids_test_statistics() {
    let mut full = quick_config(ModelKind::NnL2, 13, 0);
    full.standardization = Some(wdbc_core::experiment::StandardizationMode::FullFit);
    let mut train_only = quick_config(ModelKind::NnL2, 13, 0);
    train_only.standardization = Some(wdbc_core::experiment::StandardizationMode::TrainOnly);
    let a = run_experiment(&full, wdbc()).unwrap();
    let b = run_experiment(&train_only, wdbc()).unwrap();
    // Same split, slightly different feature scaling; both evaluate 171
    // test rows and land in the same accuracy neighborhood.
    assert_eq!(a.test_size, b.test_size);
    assert!((a.metrics.accuracy - b.metrics.accuracy).abs() < 0.05);
}
