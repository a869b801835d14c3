//! `wdbc` — benchmark runner for WDBC breast-cancer classifiers.
//!
//! Subcommands: `run` (one experiment), `suite` (the full comparison
//! table), `scatter` (plot-data export of a feature group), and `trace`
//! (re-export the training trace from a saved report).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use wdbc_core::dataset::{load_wdbc, standardize, Dataset, StatsSource};
use wdbc_core::experiment::{
    default_suite_configs, export_scatter, export_trace, load_config_file, read_report_json,
    render_text_table, run_experiment, run_kfold, run_suite, write_report_json,
    write_suite_outputs, ExperimentConfig, FeatureGroup, ModelKind, RunReport, StandardizationMode,
};

#[derive(Parser)]
#[command(
    name = "wdbc",
    about = "Train and evaluate breast-cancer classifiers on WDBC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment and report its test metrics.
    Run(RunArgs),
    /// Run every configured experiment and render the comparison table.
    Suite(SuiteArgs),
    /// Export ten feature columns plus labels for scatter plotting.
    Scatter(ScatterArgs),
    /// Re-export the training trace from a saved run report.
    Trace(TraceArgs),
}

#[derive(Args)]
struct CommonOverrides {
    /// Seed for split, initialization, batching, and dropout.
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer steps (each consumes one mini-batch).
    #[arg(long)]
    steps: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    batch: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Train fraction of the train/test split.
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Where standardization statistics are fitted: full | train-only.
    #[arg(long)]
    standardize: Option<String>,
    /// Steps between training-trace samples.
    #[arg(long)]
    trace_interval: Option<usize>,
    /// GRU cell size.
    #[arg(long)]
    cell_size: Option<usize>,
    /// Scalars consumed per GRU time step (must divide 30).
    #[arg(long)]
    gru_input_size: Option<usize>,
    /// Comma-separated MLP hidden layer sizes, e.g. 500,500,500.
    #[arg(long, value_delimiter = ',')]
    hidden_sizes: Option<Vec<usize>>,
    /// Dropout keep probability.
    #[arg(long)]
    dropout_keep: Option<f64>,
    /// SVM penalty parameter C.
    #[arg(long)]
    svm_c: Option<f64>,
}

impl CommonOverrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(steps) = self.steps {
            cfg.steps = Some(steps);
        }
        if let Some(batch) = self.batch {
            cfg.batch_size = Some(batch);
        }
        if let Some(lr) = self.lr {
            cfg.learning_rate = Some(lr);
        }
        if let Some(ratio) = self.split_ratio {
            cfg.split_ratio = Some(ratio);
        }
        if let Some(mode) = &self.standardize {
            cfg.standardization = Some(parse_standardization(mode)?);
        }
        if let Some(interval) = self.trace_interval {
            cfg.trace_interval = Some(interval);
        }
        if let Some(cell) = self.cell_size {
            cfg.cell_size = Some(cell);
        }
        if let Some(input) = self.gru_input_size {
            cfg.gru_input_size = Some(input);
        }
        if let Some(hidden) = &self.hidden_sizes {
            cfg.hidden_sizes = Some(hidden.clone());
        }
        if let Some(keep) = self.dropout_keep {
            cfg.dropout_keep = Some(keep);
        }
        if let Some(c) = self.svm_c {
            cfg.svm_c = Some(c);
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Model: gru-svm | linreg | mlp | nn-l1 | nn-l2 | softmax | svm.
    #[arg(long)]
    model: String,
    /// Path to the WDBC csv file.
    #[arg(long)]
    data: PathBuf,
    /// Experiment file whose matching section seeds the configuration;
    /// command-line flags win over file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the report JSON and trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run k-fold cross-validation instead of the single split.
    #[arg(long)]
    folds: Option<usize>,
    #[command(flatten)]
    overrides: CommonOverrides,
}

#[derive(Args)]
struct SuiteArgs {
    /// Path to the WDBC csv file.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for results.csv and trace files.
    #[arg(long)]
    out: PathBuf,
    /// Experiment file defining the runs (default: the seven standard
    /// configurations); command-line flags win over file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run independent experiments concurrently.
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    overrides: CommonOverrides,
}

#[derive(Args)]
struct ScatterArgs {
    /// Path to the WDBC csv file.
    #[arg(long)]
    data: PathBuf,
    /// Feature group: mean | error | worst.
    #[arg(long)]
    group: String,
    /// Output directory (default: current directory).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Standardize features before exporting.
    #[arg(long)]
    standardized: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// A report JSON written by `run`.
    #[arg(long)]
    report: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_standardization(name: &str) -> anyhow::Result<StandardizationMode> {
    match name {
        "full" => Ok(StandardizationMode::FullFit),
        "train-only" => Ok(StandardizationMode::TrainOnly),
        _ => bail!("unknown standardization mode {name:?}; expected full or train-only"),
    }
}

fn load_data(path: &Path) -> anyhow::Result<Dataset> {
    load_wdbc(path).with_context(|| format!("loading {}", path.display()))
}

fn print_report(report: &RunReport) {
    let m = &report.metrics;
    let pct = |v: Option<f64>| {
        v.map(|v| format!("{:.6}%", v * 100.0))
            .unwrap_or_else(|| "undefined".into())
    };
    println!("model:          {}", report.config.model.display_name());
    println!("seed:           {}", report.config.seed);
    println!(
        "split:          {} train / {} test",
        report.train_size, report.test_size
    );
    println!("epochs:         {}", report.epochs);
    println!("data points:    {}", report.data_points_consumed);
    println!("accuracy:       {:.6}%", m.accuracy * 100.0);
    println!("  positive = malignant:");
    println!(
        "    TPR {} | TNR {} | FPR {} | FNR {}",
        pct(m.tpr),
        pct(m.tnr),
        pct(m.fpr),
        pct(m.fnr)
    );
    let b = &report.metrics_benign_positive;
    println!("  positive = benign:");
    println!(
        "    TPR {} | TNR {} | FPR {} | FNR {}",
        pct(b.tpr),
        pct(b.tnr),
        pct(b.fpr),
        pct(b.fnr)
    );
    println!("wall time:      {:.2}s", report.wall_time_secs);
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let model = ModelKind::parse(&args.model)?;
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            load_config_file(&text)?
                .into_iter()
                .find(|c| c.model == model)
                .with_context(|| {
                    format!(
                        "{} defines no run for model {}",
                        path.display(),
                        model.name()
                    )
                })?
        }
        None => ExperimentConfig::for_model(model),
    };
    args.overrides.apply(&mut cfg)?;
    let data = load_data(&args.data)?;

    if let Some(folds) = args.folds {
        let report = run_kfold(&cfg, &data, folds)?;
        println!("model:          {}", model.display_name());
        println!("folds:          {}", report.folds);
        for (i, acc) in report.fold_accuracies.iter().enumerate() {
            println!("  fold {:>2}:      {:.6}%", i + 1, acc * 100.0);
        }
        println!("mean accuracy:  {:.6}%", report.mean_accuracy * 100.0);
        return Ok(());
    }

    let report = run_experiment(&cfg, &data)?;
    print_report(&report);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let json = out.join(format!("report_{}.json", model.name()));
        write_report_json(&report, &json)?;
        println!("wrote {}", json.display());
        let trace = out.join(format!("trace_{}.csv", model.name()));
        if export_trace(&report, &trace)? {
            println!("wrote {}", trace.display());
        } else {
            println!("no training trace to export (model has no training phase)");
        }
    }
    Ok(())
}

fn cmd_suite(args: &SuiteArgs) -> anyhow::Result<bool> {
    let mut configs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            load_config_file(&text)?
        }
        None => default_suite_configs(args.overrides.seed.unwrap_or(42)),
    };
    for cfg in &mut configs {
        args.overrides.apply(cfg)?;
    }
    let data = load_data(&args.data)?;
    let suite = run_suite(&configs, &data, args.parallel);

    print!("{}", render_text_table(&suite));
    println!("\nWall times (informational):");
    for row in &suite.rows {
        if let Some(report) = &row.report {
            println!(
                "  {:<18} {:>8.2}s",
                row.model.display_name(),
                report.wall_time_secs
            );
        }
    }
    let written = write_suite_outputs(&suite, &args.out)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(suite.all_succeeded())
}

fn cmd_scatter(args: &ScatterArgs) -> anyhow::Result<()> {
    let group = FeatureGroup::parse(&args.group)?;
    let mut data = load_data(&args.data)?;
    if args.standardized {
        data = standardize(&data, StatsSource::SelfFit)?;
    }
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join(format!("scatter_{}.csv", group.name()));
    export_scatter(&data, group, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> anyhow::Result<()> {
    let report = read_report_json(&args.report)?;
    std::fs::create_dir_all(&args.out)?;
    let path = args
        .out
        .join(format!("trace_{}.csv", report.config.model.name()));
    if export_trace(&report, &path)? {
        println!("wrote {}", path.display());
    } else {
        println!("no training trace to export (model has no training phase)");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Suite(args) => cmd_suite(args),
        Command::Scatter(args) => cmd_scatter(args).map(|()| true),
        Command::Trace(args) => cmd_trace(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more runs failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
