//! Rendering and file export: the results table, per-run trace files,
//! scatter plot data, and report JSON.
//!
//! Suite output files never contain wall-clock times, so two runs with the
//! same seed and configuration produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::MetricReport;

use super::run::{RunReport, SuiteResult};

/// Which ten feature columns a scatter export selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureGroup {
    /// Mean values, columns 0-9.
    Mean,
    /// Standard errors, columns 10-19.
    Error,
    /// "Worst" values, columns 20-29.
    Worst,
}

impl FeatureGroup {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mean" => Ok(FeatureGroup::Mean),
            "error" => Ok(FeatureGroup::Error),
            "worst" => Ok(FeatureGroup::Worst),
            _ => Err(Error::Config(format!(
                "unknown feature group {name:?}; expected mean, error, or worst"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureGroup::Mean => "mean",
            FeatureGroup::Error => "error",
            FeatureGroup::Worst => "worst",
        }
    }

    fn column_range(&self) -> std::ops::Range<usize> {
        match self {
            FeatureGroup::Mean => 0..10,
            FeatureGroup::Error => 10..20,
            FeatureGroup::Worst => 20..30,
        }
    }
}

/// Writes the selected ten feature columns plus the class label as CSV,
/// one row per sample.
pub fn export_scatter(data: &Dataset, group: FeatureGroup, path: &Path) -> Result<()> {
    let range = group.column_range();
    let mut out = String::new();
    let header: Vec<String> = range.clone().map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",label\n");
    for i in 0..data.n() {
        let row = data.x.row(i);
        for j in range.clone() {
            out.push_str(&format!("{},", row[j]));
        }
        out.push_str(data.y[i].code());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes `step,accuracy,loss` rows at the run's trace interval.
///
/// Returns `false` without creating a file when the report has no trace
/// (nearest-neighbor runs have no training phase to record).
pub fn export_trace(report: &RunReport, path: &Path) -> Result<bool> {
    if report.trace.is_empty() {
        return Ok(false);
    }
    let mut out = String::from("step,accuracy,loss\n");
    for point in &report.trace {
        out.push_str(&format!(
            "{},{},{}\n",
            point.step, point.accuracy, point.loss
        ));
    }
    fs::write(path, out)?;
    Ok(true)
}

/// Serializes a full run report as pretty JSON.
pub fn write_report_json(report: &RunReport, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    writeln!(file, "{text}")?;
    Ok(())
}

fn percent(value: f64) -> String {
    format!("{:.6}%", value * 100.0)
}

fn rate_cell(rate: Option<f64>) -> String {
    rate.map(percent).unwrap_or_else(|| "undefined".into())
}

const PARAMETER_ROWS: [&str; 7] = [
    "Accuracy",
    "Data points",
    "Epochs",
    "FPR",
    "FNR",
    "TPR",
    "TNR",
];

fn metric_cells(report: &RunReport, metrics: &MetricReport) -> Vec<String> {
    vec![
        percent(metrics.accuracy),
        report.data_points_consumed.to_string(),
        report.epochs.to_string(),
        rate_cell(metrics.fpr),
        rate_cell(metrics.fnr),
        rate_cell(metrics.tpr),
        rate_cell(metrics.tnr),
    ]
}

fn table_block(suite: &SuiteResult, title: &str, benign_positive: bool) -> String {
    let mut columns: Vec<Vec<String>> = Vec::new();
    let mut headers = vec!["Parameter".to_string()];
    for row in &suite.rows {
        headers.push(row.model.display_name().to_string());
        let cells = match &row.report {
            Some(report) => {
                let metrics = if benign_positive {
                    &report.metrics_benign_positive
                } else {
                    &report.metrics
                };
                metric_cells(report, metrics)
            }
            None => vec!["failed".to_string(); PARAMETER_ROWS.len()],
        };
        columns.push(cells);
    }

    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for (c, column) in columns.iter().enumerate() {
        for cell in column {
            widths[c + 1] = widths[c + 1].max(cell.len());
        }
    }
    for name in PARAMETER_ROWS {
        widths[0] = widths[0].max(name.len());
    }

    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    let header_line: Vec<String> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| format!("{:<width$}", h, width = widths[i]))
        .collect();
    out.push_str(&header_line.join(" | "));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for (r, name) in PARAMETER_ROWS.iter().enumerate() {
        let mut cells = vec![format!("{:<width$}", name, width = widths[0])];
        for (c, column) in columns.iter().enumerate() {
            cells.push(format!("{:<width$}", column[r], width = widths[c + 1]));
        }
        out.push_str(&cells.join(" | "));
        out.push('\n');
    }
    out
}

/// Renders the aligned results table under both positive-class
/// conventions, plus any per-run failures. Deterministic: contains no
/// timing information.
pub fn render_text_table(suite: &SuiteResult) -> String {
    let mut out = table_block(suite, "Test results (positive class = malignant)", false);
    out.push('\n');
    out.push_str(&table_block(
        suite,
        "Rates with benign as the positive class",
        true,
    ));
    let failures: Vec<String> = suite
        .rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("  {}: {}", r.model.display_name(), e))
        })
        .collect();
    if !failures.is_empty() {
        out.push_str("\nFailed runs:\n");
        out.push_str(&failures.join("\n"));
        out.push('\n');
    }
    out
}

fn results_csv(suite: &SuiteResult) -> String {
    let mut out = String::from("parameter");
    for row in &suite.rows {
        out.push(',');
        out.push_str(row.model.name());
    }
    out.push('\n');
    let keys = [
        "accuracy",
        "data_points",
        "epochs",
        "fpr",
        "fnr",
        "tpr",
        "tnr",
    ];
    for (r, key) in keys.iter().enumerate() {
        out.push_str(key);
        for row in &suite.rows {
            out.push(',');
            match &row.report {
                Some(report) => {
                    let cells = metric_cells(report, &report.metrics);
                    out.push_str(cells[r].trim_end_matches('%'));
                }
                None => out.push_str("failed"),
            }
        }
        out.push('\n');
    }
    out
}

/// Writes the machine-readable suite outputs into `out_dir`:
/// `results.csv` (parameter rows by model columns, mirroring the text
/// table's first block) plus one `trace_<model>.csv` per trained run.
/// Returns the created paths.
pub fn write_suite_outputs(suite: &SuiteResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let results = out_dir.join("results.csv");
    fs::write(&results, results_csv(suite))?;
    written.push(results);

    for row in &suite.rows {
        if let Some(report) = &row.report {
            let path = out_dir.join(format!("trace_{}.csv", row.model.name()));
            if export_trace(report, &path)? {
                written.push(path);
            }
        }
    }
    Ok(written)
}
