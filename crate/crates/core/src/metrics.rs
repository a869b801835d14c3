//! Confusion-matrix accounting and the derived classification rates.

use crate::dataset::Diagnosis;
use crate::error::{Error, Result};

/// 2x2 tally of a binary classifier's outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }
}

/// Accuracy plus the four rates; a rate whose denominator is zero is
/// reported as `None` rather than 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    /// Sensitivity / recall: `tp / (tp + fn)`.
    pub tpr: Option<f64>,
    /// Specificity: `tn / (tn + fp)`.
    pub tnr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
}

/// Tallies predictions against ground truth with the given positive class.
pub fn confusion(
    predicted: &[Diagnosis],
    actual: &[Diagnosis],
    positive: Diagnosis,
) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::dim(
            "confusion",
            (predicted.len(), 1),
            (actual.len(), 1),
        ));
    }
    if predicted.is_empty() {
        return Err(Error::Config("confusion needs at least one sample".into()));
    }
    let mut counts = ConfusionCounts {
        true_pos: 0,
        true_neg: 0,
        false_pos: 0,
        false_neg: 0,
    };
    for (p, a) in predicted.iter().zip(actual) {
        match (*p == positive, *a == positive) {
            (true, true) => counts.true_pos += 1,
            (false, false) => counts.true_neg += 1,
            (true, false) => counts.false_pos += 1,
            (false, true) => counts.false_neg += 1,
        }
    }
    Ok(counts)
}

/// Derives accuracy, TPR, TNR, FPR, and FNR from the tallies.
pub fn rates(c: &ConfusionCounts) -> Result<MetricReport> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Config("confusion counts are all zero".into()));
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let actual_pos = c.true_pos + c.false_neg;
    let actual_neg = c.true_neg + c.false_pos;
    Ok(MetricReport {
        accuracy: (c.true_pos + c.true_neg) as f64 / total as f64,
        tpr: ratio(c.true_pos, actual_pos),
        tnr: ratio(c.true_neg, actual_neg),
        fpr: ratio(c.false_pos, actual_neg),
        fnr: ratio(c.false_neg, actual_pos),
    })
}
