//! WDBC dataset loading, standardization, splitting, and batching.
//!
//! The input file is the UCI layout: one record per line,
//! `id,diagnosis,f1..f30`, with diagnosis `M` or `B`. A header line is
//! skipped if its second field is not a diagnosis code. Each record carries
//! 30 features: 10 cell-nucleus measurements, each reported as mean,
//! standard error, and "worst" value.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// The ten base cell-nucleus measurements.
const BASE_FEATURES: [&str; 10] = [
    "radius",
    "texture",
    "perimeter",
    "area",
    "smoothness",
    "compactness",
    "concavity",
    "concave points",
    "symmetry",
    "fractal dimension",
];

pub const NUM_FEATURES: usize = 30;

/// Canonical names for the 30 feature columns, in file order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(NUM_FEATURES);
    for base in BASE_FEATURES {
        names.push(format!("mean {base}"));
    }
    for base in BASE_FEATURES {
        names.push(format!("{base} error"));
    }
    for base in BASE_FEATURES {
        names.push(format!("worst {base}"));
    }
    names
}

/// Diagnosis label. Malignant is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Diagnosis {
    Malignant,
    Benign,
}

impl Diagnosis {
    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "M" => Some(Diagnosis::Malignant),
            "B" => Some(Diagnosis::Benign),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Diagnosis::Malignant => "M",
            Diagnosis::Benign => "B",
        }
    }

    /// Class index used for one-hot columns and argmax predictions:
    /// benign = 0, malignant = 1.
    pub fn class_index(self) -> usize {
        match self {
            Diagnosis::Benign => 0,
            Diagnosis::Malignant => 1,
        }
    }

    pub fn from_class_index(index: usize) -> Self {
        if index == 0 {
            Diagnosis::Benign
        } else {
            Diagnosis::Malignant
        }
    }
}

/// One patient sample as parsed from the file.
#[derive(Debug, Clone, PartialEq)]
pub struct WdbcRecord {
    pub id: String,
    pub diagnosis: Diagnosis,
    pub features: Vec<f64>,
}

/// Feature matrix plus labels, with optional standardization statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<Diagnosis>,
    pub feature_names: Vec<String>,
    /// `(mu, sigma)` per column when the features have been standardized.
    pub standardization: Option<(Vec<f64>, Vec<f64>)>,
}

/// Source of standardization statistics.
#[derive(Debug, Clone)]
pub enum StatsSource {
    /// Fit mean and population standard deviation on this dataset.
    SelfFit,
    /// Apply externally fitted statistics (e.g. from a training split).
    Provided { mu: Vec<f64>, sigma: Vec<f64> },
}

/// A seeded train/test partition.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    /// `(malignant, benign)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let malignant = self
            .y
            .iter()
            .filter(|d| **d == Diagnosis::Malignant)
            .count();
        (malignant, self.y.len() - malignant)
    }

    fn from_records(records: Vec<WdbcRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let cols = records[0].features.len();
        let mut data = Vec::with_capacity(records.len() * cols);
        let mut y = Vec::with_capacity(records.len());
        for r in &records {
            data.extend_from_slice(&r.features);
            y.push(r.diagnosis);
        }
        Ok(Dataset {
            x: Matrix::from_vec(records.len(), cols, data)?,
            y,
            feature_names: feature_names(),
            standardization: None,
        })
    }
}

/// Parses the UCI-layout WDBC text into a [`Dataset`].
///
/// Records keep file order. Lines are 1-indexed in error messages. The
/// first line is treated as a header and skipped when its second field is
/// not a diagnosis code.
pub fn parse_wdbc(text: &str) -> Result<Dataset> {
    let mut records = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if line_no == 1 && fields.len() >= 2 && Diagnosis::from_code(fields[1].trim()).is_none() {
            continue; // header
        }
        if fields.len() != 2 + NUM_FEATURES {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {} comma-separated fields, found {}",
                    2 + NUM_FEATURES,
                    fields.len()
                ),
            });
        }
        let diagnosis = Diagnosis::from_code(fields[1].trim()).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unknown diagnosis code {:?}", fields[1]),
        })?;
        let mut features = Vec::with_capacity(NUM_FEATURES);
        for (i, raw) in fields[2..].iter().enumerate() {
            let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("feature {} is not numeric: {:?}", i + 1, raw),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("feature {} is not finite: {:?}", i + 1, raw),
                });
            }
            features.push(value);
        }
        records.push(WdbcRecord {
            id: fields[0].trim().to_string(),
            diagnosis,
            features,
        });
    }
    Dataset::from_records(records)
}

/// Reads and parses a WDBC file from disk.
pub fn load_wdbc(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_wdbc(&text)
}

/// Z-score standardization: `z = (x - mu) / sigma` per column.
///
/// Under [`StatsSource::SelfFit`] the mean and population standard
/// deviation are fitted on `data` itself; the fitted (or provided)
/// statistics are recorded in the result.
pub fn standardize(data: &Dataset, stats: StatsSource) -> Result<Dataset> {
    let n = data.n();
    let cols = data.x.cols();
    let (mu, sigma) = match stats {
        StatsSource::SelfFit => {
            let mut mu = vec![0.0; cols];
            let mut sigma = vec![0.0; cols];
            for j in 0..cols {
                let mut sum = 0.0;
                for i in 0..n {
                    sum += data.x.get(i, j);
                }
                let mean = sum / n as f64;
                let mut ss = 0.0;
                for i in 0..n {
                    let d = data.x.get(i, j) - mean;
                    ss += d * d;
                }
                mu[j] = mean;
                sigma[j] = (ss / n as f64).sqrt();
            }
            (mu, sigma)
        }
        StatsSource::Provided { mu, sigma } => {
            if mu.len() != cols || sigma.len() != cols {
                return Err(Error::Config(format!(
                    "provided statistics have {} / {} entries for {} columns",
                    mu.len(),
                    sigma.len(),
                    cols
                )));
            }
            (mu, sigma)
        }
    };
    for (j, s) in sigma.iter().enumerate() {
        if s.is_nan() || *s <= 0.0 {
            return Err(Error::ConstantFeature {
                column: j,
                name: data
                    .feature_names
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| format!("column {j}")),
            });
        }
    }
    let mut z = data.x.clone();
    for i in 0..n {
        for j in 0..cols {
            z.set(i, j, (data.x.get(i, j) - mu[j]) / sigma[j]);
        }
    }
    Ok(Dataset {
        x: z,
        y: data.y.clone(),
        feature_names: data.feature_names.clone(),
        standardization: Some((mu, sigma)),
    })
}

/// Seeded shuffle followed by a contiguous cut; train size is
/// `round(ratio * n)`.
pub fn split(data: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let n = data.n();
    let train_n = (ratio * n as f64).round() as usize;
    if train_n == 0 || train_n == n {
        return Err(Error::Config(format!(
            "split of {n} records at ratio {ratio} leaves an empty side"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut indices);

    let take = |idx: &[usize]| -> Dataset {
        Dataset {
            x: data.x.select_rows(idx),
            y: idx.iter().map(|&i| data.y[i]).collect(),
            feature_names: data.feature_names.clone(),
            standardization: data.standardization.clone(),
        }
    };
    Ok(SplitPair {
        train: take(&indices[..train_n]),
        test: take(&indices[train_n..]),
        seed,
        ratio,
    })
}

/// Iterator over seeded mini-batches.
///
/// Each pass over the data uses a fresh shuffle; batches that straddle a
/// pass boundary are filled from the next pass, so every batch has exactly
/// `batch_size` rows.
pub struct BatchIter<'a> {
    data: &'a Dataset,
    perm: Vec<usize>,
    cursor: usize,
    batch_size: usize,
    remaining: usize,
    rng: Rng,
}

impl<'a> Iterator for BatchIter<'a> {
    type Item = (Matrix, Vec<Diagnosis>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let n = self.perm.len();
        let mut indices = Vec::with_capacity(self.batch_size);
        while indices.len() < self.batch_size {
            if self.cursor == n {
                self.rng.shuffle(&mut self.perm);
                self.cursor = 0;
            }
            let take = (self.batch_size - indices.len()).min(n - self.cursor);
            indices.extend_from_slice(&self.perm[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
        let x = self.data.x.select_rows(&indices);
        let y = indices.iter().map(|&i| self.data.y[i]).collect();
        Some((x, y))
    }
}

/// Yields exactly `steps` mini-batches of `batch_size` rows each.
pub fn batches(data: &Dataset, batch_size: usize, steps: usize, rng: Rng) -> Result<BatchIter<'_>> {
    if batch_size == 0 || steps == 0 {
        return Err(Error::Config(format!(
            "batch_size ({batch_size}) and steps ({steps}) must be >= 1"
        )));
    }
    if batch_size > data.n() {
        return Err(Error::Config(format!(
            "batch_size {} exceeds dataset size {}",
            batch_size,
            data.n()
        )));
    }
    let mut rng = rng;
    let mut perm: Vec<usize> = (0..data.n()).collect();
    rng.shuffle(&mut perm);
    Ok(BatchIter {
        data,
        perm,
        cursor: 0,
        batch_size,
        remaining: steps,
        rng,
    })
}

/// One-hot `{0,1}` targets, one column per class.
pub fn one_hot(labels: &[Diagnosis]) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), 2);
    for (i, d) in labels.iter().enumerate() {
        m.set(i, d.class_index(), 1.0);
    }
    m
}

/// Two-column `{-1,+1}` margin targets: +1 in the true class column.
pub fn pm_one_targets(labels: &[Diagnosis]) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), 2);
    for (i, d) in labels.iter().enumerate() {
        for c in 0..2 {
            m.set(i, c, if c == d.class_index() { 1.0 } else { -1.0 });
        }
    }
    m
}

/// Single-column `{0,1}` regression targets: 1 for malignant.
pub fn binary_targets(labels: &[Diagnosis]) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), 1);
    for (i, d) in labels.iter().enumerate() {
        if *d == Diagnosis::Malignant {
            m.set(i, 0, 1.0);
        }
    }
    m
}
