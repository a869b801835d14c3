//! Crate-wide error type.

/// Errors produced by dataset parsing, shape checks, and configuration
/// validation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs_rows}x{lhs_cols} vs {rhs_rows}x{rhs_cols}")]
    Dimension {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },

    #[error("invalid shape for {op}: {rows}x{cols} (rows and cols must be >= 1)")]
    InvalidShape {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no records")]
    EmptyDataset,

    #[error("feature column {column} ({name}) is constant; cannot standardize")]
    ConstantFeature { column: usize, name: String },

    #[error("labels must be encoded as -1/+1, found {found}")]
    LabelEncoding { found: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("nearest-neighbor index is empty")]
    EmptyIndex,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(op: &'static str, lhs: (usize, usize), rhs: (usize, usize)) -> Self {
        Error::Dimension {
            op,
            lhs_rows: lhs.0,
            lhs_cols: lhs.1,
            rhs_rows: rhs.0,
            rhs_cols: rhs.1,
        }
    }
}
