//! Shared helpers for the integration suites.

use std::path::PathBuf;
use std::sync::OnceLock;

use wdbc_core::dataset::{load_wdbc, Dataset};

pub fn data_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wdbc.csv")
}

/// The full WDBC dataset, loaded once per test binary.
pub fn wdbc() -> &'static Dataset {
    static DATA: OnceLock<Dataset> = OnceLock::new();
    DATA.get_or_init(|| load_wdbc(&data_path()).expect("data/wdbc.csv must parse"))
}

/// Relative-error check with an absolute floor for near-zero pairs.
#[allow(dead_code)] // not every test binary checks gradients
pub fn grad_close(analytic: f64, numeric: f64, tol: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= tol * analytic.abs().max(numeric.abs()) || diff <= 1e-8
}
