//! Dense real-matrix arithmetic and seeded random initialization.
//!
//! Everything in the crate is built on [`Matrix`] (row-major `f64`,
//! samples as rows) and [`Rng`] (a seeded, counter-based generator whose
//! streams are bit-identical across platforms).

mod matrix;
mod rng;

pub use matrix::Matrix;
pub use rng::{init_weights, InitScheme, Rng};
