//! From-scratch classifiers and a benchmark harness for the Wisconsin
//! Diagnostic Breast Cancer (WDBC) dataset.
//!
//! The crate implements six classifier families over a small dense-matrix
//! core, all in `f64`:
//!
//! - GRU-SVM: a gated recurrent unit whose final state feeds a linear
//!   L2-SVM output layer
//! - linear regression used as a thresholded classifier
//! - a multilayer perceptron (three ReLU hidden layers)
//! - 1-nearest-neighbor search under L1 and L2 distances
//! - softmax regression
//! - a linear support vector machine (L1 and L2 hinge variants)
//!
//! [`experiment`] ties these together: it loads the dataset, standardizes
//! features, performs a seeded 70/30 split, trains each model on shuffled
//! mini-batches, and reports accuracy plus sensitivity/specificity rates.
//! Every run is driven by a single seed and is bit-reproducible.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod linear;
pub mod metrics;
pub mod neighbors;
pub mod neural;
pub mod numerics;
pub mod optim;

pub use error::{Error, Result};
pub use numerics::{InitScheme, Matrix, Rng};
