//! Seeded random generation and weight initialization.

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Deterministic random generator.
///
/// A thin wrapper over a counter-based stream cipher generator: the same
/// seed yields the same sequence bit-for-bit on every platform, which is
/// what makes whole experiment runs reproducible from a single seed.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }

    /// Uniform draw from `[low, high)`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        self.inner.gen_range(low..high)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Bernoulli draw: `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.gen::<f64>() < p
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, values: &mut [T]) {
        values.shuffle(&mut self.inner);
    }

    /// Derives an independent generator for a sub-task, advancing this one.
    pub fn derive(&mut self) -> Rng {
        Rng::new(self.next_u64())
    }
}

/// Weight initialization schemes.
///
/// `ScaledNormal` (mean 0, std `1/sqrt(fan_in)`) is the default for all
/// trained weight matrices; biases start at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    Zeros,
    /// Uniform on `(-limit, limit)`.
    Uniform {
        limit: f64,
    },
    /// Normal with std `1/sqrt(fan_in)`, where fan-in is the row count.
    ScaledNormal,
}

/// Fills a `rows x cols` matrix according to the scheme, consuming draws
/// from `rng` in row-major order.
pub fn init_weights(shape: (usize, usize), scheme: InitScheme, rng: &mut Rng) -> Result<Matrix> {
    let (rows, cols) = shape;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape {
            op: "init_weights",
            rows,
            cols,
        });
    }
    let data: Vec<f64> = match scheme {
        InitScheme::Zeros => vec![0.0; rows * cols],
        InitScheme::Uniform { limit } => (0..rows * cols)
            .map(|_| rng.uniform(-limit, limit))
            .collect(),
        InitScheme::ScaledNormal => {
            let std = 1.0 / (rows as f64).sqrt();
            (0..rows * cols)
                .map(|_| rng.standard_normal() * std)
                .collect()
        }
    };
    Matrix::from_vec(rows, cols, data)
}
