//! 1-nearest-neighbor classification under L1 and L2 distances.
//!
//! There is no training phase: queries are answered by a brute-force
//! linear scan over the reference set, which is tiny here (a few hundred
//! rows). Ties break to the lowest reference index.

use crate::dataset::Diagnosis;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Distance norm for neighbor search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Norm {
    L1,
    L2,
}

/// Manhattan distance: `sum(|p_i - q_i|)`.
pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dim("l1_distance", (1, p.len()), (1, q.len())));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Euclidean distance: `sqrt(sum((p_i - q_i)^2))`.
pub fn l2_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dim("l2_distance", (1, p.len()), (1, q.len())));
    }
    Ok(p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Immutable reference set for nearest-neighbor queries.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Matrix,
    labels: Vec<Diagnosis>,
    norm: Norm,
}

impl NeighborIndex {
    pub fn new(points: Matrix, labels: Vec<Diagnosis>, norm: Norm) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if points.rows() != labels.len() {
            return Err(Error::dim(
                "neighbor_index",
                points.shape(),
                (labels.len(), points.cols()),
            ));
        }
        Ok(Self {
            points,
            labels,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one reference point
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        match self.norm {
            Norm::L1 => l1_distance(p, q),
            Norm::L2 => l2_distance(p, q),
        }
    }
}

/// Labels each query row with the label of its closest reference point.
pub fn nn_classify(index: &NeighborIndex, queries: &Matrix) -> Result<Vec<Diagnosis>> {
    if queries.cols() != index.points.cols() {
        return Err(Error::dim(
            "nn_classify",
            queries.shape(),
            index.points.shape(),
        ));
    }
    let mut out = Vec::with_capacity(queries.rows());
    for qi in 0..queries.rows() {
        let q = queries.row(qi);
        let mut best = 0usize;
        let mut best_dist = index.distance(index.points.row(0), q)?;
        for ri in 1..index.points.rows() {
            let d = index.distance(index.points.row(ri), q)?;
            if d < best_dist {
                best_dist = d;
                best = ri;
            }
        }
        out.push(index.labels[best]);
    }
    Ok(out)
}
