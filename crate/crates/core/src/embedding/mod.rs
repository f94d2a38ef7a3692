//! Jointly trained temporal embeddings: every slice `U(t)` is fit to its own
//! PPMI matrix while a smoothing penalty keeps adjacent slices aligned.

mod io;
mod neighbors;
mod objective;
mod solver;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_embeddings, write_embeddings, write_embeddings_tsv};
pub use neighbors::{cosine, nearest_neighbors, neighbors_of_vector, Neighbor};
pub use objective::{objective_value, splitting_objective};
pub use solver::{init_embeddings, solve_slice, train, SweepOrder, TrainOutcome, Trainer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub k: usize,
    /// Ridge weight on every factor.
    pub lambda: f64,
    /// Smoothing weight between adjacent slices.
    pub tau: f64,
    /// Coupling between the two split factors `U ≈ W`.
    pub gamma: f64,
    pub sweeps: usize,
    pub seed: u64,
    /// Stop when the relative objective change falls below this.
    pub tol: f64,
    pub order: SweepOrder,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 50,
            lambda: 10.0,
            tau: 50.0,
            gamma: 500.0,
            sweeps: 30,
            seed: 0,
            tol: 1e-4,
            order: SweepOrder::RedBlack,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidArgument("sweeps must be >= 1".into()));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("tau", self.tau),
            ("gamma", self.gamma),
            ("tol", self.tol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// `T` slices of `n × k` word vectors over one joint vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTensor {
    slices: Vec<DMatrix<f64>>,
    years: Vec<i32>,
}

impl EmbeddingTensor {
    pub fn new(slices: Vec<DMatrix<f64>>, years: Vec<i32>) -> Result<Self> {
        if slices.is_empty() || slices.len() != years.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} slices with {} year labels",
                slices.len(),
                years.len()
            )));
        }
        let (n, k) = slices[0].shape();
        if slices.iter().any(|s| s.shape() != (n, k)) {
            return Err(Error::DimensionMismatch("slices differ in shape".into()));
        }
        if years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "slice years must be increasing".into(),
            ));
        }
        if slices.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("embedding tensor".into()));
        }
        Ok(EmbeddingTensor { slices, years })
    }

    pub fn n(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn k(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn slice(&self, t: usize) -> &DMatrix<f64> {
        &self.slices[t]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<DMatrix<f64>> {
        self.slices
    }

    /// Slice whose label year is the latest one not after `year`, clamped
    /// to the first slice.
    pub fn slice_for_year(&self, year: i32) -> usize {
        self.years.iter().rposition(|&y| y <= year).unwrap_or(0)
    }

    pub fn vector(&self, t: usize, word: usize) -> Vec<f64> {
        self.slices[t].row(word).iter().copied().collect()
    }

    /// Mean Frobenius distance between adjacent slices.
    pub fn mean_adjacent_distance(&self) -> f64 {
        if self.slices.len() < 2 {
            return 0.0;
        }
        let total: f64 = self.slices.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
        total / (self.slices.len() - 1) as f64
    }
}
