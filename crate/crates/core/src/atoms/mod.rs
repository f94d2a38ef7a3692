//! Discourse atoms: a per-slice dictionary of unit directions with every
//! word hard-assigned to its closest atom.

mod assign;
mod io;
mod kmeans;
mod ksvd;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assign::{assign_words, atom_summary, Assignment, AtomMembers};
pub use io::{read_assignments_tsv, read_dictionary, write_assignments_tsv, write_dictionary};
pub use kmeans::kmeans_train;
pub use ksvd::{ksvd_train, orthogonal_matching_pursuit, SparseCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AtomMethod {
    #[default]
    Ksvd,
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(rename = "K")]
    pub num_atoms: usize,
    /// Nonzeros per sparse code (k-SVD only).
    pub sparsity: usize,
    pub iterations: usize,
    pub method: AtomMethod,
    pub seed: u64,
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig {
            num_atoms: 200,
            sparsity: 5,
            iterations: 20,
            method: AtomMethod::Ksvd,
            seed: 0,
        }
    }
}

impl AtomConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.num_atoms == 0 || self.num_atoms > n {
            return Err(Error::InvalidArgument(format!(
                "K={} atoms requires 1 <= K <= n={n}",
                self.num_atoms
            )));
        }
        if self.method == AtomMethod::Ksvd && (self.sparsity == 0 || self.sparsity > self.num_atoms)
        {
            return Err(Error::InvalidArgument(format!(
                "sparsity {} must lie in 1..={}",
                self.sparsity, self.num_atoms
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained atoms of one slice plus the word assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDictionary {
    pub year: i32,
    /// `K × k`, unit-norm rows.
    pub atoms: DMatrix<f64>,
    pub assignment: Assignment,
    /// Training objective after each iteration (reconstruction error for
    /// k-SVD, cosine distortion for k-means).
    pub trace: Vec<f64>,
}

impl AtomDictionary {
    pub fn num_atoms(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn atom(&self, a: usize) -> Vec<f64> {
        self.atoms.row(a).iter().copied().collect()
    }
}

/// Dispatches on `cfg.method`.
pub fn train_atoms(words: &DMatrix<f64>, year: i32, cfg: &AtomConfig) -> Result<AtomDictionary> {
    match cfg.method {
        AtomMethod::Ksvd => ksvd_train(words, year, cfg),
        AtomMethod::Kmeans => kmeans_train(words, year, cfg),
    }
}

pub(crate) fn check_finite(words: &DMatrix<f64>) -> Result<()> {
    if words.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("word vectors".into()));
    }
    Ok(())
}

/// Row-normalized copy plus the indices of nonzero rows.
pub(crate) fn normalized_rows(words: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let live: Vec<usize> = (0..words.nrows())
        .filter(|&i| words.row(i).norm() > 0.0)
        .collect();
    let mut x = DMatrix::zeros(live.len(), words.ncols());
    for (r, &i) in live.iter().enumerate() {
        let row = words.row(i);
        let norm = row.norm();
        for c in 0..words.ncols() {
            x[(r, c)] = row[c] / norm;
        }
    }
    (x, live)
}
