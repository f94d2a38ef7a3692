//! Temporal word embeddings, discourse-atom partitioning and recombination
//! measures for new-venture descriptions.
//!
//! The pipeline runs corpus → PPMI slices → jointly smoothed embeddings →
//! per-slice atoms → company measures → event-history panel.

pub mod atoms;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod measures;
pub mod pipeline;
pub mod sparse;
pub mod validation;

pub use error::{Error, Result};
