//! Sanity instruments over a trained landscape: semantic axes, neighbor
//! drift across slices, and analogy queries. Everything here reads the
//! embedding tensor only.

mod analogy;
mod axis;
mod drift;

pub use analogy::analogy_query;
pub use axis::{build_axis, project_on_axis, AxisSlice, SemanticAxis};
pub use drift::{
    drift_trace, write_drift_long_csv, write_drift_tsv, DriftReport, DriftSlice, NamedNeighbor,
};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub(crate) fn lookup(vocab: &Vocabulary, word: &str) -> Result<usize> {
    vocab.id(word).ok_or_else(|| Error::UnknownWord {
        word: word.to_string(),
        suggestions: vocab.suggestions(word, 5),
    })
}
