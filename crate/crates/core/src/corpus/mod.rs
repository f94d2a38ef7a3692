//! Corpus ingestion: tokenization, per-slice vocabularies, weighted
//! co-occurrence counting and shifted positive PMI matrices.

mod cooccur;
mod io;
mod ppmi;
mod tokenize;
mod vocab;

use serde::{Deserialize, Serialize};

pub use cooccur::{count_cooccurrence, CooccurConfig, SliceCooccurrence, SourceWeights};
pub use io::{read_documents, read_ppmi_triplets, read_vocab, write_ppmi_triplets, write_vocab};
pub use ppmi::{build_ppmi, PpmiMatrix};
pub use tokenize::{tokenize, TokenRules};
pub use vocab::{
    build_vocab, tokenize_corpus, SliceSpec, TokenizedCorpus, TokenizedDoc, Vocabulary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    News,
    Patent,
    #[default]
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub year: i32,
    #[serde(default)]
    pub source: Source,
    pub text: String,
}
