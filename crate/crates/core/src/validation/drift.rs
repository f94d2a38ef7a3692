use std::io::Write;

use serde::Serialize;

use super::lookup;
use crate::corpus::Vocabulary;
use crate::embedding::{nearest_neighbors, EmbeddingTensor};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedNeighbor {
    pub word: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSlice {
    pub year: i32,
    pub neighbors: Vec<NamedNeighbor>,
}

/// Nearest neighbors of one word in every slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub word: String,
    pub count: usize,
    pub slices: Vec<DriftSlice>,
}

pub fn drift_trace(
    u: &EmbeddingTensor,
    vocab: &Vocabulary,
    word: &str,
    count: usize,
) -> Result<DriftReport> {
    let id = lookup(vocab, word)?;
    let slices = (0..u.num_slices())
        .map(|t| {
            let neighbors = nearest_neighbors(u, t, id, count, true)?
                .into_iter()
                .map(|n| NamedNeighbor {
                    word: vocab.word(n.id).to_string(),
                    similarity: n.similarity,
                })
                .collect();
            Ok(DriftSlice {
                year: u.years()[t],
                neighbors,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DriftReport {
        word: word.to_string(),
        count,
        slices,
    })
}

/// `year<TAB>rank<TAB>neighbor<TAB>similarity`, ranks from 1.
pub fn write_drift_tsv(w: &mut impl Write, report: &DriftReport) -> Result<()> {
    writeln!(w, "year\trank\tneighbor\tsimilarity")?;
    for s in &report.slices {
        for (r, n) in s.neighbors.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{}", s.year, r + 1, n.word, n.similarity)?;
        }
    }
    Ok(())
}

/// Plot-ready long format over several reports:
/// `slice,word,neighbor,rank,similarity`.
pub fn write_drift_long_csv(w: &mut impl Write, reports: &[DriftReport]) -> Result<()> {
    writeln!(w, "slice,word,neighbor,rank,similarity")?;
    for rep in reports {
        for s in &rep.slices {
            for (r, n) in s.neighbors.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    s.year,
                    rep.word,
                    n.word,
                    r + 1,
                    n.similarity
                )?;
            }
        }
    }
    Ok(())
}
