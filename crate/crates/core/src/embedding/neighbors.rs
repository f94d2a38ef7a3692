use std::cmp::Ordering;

use serde::Serialize;

use super::EmbeddingTensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: usize,
    pub similarity: f64,
}

/// Cosine similarity, `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Highest similarity first, lower id on ties.
pub(crate) fn rank_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity.total_cmp(&a.similarity).then(a.id.cmp(&b.id))
}

/// Top-`count` words of slice `t` by cosine similarity to `query`.
/// Zero-norm candidates are skipped; ties go to the lower word id.
pub fn neighbors_of_vector(
    u: &EmbeddingTensor,
    t: usize,
    query: &[f64],
    count: usize,
    exclude: &[usize],
) -> Vec<Neighbor> {
    let m = u.slice(t);
    let qn = query.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut all: Vec<Neighbor> = (0..m.nrows())
        .filter(|i| !exclude.contains(i))
        .filter_map(|i| {
            let row = m.row(i);
            let rn = row.norm();
            if rn == 0.0 || qn == 0.0 {
                return None;
            }
            let dot: f64 = row.iter().zip(query).map(|(a, b)| a * b).sum();
            Some(Neighbor {
                id: i,
                similarity: (dot / (rn * qn)).clamp(-1.0, 1.0),
            })
        })
        .collect();
    all.sort_by(rank_order);
    all.truncate(count);
    all
}

pub fn nearest_neighbors(
    u: &EmbeddingTensor,
    t: usize,
    word: usize,
    count: usize,
    exclude_self: bool,
) -> Result<Vec<Neighbor>> {
    if t >= u.num_slices() || word >= u.n() {
        return Err(Error::InvalidArgument(format!(
            "slice {t} / word {word} out of range"
        )));
    }
    let q = u.vector(t, word);
    if q.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateWord(format!(
            "word id {word} in slice {t}"
        )));
    }
    let exclude: &[usize] = if exclude_self { &[word] } else { &[] };
    Ok(neighbors_of_vector(u, t, &q, count, exclude))
}
