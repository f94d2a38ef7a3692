use super::lookup;
use crate::corpus::Vocabulary;
use crate::embedding::{EmbeddingTensor, Neighbor};
use crate::error::Result;

/// Top-`count` words by cosine to `v(a) − v(b) + v(c)` in slice `t`.
/// The operands are excluded from the ranking when `exclude_operands`.
pub fn analogy_query(
    u: &EmbeddingTensor,
    vocab: &Vocabulary,
    t: usize,
    (a, b, c): (&str, &str, &str),
    count: usize,
    exclude_operands: bool,
) -> Result<Vec<Neighbor>> {
    let ids = [lookup(vocab, a)?, lookup(vocab, b)?, lookup(vocab, c)?];
    let m = u.slice(t);
    let target: Vec<f64> = (0..u.k())
        .map(|j| m[(ids[0], j)] - m[(ids[1], j)] + m[(ids[2], j)])
        .collect();
    let exclude: &[usize] = if exclude_operands { &ids } else { &[] };
    Ok(crate::embedding::neighbors_of_vector(
        u, t, &target, count, exclude,
    ))
}
