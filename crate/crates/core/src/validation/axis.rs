use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::embedding::{cosine, EmbeddingTensor};
use crate::error::{Error, Result};

/// Named pole word lists, e.g. profit vs loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticAxis {
    pub name: String,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisSlice {
    pub year: i32,
    /// Unit-norm `mean(positive) − mean(negative)`.
    pub vector: Vec<f64>,
    /// Seed words missing from the vocabulary, dropped with a warning.
    pub dropped: Vec<String>,
}

fn pole_mean(u: &EmbeddingTensor, t: usize, ids: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; u.k()];
    for &i in ids {
        for (c, x) in m.iter_mut().enumerate() {
            *x += u.slice(t)[(i, c)];
        }
    }
    m.iter_mut().for_each(|x| *x /= ids.len() as f64);
    m
}

pub fn build_axis(
    u: &EmbeddingTensor,
    vocab: &Vocabulary,
    t: usize,
    positive: &[String],
    negative: &[String],
) -> Result<AxisSlice> {
    let mut dropped = Vec::new();
    let mut resolve = |words: &[String], pole: &str| -> Result<Vec<usize>> {
        let mut ids = Vec::new();
        for w in words {
            match vocab.id(w) {
                Some(i) => ids.push(i),
                None => dropped.push(w.clone()),
            }
        }
        if ids.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{pole} pole has no in-vocabulary seed words"
            )));
        }
        Ok(ids)
    };
    let pos = resolve(positive, "positive")?;
    let neg = resolve(negative, "negative")?;
    if !dropped.is_empty() {
        log::warn!("axis seeds not in vocabulary: {}", dropped.join(", "));
    }
    let diff: Vec<f64> = pole_mean(u, t, &pos)
        .iter()
        .zip(pole_mean(u, t, &neg))
        .map(|(a, b)| a - b)
        .collect();
    let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::PolesCoincide);
    }
    Ok(AxisSlice {
        year: u.years()[t],
        vector: diff.into_iter().map(|x| x / norm).collect(),
        dropped,
    })
}

/// Cosine between a vector and the axis; `None` for a zero vector.
pub fn project_on_axis(vector: &[f64], axis: &AxisSlice) -> Option<f64> {
    cosine(vector, &axis.vector)
}

#[cfg(test)]
pub(crate) mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::corpus::{build_vocab, SliceSpec, Source, TokenizedCorpus, TokenizedDoc};

    pub(crate) fn fixture(rows: &[(&str, [f64; 2])]) -> (EmbeddingTensor, Vocabulary) {
        let n = rows.len();
        let corpus = TokenizedCorpus {
            slices: SliceSpec::yearly(2000, 2000),
            docs: vec![TokenizedDoc {
                id: String::new(),
                slice: 0,
                source: Source::Other,
                tokens: rows
                    .iter()
                    .enumerate()
                    .flat_map(|(i, r)| std::iter::repeat_n(r.0.to_string(), n - i))
                    .collect(),
            }],
            skipped_out_of_range: 0,
            skipped_empty: 0,
        };
        let vocab = build_vocab(&corpus, 1).unwrap();
        let m = DMatrix::from_fn(n, 2, |i, c| rows[i].1[c]);
        (EmbeddingTensor::new(vec![m], vec![2000]).unwrap(), vocab)
    }

    fn words(w: &[&str]) -> Vec<String> {
        w.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn antipodal_seeds_give_unit_seed_direction() {
        let (u, v) = fixture(&[("gain", [3.0, 4.0]), ("loss", [-3.0, -4.0])]);
        let a = build_axis(&u, &v, 0, &words(&["gain"]), &words(&["loss"])).unwrap();
        assert!((a.vector[0] - 0.6).abs() < 1e-15 && (a.vector[1] - 0.8).abs() < 1e-15);
        assert_eq!(project_on_axis(&[3.0, 4.0], &a), Some(1.0));
        assert!(project_on_axis(&[-4.0, 3.0], &a).unwrap().abs() < 1e-15);
        assert_eq!(project_on_axis(&[0.0, 0.0], &a), None);
    }

    #[test]
    fn two_seed_difference_of_means() {
        let (u, v) = fixture(&[
            ("a", [1.0, 0.0]),
            ("b", [0.0, 2.0]),
            ("c", [1.0, 1.0]),
            ("d", [-1.0, 1.0]),
        ]);
        let ax = build_axis(&u, &v, 0, &words(&["a", "b"]), &words(&["c", "d"])).unwrap();
        // (0.5, 1.0) − (0.0, 1.0) = (0.5, 0)
        assert_eq!(ax.vector, vec![1.0, 0.0]);
        let swapped = build_axis(&u, &v, 0, &words(&["c", "d"]), &words(&["a", "b"])).unwrap();
        assert_eq!(swapped.vector, vec![-1.0, -0.0]);
    }

    #[test]
    fn oov_seeds_dropped_empty_pole_errors() {
        let (u, v) = fixture(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0])]);
        let ax = build_axis(&u, &v, 0, &words(&["a", "bull"]), &words(&["b", "bear"])).unwrap();
        assert_eq!(ax.dropped, words(&["bull", "bear"]));
        assert!(build_axis(&u, &v, 0, &words(&["bull"]), &words(&["b"])).is_err());
        assert!(matches!(
            build_axis(&u, &v, 0, &words(&["a"]), &words(&["a"])),
            Err(Error::PolesCoincide)
        ));
    }
}
