use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Source, TokenizedCorpus, TokenizedDoc, Vocabulary};
use crate::error::{Error, Result};
use crate::sparse::SymCsr;

/// Fixed shard size; shard boundaries never depend on the thread count.
const SHARD_DOCS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceWeights {
    pub news: f64,
    pub patent: f64,
    pub other: f64,
}

impl Default for SourceWeights {
    fn default() -> Self {
        SourceWeights {
            news: 1.0,
            patent: 1.0,
            other: 1.0,
        }
    }
}

impl SourceWeights {
    pub fn weight(&self, source: Source) -> f64 {
        match source {
            Source::News => self.news,
            Source::Patent => self.patent,
            Source::Other => self.other,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        SourceWeights {
            news: self.news * s,
            patent: self.patent * s,
            other: self.other * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CooccurConfig {
    pub window: usize,
    pub weights: SourceWeights,
    /// Weight a pair at offset `d` by `1/d`.
    pub distance_decay: bool,
}

impl Default for CooccurConfig {
    fn default() -> Self {
        CooccurConfig {
            window: 5,
            weights: SourceWeights::default(),
            distance_decay: false,
        }
    }
}

/// Weighted symmetric co-occurrence counts for one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCooccurrence {
    pub slice: usize,
    pub pairs: SymCsr,
    pub marginals: Vec<f64>,
    pub total: f64,
}

impl SliceCooccurrence {
    pub fn from_pairs(slice: usize, pairs: SymCsr) -> Self {
        let marginals = pairs.row_sums();
        let total = marginals.iter().sum();
        SliceCooccurrence {
            slice,
            pairs,
            marginals,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.pairs.n()
    }

    pub fn pair(&self, w: usize, c: usize) -> f64 {
        self.pairs.get(w, c)
    }
}

type PairMap = HashMap<(u32, u32), f64>;

fn count_doc(
    doc: &TokenizedDoc,
    vocab: &Vocabulary,
    cfg: &CooccurConfig,
    w: f64,
    into: &mut PairMap,
) {
    // out-of-vocabulary tokens are removed before windowing
    let ids: Vec<u32> = doc
        .tokens
        .iter()
        .filter_map(|t| vocab.id(t).map(|i| i as u32))
        .collect();
    for (i, &a) in ids.iter().enumerate() {
        let end = (i + cfg.window).min(ids.len() - 1);
        for (d, &b) in ids[i + 1..=end].iter().enumerate() {
            if a == b {
                continue;
            }
            let mass = if cfg.distance_decay {
                w / (d + 1) as f64
            } else {
                w
            };
            *into.entry((a, b)).or_insert(0.0) += mass;
            *into.entry((b, a)).or_insert(0.0) += mass;
        }
    }
}

/// Counts co-occurrences within `window` positions, weighting each document
/// by its source. Every unordered pair adds its mass to both `(w,c)` and
/// `(c,w)`; identical tokens are never paired.
pub fn count_cooccurrence(
    corpus: &TokenizedCorpus,
    vocab: &Vocabulary,
    cfg: &CooccurConfig,
) -> Result<Vec<SliceCooccurrence>> {
    if cfg.window == 0 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    for (name, w) in [
        ("news", cfg.weights.news),
        ("patent", cfg.weights.patent),
        ("other", cfg.weights.other),
    ] {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "source weight {name} must be > 0"
            )));
        }
    }
    let n_slices = corpus.slices.len();
    let shards: Vec<Vec<PairMap>> = corpus
        .docs
        .par_chunks(SHARD_DOCS)
        .map(|docs| {
            let mut maps = vec![PairMap::new(); n_slices];
            for doc in docs {
                count_doc(
                    doc,
                    vocab,
                    cfg,
                    cfg.weights.weight(doc.source),
                    &mut maps[doc.slice],
                );
            }
            maps
        })
        .collect();

    let mut merged = vec![PairMap::new(); n_slices];
    for shard in shards {
        for (t, map) in shard.into_iter().enumerate() {
            for (k, v) in map {
                *merged[t].entry(k).or_insert(0.0) += v;
            }
        }
    }
    let n = vocab.len();
    Ok(merged
        .into_iter()
        .enumerate()
        .map(|(t, map)| {
            let full: Vec<(u32, u32, f64)> = map.into_iter().map(|((a, b), v)| (a, b, v)).collect();
            SliceCooccurrence::from_pairs(t, SymCsr::from_full_triplets(n, full))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, SliceSpec};

    fn corpus(docs: &[(&str, Source)]) -> TokenizedCorpus {
        TokenizedCorpus {
            slices: SliceSpec::yearly(2000, 2000),
            docs: docs
                .iter()
                .enumerate()
                .map(|(i, (text, source))| TokenizedDoc {
                    id: i.to_string(),
                    slice: 0,
                    source: *source,
                    tokens: text.split_whitespace().map(String::from).collect(),
                })
                .collect(),
            skipped_out_of_range: 0,
            skipped_empty: 0,
        }
    }

    fn cfg(window: usize) -> CooccurConfig {
        CooccurConfig {
            window,
            ..CooccurConfig::default()
        }
    }

    #[test]
    fn smallest_case() {
        let c = corpus(&[("a b", Source::Other)]);
        let v = build_vocab(&c, 1).unwrap();
        let s = &count_cooccurrence(&c, &v, &cfg(1)).unwrap()[0];
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(s.pair(a, b), 1.0);
        assert_eq!(s.pair(b, a), 1.0);
        assert_eq!(s.marginals[a], 1.0);
        assert_eq!(s.marginals[b], 1.0);
        assert_eq!(s.total, 2.0);
    }

    #[test]
    fn weight_doubles_counts() {
        let c = corpus(&[("a b", Source::Patent)]);
        let v = build_vocab(&c, 1).unwrap();
        let mut conf = cfg(1);
        conf.weights.patent = 2.0;
        let s = &count_cooccurrence(&c, &v, &conf).unwrap()[0];
        assert_eq!(s.total, 4.0);
        assert_eq!(s.pair(0, 1), 2.0);
    }

    #[test]
    fn window_two_pairs() {
        let c = corpus(&[("a b c", Source::News)]);
        let v = build_vocab(&c, 1).unwrap();
        let s = &count_cooccurrence(&c, &v, &cfg(2)).unwrap()[0];
        let id = |w| v.id(w).unwrap();
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "c")] {
            assert_eq!(s.pair(id(x), id(y)), 1.0);
        }
        assert_eq!(s.total, 6.0);
        let s1 = &count_cooccurrence(&c, &v, &cfg(1)).unwrap()[0];
        assert_eq!(s1.pair(id("a"), id("c")), 0.0);
    }

    #[test]
    fn self_pairs_excluded() {
        let c = corpus(&[("a a b", Source::News)]);
        let v = build_vocab(&c, 1).unwrap();
        let s = &count_cooccurrence(&c, &v, &cfg(2)).unwrap()[0];
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(s.pair(a, a), 0.0);
        assert_eq!(s.pair(a, b), 2.0);
    }

    #[test]
    fn decay_weights_by_offset() {
        let c = corpus(&[("a b c", Source::News)]);
        let v = build_vocab(&c, 1).unwrap();
        let mut conf = cfg(2);
        conf.distance_decay = true;
        let s = &count_cooccurrence(&c, &v, &conf).unwrap()[0];
        assert_eq!(s.pair(v.id("a").unwrap(), v.id("c").unwrap()), 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        let c = corpus(&[("a b", Source::News)]);
        let v = build_vocab(&c, 1).unwrap();
        assert!(count_cooccurrence(&c, &v, &cfg(0)).is_err());
        let mut conf = cfg(1);
        conf.weights.news = 0.0;
        assert!(count_cooccurrence(&c, &v, &conf).is_err());
    }
}
