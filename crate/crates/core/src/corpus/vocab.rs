use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tokenize, DocumentRecord, Source, TokenRules};
use crate::error::{Error, Result};

/// Maps calendar years onto consecutive time slices of `width` years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub year_min: i32,
    pub year_max: i32,
    pub width: u32,
}

impl SliceSpec {
    pub fn new(year_min: i32, year_max: i32, width: u32) -> Result<Self> {
        if year_max < year_min || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "slice range {year_min}..={year_max} with width {width}"
            )));
        }
        Ok(SliceSpec {
            year_min,
            year_max,
            width,
        })
    }

    pub fn yearly(year_min: i32, year_max: i32) -> Self {
        SliceSpec {
            year_min,
            year_max,
            width: 1,
        }
    }

    pub fn len(&self) -> usize {
        ((self.year_max - self.year_min) as usize) / self.width as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slice_of(&self, year: i32) -> Option<usize> {
        if year < self.year_min || year > self.year_max {
            return None;
        }
        Some(((year - self.year_min) as u32 / self.width) as usize)
    }

    /// First calendar year of slice `t`.
    pub fn label(&self, t: usize) -> i32 {
        self.year_min + (t as i32) * self.width as i32
    }

    pub fn labels(&self) -> Vec<i32> {
        (0..self.len()).map(|t| self.label(t)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TokenizedDoc {
    pub id: String,
    pub slice: usize,
    pub source: Source,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TokenizedCorpus {
    pub slices: SliceSpec,
    pub docs: Vec<TokenizedDoc>,
    /// Documents whose year fell outside the slice range.
    pub skipped_out_of_range: usize,
    /// Documents whose text was blank.
    pub skipped_empty: usize,
}

pub fn tokenize_corpus(
    docs: &[DocumentRecord],
    rules: &TokenRules,
    slices: SliceSpec,
) -> TokenizedCorpus {
    let results: Vec<_> = docs
        .par_iter()
        .map(|d| {
            if d.text.trim().is_empty() {
                return Err(false);
            }
            let slice = slices.slice_of(d.year).ok_or(true)?;
            Ok(TokenizedDoc {
                id: d.id.clone(),
                slice,
                source: d.source,
                tokens: tokenize(&d.text, rules),
            })
        })
        .collect();
    let mut out = TokenizedCorpus {
        slices,
        docs: Vec::with_capacity(results.len()),
        skipped_out_of_range: 0,
        skipped_empty: 0,
    };
    for r in results {
        match r {
            Ok(d) => out.docs.push(d),
            Err(true) => out.skipped_out_of_range += 1,
            Err(false) => out.skipped_empty += 1,
        }
    }
    if out.skipped_out_of_range > 0 {
        log::warn!(
            "{} documents outside the slice range were skipped",
            out.skipped_out_of_range
        );
    }
    out
}

/// Joint vocabulary shared by every slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
    slices: SliceSpec,
    /// `slice_counts[t][id]`
    slice_counts: Vec<Vec<u64>>,
    global_counts: Vec<u64>,
    /// All tokens seen in each slice, in-vocabulary or not.
    slice_totals: Vec<u64>,
}

impl Vocabulary {
    pub(crate) fn from_parts(
        words: Vec<String>,
        slices: SliceSpec,
        slice_counts: Vec<Vec<u64>>,
        slice_totals: Vec<u64>,
    ) -> Result<Self> {
        let n = words.len();
        if slice_counts.len() != slices.len() || slice_totals.len() != slices.len() {
            return Err(Error::DimensionMismatch("vocabulary slice count".into()));
        }
        if slice_counts.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("vocabulary count rows".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary word {w:?}")));
            }
        }
        let global_counts = (0..n)
            .map(|i| slice_counts.iter().map(|c| c[i]).sum())
            .collect();
        Ok(Vocabulary {
            words,
            index,
            slices,
            slice_counts,
            global_counts,
            slice_totals,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).map(|&i| i as usize)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn slices(&self) -> SliceSpec {
        self.slices
    }

    pub fn count_in_slice(&self, id: usize, t: usize) -> u64 {
        self.slice_counts[t][id]
    }

    pub fn global_count(&self, id: usize) -> u64 {
        self.global_counts[id]
    }

    pub fn global_counts(&self) -> &[u64] {
        &self.global_counts
    }

    pub fn slice_total(&self, t: usize) -> u64 {
        self.slice_totals[t]
    }

    /// Vocabulary words within edit distance 2 of `word`, closest first.
    pub fn suggestions(&self, word: &str, max: usize) -> Vec<String> {
        let mut scored: Vec<(usize, usize)> = self
            .words
            .iter()
            .enumerate()
            .filter_map(|(i, w)| {
                let d = edit_distance(word, w);
                (d <= 2).then_some((d, i))
            })
            .collect();
        scored.sort();
        scored
            .into_iter()
            .take(max)
            .map(|(_, i)| self.words[i].clone())
            .collect()
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Retains every token reaching `min_count` in at least one slice. Ids are
/// assigned by descending global count, ties broken lexicographically.
pub fn build_vocab(corpus: &TokenizedCorpus, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be >= 1".into()));
    }
    let n_slices = corpus.slices.len();
    let mut counts: HashMap<&str, Vec<u64>> = HashMap::new();
    let mut totals = vec![0u64; n_slices];
    for doc in &corpus.docs {
        totals[doc.slice] += doc.tokens.len() as u64;
        for tok in &doc.tokens {
            counts
                .entry(tok.as_str())
                .or_insert_with(|| vec![0; n_slices])[doc.slice] += 1;
        }
    }
    let mut kept: Vec<(&str, Vec<u64>)> = counts
        .into_iter()
        .filter(|(_, c)| c.iter().any(|&x| x >= min_count))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    kept.sort_by(|(wa, ca), (wb, cb)| {
        let ga: u64 = ca.iter().sum();
        let gb: u64 = cb.iter().sum();
        gb.cmp(&ga).then_with(|| wa.cmp(wb))
    });
    let mut slice_counts = vec![Vec::with_capacity(kept.len()); n_slices];
    let mut words = Vec::with_capacity(kept.len());
    for (w, c) in kept {
        words.push(w.to_string());
        for (t, x) in c.into_iter().enumerate() {
            slice_counts[t].push(x);
        }
    }
    Vocabulary::from_parts(words, corpus.slices, slice_counts, totals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(docs: &[(usize, &str)]) -> TokenizedCorpus {
        TokenizedCorpus {
            slices: SliceSpec::yearly(2000, 2001),
            docs: docs
                .iter()
                .enumerate()
                .map(|(i, (t, text))| TokenizedDoc {
                    id: i.to_string(),
                    slice: *t,
                    source: Source::Other,
                    tokens: text.split_whitespace().map(String::from).collect(),
                })
                .collect(),
            skipped_out_of_range: 0,
            skipped_empty: 0,
        }
    }

    #[test]
    fn threshold_drops_rare() {
        let c = corpus(&[(0, "alpha alpha alpha beta"), (1, "alpha alpha")]);
        let v = build_vocab(&c, 2).unwrap();
        assert_eq!(v.words(), ["alpha"]);
        assert_eq!(v.global_count(0), 5);
        assert_eq!(v.count_in_slice(0, 0), 3);
        assert_eq!(v.slice_total(0), 4);
    }

    #[test]
    fn min_count_one_keeps_all_with_lexicographic_ties() {
        let c = corpus(&[(0, "zeta beta alpha alpha")]);
        let v = build_vocab(&c, 1).unwrap();
        assert_eq!(v.words(), ["alpha", "beta", "zeta"]);
    }

    #[test]
    fn threshold_is_per_slice() {
        // 1 + 1 across slices is 2 globally but never 2 in one slice
        let c = corpus(&[(0, "x y y"), (1, "x y")]);
        let v = build_vocab(&c, 2).unwrap();
        assert_eq!(v.words(), ["y"]);
    }

    #[test]
    fn empty_vocab_is_error() {
        let c = corpus(&[(0, "a b c")]);
        assert!(matches!(
            build_vocab(&c, 5),
            Err(Error::EmptyVocabulary { .. })
        ));
        assert!(build_vocab(&c, 0).is_err());
    }

    #[test]
    fn slice_spec_widths() {
        let s = SliceSpec::new(1990, 1999, 3).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.slice_of(1992), Some(0));
        assert_eq!(s.slice_of(1993), Some(1));
        assert_eq!(s.slice_of(1999), Some(3));
        assert_eq!(s.slice_of(2000), None);
        assert_eq!(s.labels(), vec![1990, 1993, 1996, 1999]);
    }

    #[test]
    fn out_of_range_docs_counted() {
        let docs = vec![
            DocumentRecord {
                id: "a".into(),
                year: 1999,
                source: Source::News,
                text: "x".into(),
            },
            DocumentRecord {
                id: "b".into(),
                year: 2000,
                source: Source::News,
                text: "x".into(),
            },
            DocumentRecord {
                id: "c".into(),
                year: 2000,
                source: Source::News,
                text: "  ".into(),
            },
        ];
        let c = tokenize_corpus(&docs, &TokenRules::default(), SliceSpec::yearly(2000, 2000));
        assert_eq!(c.docs.len(), 1);
        assert_eq!(c.skipped_out_of_range, 1);
        assert_eq!(c.skipped_empty, 1);
    }

    #[test]
    fn suggestions_by_edit_distance() {
        let c = corpus(&[(0, "amazon amazin zebra")]);
        let v = build_vocab(&c, 1).unwrap();
        assert_eq!(v.suggestions("amazom", 3), ["amazon", "amazin"]);
    }
}
