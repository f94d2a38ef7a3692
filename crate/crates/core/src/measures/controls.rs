use super::{LexiconSet, TokenLabel};
use crate::corpus::Vocabulary;

/// Mean over technology tokens (with repetition) of
/// `ln(1 + count in the lookback slices)`, where the lookback covers slices
/// whose label year falls in `[year(t) − lookback, year(t) − 1]`.
/// Returns `None` when there are no technology tokens.
pub fn element_familiarity<S: AsRef<str>>(
    tokens: &[S],
    labels: &[TokenLabel],
    vocab: &Vocabulary,
    t: usize,
    lookback_years: i32,
) -> Option<f64> {
    let slices = vocab.slices();
    let year = slices.label(t);
    let window: Vec<usize> = (0..slices.len())
        .filter(|&s| {
            let y = slices.label(s);
            y >= year - lookback_years && y < year
        })
        .collect();
    let mut sum = 0.0;
    let mut n = 0usize;
    for (tok, label) in tokens.iter().zip(labels) {
        if *label != TokenLabel::Technology {
            continue;
        }
        let count: u64 = vocab.id(tok.as_ref()).map_or(0, |id| {
            window.iter().map(|&s| vocab.count_in_slice(id, s)).sum()
        });
        sum += familiarity_term(count as f64);
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn familiarity_term(count: f64) -> f64 {
    (1.0 + count).ln()
}

/// Global count at or below which a vocabulary word is "very rare".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RareThreshold(pub u64);

impl RareThreshold {
    /// Nearest-rank `percentile` of the vocabulary's global counts.
    pub fn from_vocab(vocab: &Vocabulary, percentile: f64) -> Self {
        let mut counts = vocab.global_counts().to_vec();
        counts.sort_unstable();
        if counts.is_empty() {
            return RareThreshold(0);
        }
        let rank = ((percentile.clamp(0.0, 1.0) * counts.len() as f64).ceil() as usize).max(1);
        RareThreshold(counts[rank.min(counts.len()) - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextControls {
    pub text_length: usize,
    pub rare_word_dummy: u8,
    pub no_tech_dummy: u8,
}

/// Out-of-vocabulary tokens count as rare. An empty description is rare
/// and non-technical by convention.
pub fn text_controls<S: AsRef<str>>(
    tokens: &[S],
    labels: &[TokenLabel],
    vocab: &Vocabulary,
    rare: RareThreshold,
) -> TextControls {
    let rare_word = tokens.is_empty()
        || tokens.iter().any(|t| match vocab.id(t.as_ref()) {
            Some(id) => vocab.global_count(id) <= rare.0,
            None => true,
        });
    let has_tech = labels.contains(&TokenLabel::Technology);
    TextControls {
        text_length: tokens.len(),
        rare_word_dummy: rare_word as u8,
        no_tech_dummy: (!has_tech) as u8,
    }
}

/// Labels every token.
pub(crate) fn label_tokens<S: AsRef<str>>(
    tokens: &[S],
    lexicon: &LexiconSet,
    threshold: f64,
) -> Vec<TokenLabel> {
    tokens
        .iter()
        .map(|t| super::classify_tech_app(t.as_ref(), lexicon, threshold))
        .collect()
}
