use serde::{Deserialize, Serialize};

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "do", "does", "for", "from", "had", "has", "have", "he", "her",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "no", "not",
    "of", "on", "or", "our", "over", "she", "so", "such", "than", "that", "the", "their", "them",
    "then", "there", "these", "they", "this", "those", "to", "up", "us", "was", "we", "were",
    "what", "when", "which", "while", "who", "will", "with", "would", "you", "your",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenRules {
    pub lowercase: bool,
    /// Drop tokens made only of digits.
    pub strip_numbers: bool,
    pub stopwords: Vec<String>,
    /// Two-word phrases joined with `_` when adjacent, e.g. `"machine learning"`.
    pub bigrams: Vec<String>,
}

impl Default for TokenRules {
    fn default() -> Self {
        TokenRules {
            lowercase: true,
            strip_numbers: false,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            bigrams: Vec::new(),
        }
    }
}

/// Splits on every non-alphanumeric character, then applies case folding,
/// bigram joining, number stripping and stopword removal in that order.
pub fn tokenize(text: &str, rules: &TokenRules) -> Vec<String> {
    let raw: Vec<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(|s| {
            if rules.lowercase {
                s.to_lowercase()
            } else {
                s.to_string()
            }
        })
        .collect();

    let bigrams: Vec<(String, String)> = rules
        .bigrams
        .iter()
        .filter_map(|b| {
            let mut parts = b.split_whitespace().map(|p| {
                if rules.lowercase {
                    p.to_lowercase()
                } else {
                    p.to_string()
                }
            });
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(c), None) => Some((a, c)),
                _ => None,
            }
        })
        .collect();

    let mut joined = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        if i + 1 < raw.len()
            && bigrams
                .iter()
                .any(|(a, b)| *a == raw[i] && *b == raw[i + 1])
        {
            joined.push(format!("{}_{}", raw[i], raw[i + 1]));
            i += 2;
        } else {
            joined.push(raw[i].clone());
            i += 1;
        }
    }

    joined
        .into_iter()
        .filter(|t| !(rules.strip_numbers && t.chars().all(|c| c.is_ascii_digit())))
        .filter(|t| !rules.stopwords.iter().any(|s| s == t))
        .collect()
}
