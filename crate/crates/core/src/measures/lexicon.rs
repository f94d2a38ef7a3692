use std::collections::{HashMap, HashSet};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenLabel {
    Technology,
    Application,
}

/// Technical dictionary terms plus two reference frequency tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconSet {
    terms: HashSet<String>,
    general: HashMap<String, u64>,
    patent: HashMap<String, u64>,
    general_total: u64,
    patent_total: u64,
}

impl LexiconSet {
    pub fn new(
        terms: impl IntoIterator<Item = String>,
        general: HashMap<String, u64>,
        patent: HashMap<String, u64>,
    ) -> Self {
        let lower = |m: HashMap<String, u64>| {
            let mut out: HashMap<String, u64> = HashMap::with_capacity(m.len());
            for (k, v) in m {
                *out.entry(k.trim().to_lowercase()).or_insert(0) += v;
            }
            out
        };
        let general = lower(general);
        let patent = lower(patent);
        LexiconSet {
            terms: terms
                .into_iter()
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
            general_total: general.values().sum(),
            patent_total: patent.values().sum(),
            general,
            patent,
        }
    }

    pub fn is_term(&self, token: &str) -> bool {
        self.terms.contains(token)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Patent relative frequency over general relative frequency; `None`
    /// when the token is in neither table.
    pub fn frequency_ratio(&self, token: &str) -> Option<f64> {
        let p = self.patent.get(token).copied().unwrap_or(0);
        let g = self.general.get(token).copied().unwrap_or(0);
        if p == 0 && g == 0 {
            return None;
        }
        if g == 0 {
            return Some(f64::INFINITY);
        }
        let pr = p as f64 / self.patent_total.max(1) as f64;
        let gr = g as f64 / self.general_total as f64;
        Some(pr / gr)
    }
}

/// A token is technology if it is a dictionary term or is used
/// `threshold` times more often (relatively) in patents than in general
/// text.
pub fn classify_tech_app(
    token: &str,
    lexicon: &LexiconSet,
    freq_ratio_threshold: f64,
) -> TokenLabel {
    if lexicon.is_term(token) {
        return TokenLabel::Technology;
    }
    match lexicon.frequency_ratio(token) {
        Some(r) if r > freq_ratio_threshold => TokenLabel::Technology,
        _ => TokenLabel::Application,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> LexiconSet {
        let general: HashMap<String, u64> = [("customer", 900), ("gadget", 10), ("widget", 90)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let patent: HashMap<String, u64> = [
            ("customer", 1),
            ("gadget", 99),
            ("widget", 0),
            ("Photonic", 5),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
        LexiconSet::new(
            [
                "Cephalosporin".to_string(),
                "arthroscopy".into(),
                "aspirin".into(),
            ],
            general,
            patent,
        )
    }

    #[test]
    fn dictionary_term_is_technology() {
        assert_eq!(
            classify_tech_app("cephalosporin", &lex(), 5.0),
            TokenLabel::Technology
        );
    }

    #[test]
    fn common_word_is_application() {
        assert_eq!(
            classify_tech_app("customer", &lex(), 5.0),
            TokenLabel::Application
        );
    }

    #[test]
    fn ratio_above_threshold() {
        // gadget: patent 99/105, general 10/1000 → ratio ≈ 94
        let l = lex();
        assert!(l.frequency_ratio("gadget").unwrap() > 90.0);
        assert_eq!(classify_tech_app("gadget", &l, 5.0), TokenLabel::Technology);
        assert_eq!(
            classify_tech_app("photonic", &l, 5.0),
            TokenLabel::Technology
        );
        assert_eq!(
            classify_tech_app("widget", &l, 5.0),
            TokenLabel::Application
        );
        assert_eq!(
            classify_tech_app("unseen", &l, 5.0),
            TokenLabel::Application
        );
    }

    #[test]
    fn ratio_ten_hand_value() {
        let general = [("a".to_string(), 10u64), ("b".to_string(), 90)]
            .into_iter()
            .collect();
        let patent = [("a".to_string(), 50u64), ("b".to_string(), 50)]
            .into_iter()
            .collect();
        let l = LexiconSet::new(Vec::new(), general, patent);
        // (50/100) / (10/100) = 5 → not above 5; (50/100)/(90/100) < 1
        assert!((l.frequency_ratio("a").unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(classify_tech_app("a", &l, 5.0), TokenLabel::Application);
        assert_eq!(classify_tech_app("a", &l, 4.9), TokenLabel::Technology);
    }
}
