use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::controls::label_tokens;
use super::{
    centroid_spread, description_centroid, element_familiarity, event_outcome, global_distance,
    interpolate_measure, local_distance, negentropy_balance, tech_app_local_distance,
    text_controls, time_to_market, vc_diversity, AcquisitionBook, CompanyModules, CompanyRecord,
    CpiTable, Event, Flag, LexiconSet, MeasureConfig, MeasureRow, Outcome, RareThreshold,
    SliceView,
};
use crate::atoms::Assignment;
use crate::corpus::{tokenize, TokenRules, Vocabulary};
use crate::embedding::EmbeddingTensor;
use crate::error::{Error, Result};

pub struct PanelInputs<'a> {
    pub embeddings: &'a EmbeddingTensor,
    pub vocab: &'a Vocabulary,
    /// Word assignment of every slice, in slice order.
    pub assignments: &'a [Assignment],
    pub lexicon: &'a LexiconSet,
    pub cpi: &'a CpiTable,
    pub rules: &'a TokenRules,
    pub config: &'a MeasureConfig,
}

#[derive(Debug, Clone, Default)]
pub struct PanelOutput {
    pub rows: Vec<MeasureRow>,
    /// `(company id, reason)` for companies left out of the panel.
    pub rejected: Vec<(String, String)>,
    /// Events after a terminal exit.
    pub dropped_events: usize,
}

/// Text-derived measures of one description in one slice.
#[derive(Debug, Clone)]
struct TextMeasures {
    reals: [f64; 6],
    n_valid: usize,
    rare: u8,
    no_tech: u8,
    text_length: usize,
    flags: BTreeSet<Flag>,
}

fn text_measures(text: &str, t: usize, inp: &PanelInputs, rare: RareThreshold) -> TextMeasures {
    let cfg = inp.config;
    let tokens = tokenize(text, inp.rules);
    let view = SliceView {
        vocab: inp.vocab,
        vectors: inp.embeddings.slice(t),
        assignment: &inp.assignments[t],
    };
    let labels = label_tokens(&tokens, inp.lexicon, cfg.freq_ratio_threshold);
    let centroid = description_centroid(&tokens, inp.vocab, view.vectors);
    let modules = CompanyModules::new(&tokens, &view);
    let word_labels: BTreeMap<usize, _> = tokens
        .iter()
        .zip(&labels)
        .filter_map(|(tok, l)| inp.vocab.id(tok).map(|id| (id, *l)))
        .collect();

    let local = local_distance(&modules, cfg.min_module_size, cfg.pooling);
    let global = global_distance(&modules, cfg.min_module_size);
    let tech_app = tech_app_local_distance(&modules, &word_labels, cfg.min_module_size);
    let spread = centroid_spread(&modules, cfg.min_module_size);
    let negentropy = negentropy_balance(&modules);
    let familiarity = element_familiarity(&tokens, &labels, inp.vocab, t, cfg.lookback_years);
    let controls = text_controls(&tokens, &labels, inp.vocab, rare);

    let flags = [
        centroid.flag,
        local.flag,
        global.flag,
        tech_app.flag,
        spread.flag,
        negentropy.flag,
    ]
    .into_iter()
    .flatten()
    .collect();
    TextMeasures {
        reals: [
            local.value,
            global.value,
            tech_app.value,
            spread.value,
            negentropy.value,
            familiarity.unwrap_or(0.0),
        ],
        n_valid: centroid.n_valid,
        rare: controls.rare_word_dummy,
        no_tech: controls.no_tech_dummy,
        text_length: controls.text_length,
        flags,
    }
}

fn measures_at(
    company: &CompanyRecord,
    start: NaiveDate,
    t: usize,
    inp: &PanelInputs,
    rare: RareThreshold,
) -> Result<TextMeasures> {
    if company.snapshots.is_empty() {
        return Ok(text_measures(&company.description, t, inp, rare));
    }
    let per: Vec<(NaiveDate, TextMeasures)> = company
        .snapshots
        .iter()
        .map(|s| (s.date, text_measures(&s.text, t, inp, rare)))
        .collect();
    let nearest = per
        .iter()
        .min_by_key(|(d, _)| ((*d - start).num_days().abs(), *d))
        .expect("non-empty snapshots");
    let mut out = nearest.1.clone();
    for (i, r) in out.reals.iter_mut().enumerate() {
        let series: Vec<(NaiveDate, f64)> = per.iter().map(|(d, m)| (*d, m.reals[i])).collect();
        *r = interpolate_measure(&series, start)?;
    }
    out.flags.insert(Flag::Interpolated);
    Ok(out)
}

/// Groups same-day events; the group outcome is the most successful one.
fn episode_events(company: &CompanyRecord) -> std::result::Result<Vec<Vec<&Event>>, String> {
    if company.events.windows(2).any(|w| w[0].date > w[1].date) {
        return Err("events are not date-ordered".into());
    }
    if company
        .events
        .first()
        .is_some_and(|e| e.date < company.founded)
    {
        return Err("event precedes founding date".into());
    }
    let mut groups: Vec<Vec<&Event>> = Vec::new();
    for e in &company.events {
        match groups.last_mut() {
            Some(g) if g[0].date == e.date => g.push(e),
            _ => groups.push(vec![e]),
        }
    }
    Ok(groups)
}

fn company_rows(
    company: &CompanyRecord,
    inp: &PanelInputs,
    book: &AcquisitionBook,
    rare: RareThreshold,
) -> Result<std::result::Result<(Vec<MeasureRow>, usize), String>> {
    let groups = match episode_events(company) {
        Ok(g) => g,
        Err(reason) => return Ok(Err(reason)),
    };
    let slices = inp.vocab.slices();
    let mut company_flags = BTreeSet::new();
    let ttm = match time_to_market(&company.events) {
        Ok(v) => v,
        Err(_) => {
            company_flags.insert(Flag::InconsistentTiming);
            None
        }
    };
    let diversity = company
        .events
        .iter()
        .find(|e| e.kind.is_early_round())
        .and_then(|e| vc_diversity(&e.investors));

    // (start, end, outcome)
    let mut episodes: Vec<(NaiveDate, NaiveDate, Outcome)> = Vec::new();
    let mut start = company.founded;
    let mut dropped = 0;
    let mut ended = false;
    for group in groups {
        if ended {
            dropped += group.len();
            continue;
        }
        let mut best = Outcome::Censored;
        for e in &group {
            let o = event_outcome(e, &company.industry, inp.cpi, book)?;
            if o.success_rank() > best.success_rank() {
                best = o;
            }
        }
        episodes.push((start, group[0].date, best));
        start = group[0].date;
        ended = group.iter().any(|e| e.kind.is_terminal());
    }
    if !ended && start < inp.config.censor_date {
        episodes.push((start, inp.config.censor_date, Outcome::Censored));
    }

    let mut rows = Vec::with_capacity(episodes.len());
    for (i, (start, end, outcome)) in episodes.into_iter().enumerate() {
        let mut flags = company_flags.clone();
        let t = match slices.slice_of(start.year()) {
            Some(t) => t,
            None => {
                flags.insert(Flag::SliceClamped);
                if start.year() < slices.year_min {
                    0
                } else {
                    slices.len() - 1
                }
            }
        };
        let m = measures_at(company, start, t, inp, rare)?;
        flags.extend(m.flags.iter().copied());
        rows.push(MeasureRow {
            company_id: company.id.clone(),
            industry: company.industry.clone(),
            episode: i,
            start,
            end,
            slice_year: slices.label(t),
            local_distance: m.reals[0],
            global_distance: m.reals[1],
            tech_app_local_distance: m.reals[2],
            centroid_spread: m.reals[3],
            negentropy: m.reals[4],
            element_familiarity: m.reals[5],
            n_valid_elements: m.n_valid,
            rare_word_dummy: m.rare,
            no_tech_dummy: m.no_tech,
            text_length: m.text_length,
            time_to_market_months: ttm,
            vc_diversity: diversity,
            outcome,
            flags,
        });
    }
    Ok(Ok((rows, dropped)))
}

/// One row per company episode: founding to first event, then between
/// consecutive events, then a right-censored tail unless the company
/// exited. Measures use the slice containing the episode start.
pub fn build_panel(companies: &[CompanyRecord], inp: &PanelInputs) -> Result<PanelOutput> {
    if inp.assignments.len() != inp.embeddings.num_slices()
        || inp.vocab.slices().len() != inp.embeddings.num_slices()
    {
        return Err(Error::DimensionMismatch(
            "slices of vocabulary, embeddings and atoms differ".into(),
        ));
    }
    if inp.vocab.len() != inp.embeddings.n() {
        return Err(Error::DimensionMismatch(
            "vocabulary vs embedding rows".into(),
        ));
    }
    let book = AcquisitionBook::build(companies, inp.cpi)?;
    let rare = RareThreshold::from_vocab(inp.vocab, inp.config.rare_percentile);
    let per: Vec<_> = companies
        .par_iter()
        .map(|c| company_rows(c, inp, &book, rare))
        .collect::<Result<_>>()?;
    let mut out = PanelOutput::default();
    for (c, r) in companies.iter().zip(per) {
        match r {
            Ok((rows, dropped)) => {
                out.rows.extend(rows);
                out.dropped_events += dropped;
            }
            Err(reason) => {
                log::warn!("company {} rejected: {reason}", c.id);
                out.rejected.push((c.id.clone(), reason));
            }
        }
    }
    Ok(out)
}

pub const PANEL_COLUMNS: [&str; 21] = [
    "company_id",
    "industry",
    "episode",
    "start",
    "end",
    "slice_year",
    "outcome",
    "local_distance",
    "global_distance",
    "tech_app_local_distance",
    "centroid_spread",
    "negentropy",
    "element_familiarity",
    "n_valid_elements",
    "rare_word_dummy",
    "no_tech_dummy",
    "text_length",
    "time_to_market_months",
    "vc_diversity",
    "flags",
    "duration_days",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Panel CSV; absent optional values are empty cells and flags are
/// `;`-separated.
pub fn write_panel_csv(w: impl Write, rows: &[MeasureRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    wr.write_record(PANEL_COLUMNS).map_err(csv_err)?;
    for r in rows {
        let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
        wr.write_record([
            r.company_id.clone(),
            r.industry.clone(),
            r.episode.to_string(),
            r.start.to_string(),
            r.end.to_string(),
            r.slice_year.to_string(),
            r.outcome.as_str().to_string(),
            r.local_distance.to_string(),
            r.global_distance.to_string(),
            r.tech_app_local_distance.to_string(),
            r.centroid_spread.to_string(),
            r.negentropy.to_string(),
            r.element_familiarity.to_string(),
            r.n_valid_elements.to_string(),
            r.rare_word_dummy.to_string(),
            r.no_tech_dummy.to_string(),
            r.text_length.to_string(),
            opt(r.time_to_market_months),
            opt(r.vc_diversity),
            flags.join(";"),
            (r.end - r.start).num_days().to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// JSON Schema describing one panel CSV row.
pub fn panel_json_schema() -> Value {
    let num = |min: f64, max: f64, desc: &str| json!({"type": "number", "minimum": min, "maximum": max, "description": desc});
    let outcomes: Vec<&str> = Outcome::ALL.iter().map(|o| o.as_str()).collect();
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "MeasureRow",
        "description": "One company episode of the event-history panel (CSV row).",
        "type": "object",
        "required": PANEL_COLUMNS,
        "properties": {
            "company_id": {"type": "string"},
            "industry": {"type": "string"},
            "episode": {"type": "integer", "minimum": 0, "description": "0-based episode index within the company"},
            "start": {"type": "string", "format": "date"},
            "end": {"type": "string", "format": "date"},
            "slice_year": {"type": "integer", "description": "first year of the slice the measures were computed in"},
            "outcome": {"type": "string", "enum": outcomes},
            "local_distance": num(0.0, 2.0, "mean cosine distance between company words sharing an atom"),
            "global_distance": num(0.0, 2.0, "mean cosine distance between per-atom company centroids"),
            "tech_app_local_distance": num(0.0, 2.0, "mean cosine distance of technology/application pairs within atoms"),
            "centroid_spread": num(0.0, 2.0, "mean cosine distance of words from their per-atom centroid"),
            "negentropy": num(-1.0, 0.0, "normalized negative entropy of words across occupied atoms"),
            "element_familiarity": {"type": "number", "minimum": 0.0},
            "n_valid_elements": {"type": "integer", "minimum": 0},
            "rare_word_dummy": {"type": "integer", "enum": [0, 1]},
            "no_tech_dummy": {"type": "integer", "enum": [0, 1]},
            "text_length": {"type": "integer", "minimum": 0},
            "time_to_market_months": {"type": ["number", "null"], "minimum": 0.0, "description": "empty when censored"},
            "vc_diversity": {"type": ["number", "null"], "minimum": 0.0, "maximum": 1.0, "description": "empty when fewer than two investors with keywords"},
            "flags": {"type": "string", "description": "';'-separated degenerate/caveat flags"},
            "duration_days": {"type": "integer", "minimum": 0}
        }
    })
}
