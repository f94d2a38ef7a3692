//! Company-level recombination measures and the event-history panel.
//!
//! Descriptions are projected into one slice of the embedding landscape;
//! their words are grouped by discourse atom to score recombination within
//! modules (local) and across modules (global).

mod controls;
mod distance;
mod interpolate;
mod io;
mod lexicon;
mod mediators;
mod outcome;
mod panel;

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use controls::{element_familiarity, text_controls, RareThreshold, TextControls};
pub use distance::{
    centroid_spread, description_centroid, global_distance, local_distance, negentropy_balance,
    tech_app_local_distance, Centroid, CompanyModules, Measure, Pooling, SliceView,
};
pub use interpolate::{interpolate_measure, year_start};
pub use io::{read_companies, read_cpi, read_frequency_csv, read_term_list};
pub use lexicon::{classify_tech_app, LexiconSet, TokenLabel};
pub use mediators::{time_to_market, vc_diversity, DAYS_PER_MONTH};
pub use outcome::{event_outcome, AcquisitionBook, CpiTable};
pub use panel::{
    build_panel, panel_json_schema, write_panel_csv, PanelInputs, PanelOutput, PANEL_COLUMNS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Seed,
    SeriesA,
    SeriesB,
    LaterRound,
    Ipo,
    Acquisition,
    Closure,
}

impl EventKind {
    pub fn is_funding(self) -> bool {
        matches!(
            self,
            EventKind::Seed | EventKind::SeriesA | EventKind::SeriesB | EventKind::LaterRound
        )
    }

    pub fn is_early_round(self) -> bool {
        matches!(self, EventKind::SeriesA | EventKind::SeriesB)
    }

    /// Exits end a company's history; later events are ignored.
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            EventKind::Ipo | EventKind::Acquisition | EventKind::Closure
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvestorProfile {
    pub id: String,
    #[serde(default)]
    pub keywords: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub date: NaiveDate,
    #[serde(default)]
    pub price_usd: Option<f64>,
    #[serde(default)]
    pub investors: Vec<InvestorProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub date: NaiveDate,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanyRecord {
    pub id: String,
    pub description: String,
    pub founded: NaiveDate,
    pub industry: String,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default)]
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    IpoHighAcq,
    NewFunding,
    OtherAcq,
    Close,
    Censored,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::IpoHighAcq,
        Outcome::NewFunding,
        Outcome::OtherAcq,
        Outcome::Close,
        Outcome::Censored,
    ];

    /// Larger is more successful.
    pub fn success_rank(self) -> u8 {
        match self {
            Outcome::IpoHighAcq => 4,
            Outcome::NewFunding => 3,
            Outcome::OtherAcq => 2,
            Outcome::Close => 1,
            Outcome::Censored => 0,
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        Outcome::ALL.into_iter().find(|o| o.as_str() == s)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::IpoHighAcq => "ipo_high_acq",
            Outcome::NewFunding => "new_funding",
            Outcome::OtherAcq => "other_acq",
            Outcome::Close => "close",
            Outcome::Censored => "censored",
        }
    }
}

/// Why a measure fell back to its degenerate value, or another caveat on
/// a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    NoValidElements,
    ZeroCentroid,
    LocalEmptyPool,
    GlobalFewModules,
    TechAppEmptyPool,
    SpreadDegenerate,
    SingleModule,
    InconsistentTiming,
    SliceClamped,
    Interpolated,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::NoValidElements => "no_valid_elements",
            Flag::ZeroCentroid => "zero_centroid",
            Flag::LocalEmptyPool => "local_empty_pool",
            Flag::GlobalFewModules => "global_few_modules",
            Flag::TechAppEmptyPool => "tech_app_empty_pool",
            Flag::SpreadDegenerate => "spread_degenerate",
            Flag::SingleModule => "single_module",
            Flag::InconsistentTiming => "inconsistent_timing",
            Flag::SliceClamped => "slice_clamped",
            Flag::Interpolated => "interpolated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    /// Atoms holding fewer distinct company words are dropped as marginal.
    pub min_module_size: usize,
    pub pooling: Pooling,
    /// Patent-to-general relative frequency ratio above which a token is
    /// technical.
    pub freq_ratio_threshold: f64,
    pub lookback_years: i32,
    /// Share of the vocabulary, by ascending global count, treated as rare.
    pub rare_percentile: f64,
    pub cpi_base_year: i32,
    /// End date of trailing, right-censored episodes.
    pub censor_date: NaiveDate,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            min_module_size: 2,
            pooling: Pooling::Pairs,
            freq_ratio_threshold: 5.0,
            lookback_years: 5,
            rare_percentile: 0.01,
            cpi_base_year: 2020,
            censor_date: NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
        }
    }
}

/// One company episode of the event-history panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureRow {
    pub company_id: String,
    pub industry: String,
    pub episode: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub slice_year: i32,
    pub local_distance: f64,
    pub global_distance: f64,
    pub tech_app_local_distance: f64,
    pub centroid_spread: f64,
    pub negentropy: f64,
    pub element_familiarity: f64,
    pub n_valid_elements: usize,
    pub rare_word_dummy: u8,
    pub no_tech_dummy: u8,
    pub text_length: usize,
    pub time_to_market_months: Option<f64>,
    pub vc_diversity: Option<f64>,
    pub outcome: Outcome,
    pub flags: BTreeSet<Flag>,
}
