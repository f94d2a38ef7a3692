use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::Outcome;

/// Panel columns summarized in the report, in output order.
pub const SUMMARY_COLUMNS: [&str; 12] = [
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
];

/// Measures that get an outcome-rate quantile table.
pub const QUANTILE_COLUMNS: [&str; 6] = [
    "local_distance",
    "global_distance",
    "tech_app_local_distance",
    "centroid_spread",
    "negentropy",
    "element_familiarity",
];

/// Numeric panel columns plus outcomes, as read back from the panel CSV.
#[derive(Debug, Clone, Default)]
pub struct PanelTable {
    pub company_ids: Vec<String>,
    pub outcomes: Vec<Outcome>,
    /// Column name to one value per row; empty cells are `None`.
    pub columns: BTreeMap<String, Vec<Option<f64>>>,
}

impl PanelTable {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn from_csv(r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        let headers = rd.headers().map_err(fmt)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Format(format!("panel column `{name}` missing")))
        };
        let id_col = col("company_id")?;
        let outcome_col = col("outcome")?;
        let idx: Vec<(&str, usize)> = SUMMARY_COLUMNS
            .iter()
            .map(|c| Ok((*c, col(c)?)))
            .collect::<Result<_>>()?;
        let mut table = PanelTable {
            columns: idx
                .iter()
                .map(|(name, _)| (name.to_string(), Vec::new()))
                .collect(),
            ..PanelTable::default()
        };
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(fmt)?;
            let bad = |msg: String| Error::parse("panel.csv", line + 2, msg);
            table.company_ids.push(rec[id_col].to_string());
            table.outcomes.push(
                Outcome::parse(&rec[outcome_col])
                    .ok_or_else(|| bad(format!("unknown outcome `{}`", &rec[outcome_col])))?,
            );
            for (name, i) in &idx {
                let cell = rec[*i].trim();
                let v = if cell.is_empty() {
                    None
                } else {
                    Some(
                        cell.parse::<f64>()
                            .map_err(|_| bad(format!("{name}: not a number")))?,
                    )
                };
                table
                    .columns
                    .get_mut(*name)
                    .expect("column registered")
                    .push(v);
            }
        }
        Ok(table)
    }

    pub fn present(&self, column: &str) -> Vec<f64> {
        self.columns
            .get(column)
            .map(|v| v.iter().flatten().copied().collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Describe {
    pub n: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; 0 for a single value.
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

pub fn describe(values: &[f64]) -> Describe {
    let n = values.len();
    if n == 0 {
        return Describe {
            n,
            mean: None,
            std: None,
            min: None,
            max: None,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std = if n == 1 {
        0.0
    } else {
        (ss / (n - 1) as f64).sqrt()
    };
    Describe {
        n,
        mean: Some(mean),
        std: Some(std),
        min: values.iter().copied().reduce(f64::min),
        max: values.iter().copied().reduce(f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileGroup {
    /// 1-based, ascending in the measure.
    pub group: usize,
    pub n: usize,
    pub mean: Option<f64>,
    /// Share of rows in the group ending in each outcome.
    pub rates: BTreeMap<String, f64>,
}

/// Splits rows into `groups` equal-size groups by ascending value (ties in
/// row order; group sizes differ by at most one) and tabulates outcome
/// rates per group.
pub fn quantile_table(values: &[f64], outcomes: &[Outcome], groups: usize) -> Vec<QuantileGroup> {
    assert_eq!(values.len(), outcomes.len(), "one outcome per value");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    (0..groups)
        .map(|g| {
            let members = &order[g * n / groups..(g + 1) * n / groups];
            let mut rates: BTreeMap<String, f64> = Outcome::ALL
                .iter()
                .map(|o| (o.as_str().to_string(), 0.0))
                .collect();
            for &i in members {
                *rates.get_mut(outcomes[i].as_str()).unwrap() += 1.0;
            }
            if !members.is_empty() {
                rates.values_mut().for_each(|r| *r /= members.len() as f64);
            }
            let vals: Vec<f64> = members.iter().map(|&i| values[i]).collect();
            QuantileGroup {
                group: g + 1,
                n: members.len(),
                mean: describe(&vals).mean,
                rates,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeShare {
    pub count: usize,
    pub share: Option<f64>,
}

pub fn outcome_shares(outcomes: &[Outcome]) -> BTreeMap<String, OutcomeShare> {
    Outcome::ALL
        .iter()
        .map(|o| {
            let count = outcomes.iter().filter(|x| *x == o).count();
            let share = (!outcomes.is_empty()).then(|| count as f64 / outcomes.len() as f64);
            (o.as_str().to_string(), OutcomeShare { count, share })
        })
        .collect()
}
