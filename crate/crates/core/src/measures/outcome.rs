use std::collections::{BTreeMap, HashMap};

use super::{CompanyRecord, Event, EventKind, Outcome};
use crate::error::{Error, Result};

/// Consumer price index by year.
#[derive(Debug, Clone, PartialEq)]
pub struct CpiTable {
    index: BTreeMap<i32, f64>,
    base_year: i32,
}

impl CpiTable {
    pub fn new(index: BTreeMap<i32, f64>, base_year: i32) -> Result<Self> {
        if let Some((y, v)) = index.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "CPI index for {y} must be positive, got {v}"
            )));
        }
        if !index.contains_key(&base_year) {
            return Err(Error::MissingCpiYear(vec![base_year]));
        }
        Ok(CpiTable { index, base_year })
    }

    /// Converts a nominal amount from `year` to base-year dollars.
    pub fn deflate(&self, nominal: f64, year: i32) -> Result<f64> {
        let cpi = self
            .index
            .get(&year)
            .ok_or_else(|| Error::MissingCpiYear(vec![year]))?;
        Ok(nominal * self.index[&self.base_year] / cpi)
    }
}

/// Deflated acquisition prices per industry and the resulting cutoff for
/// the top 30% of each industry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AcquisitionBook {
    cutoffs: HashMap<String, f64>,
}

impl AcquisitionBook {
    /// Global pre-pass over every priced acquisition. The cutoff is the
    /// `⌈0.3·N⌉`-th largest deflated price, so exactly the top 30% (rounded
    /// up, ties included) are high-priced and a lone acquisition is high.
    pub fn build(companies: &[CompanyRecord], cpi: &CpiTable) -> Result<Self> {
        let mut prices: HashMap<String, Vec<f64>> = HashMap::new();
        let mut missing = Vec::new();
        for c in companies {
            for e in c.events.iter().filter(|e| e.kind == EventKind::Acquisition) {
                if let Some(p) = e.price_usd {
                    match cpi.deflate(p, chrono::Datelike::year(&e.date)) {
                        Ok(real) => prices.entry(c.industry.clone()).or_default().push(real),
                        Err(_) => missing.push(chrono::Datelike::year(&e.date)),
                    }
                }
            }
        }
        if !missing.is_empty() {
            missing.sort_unstable();
            missing.dedup();
            return Err(Error::MissingCpiYear(missing));
        }
        let cutoffs = prices
            .into_iter()
            .map(|(ind, mut p)| {
                p.sort_by(|a, b| b.total_cmp(a));
                let top = (3 * p.len()).div_ceil(10);
                (ind, p[top - 1])
            })
            .collect();
        Ok(AcquisitionBook { cutoffs })
    }

    pub fn cutoff(&self, industry: &str) -> Option<f64> {
        self.cutoffs.get(industry).copied()
    }

    pub fn is_high(&self, industry: &str, deflated: f64) -> bool {
        self.cutoff(industry).is_some_and(|c| deflated >= c)
    }
}

/// Competing-outcome code of a single event.
pub fn event_outcome(
    event: &Event,
    industry: &str,
    cpi: &CpiTable,
    book: &AcquisitionBook,
) -> Result<Outcome> {
    Ok(match event.kind {
        EventKind::Ipo => Outcome::IpoHighAcq,
        EventKind::Closure => Outcome::Close,
        k if k.is_funding() => Outcome::NewFunding,
        EventKind::Acquisition => match event.price_usd {
            None => Outcome::OtherAcq,
            Some(p) => {
                let real = cpi.deflate(p, chrono::Datelike::year(&event.date))?;
                if book.is_high(industry, real) {
                    Outcome::IpoHighAcq
                } else {
                    Outcome::OtherAcq
                }
            }
        },
        _ => unreachable!("all event kinds covered"),
    })
}
