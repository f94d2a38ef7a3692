use super::{Event, EventKind, InvestorProfile};
use crate::error::{Error, Result};

pub const DAYS_PER_MONTH: f64 = 30.44;

/// Months from the first seed round to the first series A or B round.
/// `Ok(None)` when either is missing (right-censored).
pub fn time_to_market(events: &[Event]) -> Result<Option<f64>> {
    let seed = events.iter().find(|e| e.kind == EventKind::Seed);
    let early = events.iter().find(|e| e.kind.is_early_round());
    let (Some(seed), Some(early)) = (seed, early) else {
        return Ok(None);
    };
    let days = (early.date - seed.date).num_days();
    if days < 0 {
        return Err(Error::InvalidArgument(format!(
            "early round on {} precedes seed on {}",
            early.date, seed.date
        )));
    }
    Ok(Some(days as f64 / DAYS_PER_MONTH))
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact rational accumulator; falls back to floating point if the
/// denominators grow too large.
struct RationalSum {
    num: u128,
    den: u128,
    overflow: Option<f64>,
}

impl RationalSum {
    fn add(&mut self, n: u128, d: u128) {
        if let Some(f) = self.overflow.as_mut() {
            *f += n as f64 / d as f64;
            return;
        }
        let g = gcd(self.den, d);
        let lcm = (self.den / g).checked_mul(d);
        let combined = lcm.and_then(|l| {
            let a = self.num.checked_mul(l / self.den)?;
            let b = n.checked_mul(l / d)?;
            Some((a.checked_add(b)?, l))
        });
        match combined {
            Some((num, den)) => {
                let g = gcd(num, den).max(1);
                self.num = num / g;
                self.den = den / g;
            }
            None => self.overflow = Some(self.num as f64 / self.den as f64 + n as f64 / d as f64),
        }
    }

    fn mean(&self, count: usize) -> f64 {
        match self.overflow {
            Some(f) => f / count as f64,
            None => self.num as f64 / (self.den * count as u128) as f64,
        }
    }
}

/// Mean pairwise Jaccard distance `1 − |A∩B|/|A∪B|` between the keyword
/// sets of one transaction's investors. Investors without keywords are
/// ignored; fewer than two remaining gives `None`.
pub fn vc_diversity(investors: &[InvestorProfile]) -> Option<f64> {
    let sets: Vec<_> = investors
        .iter()
        .map(|i| &i.keywords)
        .filter(|k| !k.is_empty())
        .collect();
    if sets.len() < 2 {
        return None;
    }
    let mut sum = RationalSum {
        num: 0,
        den: 1,
        overflow: None,
    };
    let mut pairs = 0usize;
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            let inter = a.intersection(b).count() as u128;
            let union = a.union(b).count() as u128;
            sum.add(union - inter, union);
            pairs += 1;
        }
    }
    Some(sum.mean(pairs))
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;

    fn ev(kind: EventKind, date: &str) -> Event {
        Event {
            kind,
            date: date.parse().unwrap(),
            price_usd: None,
            investors: vec![],
        }
    }

    fn inv(keys: &[&str]) -> InvestorProfile {
        InvestorProfile {
            id: keys.join("+"),
            keywords: keys.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn one_year_is_about_twelve_months() {
        let e = [
            ev(EventKind::Seed, "2015-01-01"),
            ev(EventKind::SeriesA, "2016-01-01"),
        ];
        let m = time_to_market(&e).unwrap().unwrap();
        assert!((m - 365.0 / 30.44).abs() < 1e-12);
        assert!((m - 12.0).abs() < 0.05);
    }

    #[test]
    fn series_b_day_count() {
        let e = [
            ev(EventKind::Seed, "2015-01-01"),
            ev(EventKind::SeriesB, "2015-07-15"),
        ];
        let days = (NaiveDate::from_ymd_opt(2015, 7, 15).unwrap()
            - NaiveDate::from_ymd_opt(2015, 1, 1).unwrap())
        .num_days();
        assert_eq!(days, 195);
        let m = time_to_market(&e).unwrap().unwrap();
        assert!((m - 195.0 / 30.44).abs() < 1e-12);
        assert!((m - 6.41).abs() < 0.005);
    }

    #[test]
    fn censored_and_inconsistent() {
        assert_eq!(
            time_to_market(&[ev(EventKind::Seed, "2015-01-01")]).unwrap(),
            None
        );
        assert_eq!(
            time_to_market(&[ev(EventKind::LaterRound, "2015-01-01")]).unwrap(),
            None
        );
        let bad = [
            ev(EventKind::SeriesA, "2014-01-01"),
            ev(EventKind::Seed, "2015-01-01"),
        ];
        assert!(time_to_market(&bad).is_err());
    }

    #[test]
    fn jaccard_cases() {
        assert_eq!(
            vc_diversity(&[inv(&["a", "b"]), inv(&["b", "c"]), inv(&["c", "d"])]),
            Some(7.0 / 9.0)
        );
        assert_eq!(
            vc_diversity(&[inv(&["a", "b"]), inv(&["a", "b"])]),
            Some(0.0)
        );
        assert_eq!(vc_diversity(&[inv(&["a"]), inv(&["b"])]), Some(1.0));
        assert_eq!(vc_diversity(&[inv(&["a"]), inv(&[])]), None);
        assert_eq!(vc_diversity(&[inv(&["a"])]), None);
    }
}
