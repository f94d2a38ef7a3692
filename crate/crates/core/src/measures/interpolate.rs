use chrono::NaiveDate;

use crate::error::{Error, Result};

pub fn year_start(year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year")
}

/// Value of a measure at `query` from dated snapshots: the nearest endpoint
/// outside the recorded range, linear in days between snapshots.
pub fn interpolate_measure(snapshots: &[(NaiveDate, f64)], query: NaiveDate) -> Result<f64> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("no snapshots to interpolate".into()));
    }
    let mut s = snapshots.to_vec();
    s.sort_by_key(|p| p.0);
    let (first, last) = (s[0], s[s.len() - 1]);
    if query <= first.0 {
        return Ok(first.1);
    }
    if query >= last.0 {
        return Ok(last.1);
    }
    let i = s
        .iter()
        .rposition(|p| p.0 <= query)
        .expect("query after first snapshot");
    let ((d0, v0), (d1, v1)) = (s[i], s[i + 1]);
    if d0 == query {
        return Ok(v0);
    }
    let span = (d1 - d0).num_days() as f64;
    let before = (query - d0).num_days() as f64;
    let after = (d1 - query).num_days() as f64;
    Ok((v0 * after + v1 * before) / span)
}
