use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{CompanyRecord, CpiTable};
use crate::error::{Error, Result};

/// One `CompanyRecord` per non-blank line.
pub fn read_companies(path: &Path) -> Result<Vec<CompanyRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::parse(path.display().to_string(), i + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(File::open(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(path.display().to_string(), line, e.to_string())
}

/// `year,index` CSV with a header row.
pub fn read_cpi(path: &Path, base_year: i32) -> Result<CpiTable> {
    let mut index = BTreeMap::new();
    for rec in csv_reader(path)?.deserialize::<(i32, f64)>() {
        let (year, value) = rec.map_err(|e| csv_err(path, e))?;
        index.insert(year, value);
    }
    CpiTable::new(index, base_year)
}

/// `term,count` CSV with a header row.
pub fn read_frequency_csv(path: &Path) -> Result<HashMap<String, u64>> {
    let mut out = HashMap::new();
    for rec in csv_reader(path)?.deserialize::<(String, u64)>() {
        let (term, count) = rec.map_err(|e| csv_err(path, e))?;
        *out.entry(term).or_insert(0) += count;
    }
    Ok(out)
}

/// One term per line; `#` starts a comment line.
pub fn read_term_list(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.to_string());
        }
    }
    Ok(out)
}
