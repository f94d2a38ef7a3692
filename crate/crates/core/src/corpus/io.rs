use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{DocumentRecord, PpmiMatrix, SliceSpec, Vocabulary};
use crate::error::{Error, Result};
use crate::sparse::SymCsr;

/// Reads one `DocumentRecord` per non-blank line.
pub fn read_documents(path: &Path) -> Result<Vec<DocumentRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DocumentRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path.display().to_string(), i + 1, e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Sparse triplet text format:
///
/// ```text
/// t  n  nnz
/// <year>  <n>  <nnz>
/// <i>  <j>  <value>      (nnz rows, i <= j, row-major order)
/// ```
pub fn write_ppmi_triplets(w: &mut impl Write, year: i32, y: &PpmiMatrix) -> Result<()> {
    let upper: Vec<_> = y.values.iter().filter(|(i, j, _)| i <= j).collect();
    writeln!(w, "t\tn\tnnz")?;
    writeln!(w, "{}\t{}\t{}", year, y.n(), upper.len())?;
    for (i, j, v) in upper {
        writeln!(w, "{i}\t{j}\t{v}")?;
    }
    Ok(())
}

pub fn read_ppmi_triplets(path: &Path, slice: usize) -> Result<(i32, PpmiMatrix)> {
    let name = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let mut next = || -> Result<(usize, String)> {
        let (i, l) = lines
            .next()
            .ok_or_else(|| Error::parse(&name, 0, "truncated file"))?;
        Ok((i + 1, l?))
    };
    let (_, header) = next()?;
    if header.trim() != "t\tn\tnnz" {
        return Err(Error::parse(&name, 1, "expected header `t\\tn\\tnnz`"));
    }
    let (ln, dims) = next()?;
    let dims: Vec<&str> = dims.split('\t').collect();
    let parse_err = |ln: usize| Error::parse(&name, ln, "malformed field");
    if dims.len() != 3 {
        return Err(parse_err(ln));
    }
    let year: i32 = dims[0].parse().map_err(|_| parse_err(ln))?;
    let n: usize = dims[1].parse().map_err(|_| parse_err(ln))?;
    let nnz: usize = dims[2].parse().map_err(|_| parse_err(ln))?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, row) = next()?;
        let f: Vec<&str> = row.split('\t').collect();
        if f.len() != 3 {
            return Err(parse_err(ln));
        }
        let i: u32 = f[0].parse().map_err(|_| parse_err(ln))?;
        let j: u32 = f[1].parse().map_err(|_| parse_err(ln))?;
        let v: f64 = f[2].parse().map_err(|_| parse_err(ln))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(
                &name,
                ln,
                "PPMI value must be finite and >= 0",
            ));
        }
        trip.push((i, j, v));
    }
    let values = SymCsr::from_upper_triplets(n, &trip)?;
    Ok((year, PpmiMatrix { slice, values }))
}

/// Vocabulary TSV: a `#slices` line, a column header, then one row per id.
///
/// ```text
/// #slices  <year_min>  <year_max>  <width>  <total_0> ... <total_T-1>
/// id  word  global  <year_0> ... <year_T-1>
/// 0  market  120  40 ...
/// ```
pub fn write_vocab(w: &mut impl Write, vocab: &Vocabulary) -> Result<()> {
    let s = vocab.slices();
    write!(w, "#slices\t{}\t{}\t{}", s.year_min, s.year_max, s.width)?;
    for t in 0..s.len() {
        write!(w, "\t{}", vocab.slice_total(t))?;
    }
    writeln!(w)?;
    write!(w, "id\tword\tglobal")?;
    for y in s.labels() {
        write!(w, "\t{y}")?;
    }
    writeln!(w)?;
    for (id, word) in vocab.words().iter().enumerate() {
        write!(w, "{id}\t{word}\t{}", vocab.global_count(id))?;
        for t in 0..s.len() {
            write!(w, "\t{}", vocab.count_in_slice(id, t))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let name = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let err = |ln: usize, m: &str| Error::parse(&name, ln, m);
    let first = lines.next().ok_or_else(|| err(1, "empty file"))??;
    let f: Vec<&str> = first.split('\t').collect();
    if f.len() < 4 || f[0] != "#slices" {
        return Err(err(1, "expected #slices line"));
    }
    let num = |s: &str, ln| s.parse::<i64>().map_err(|_| err(ln, "malformed number"));
    let slices = SliceSpec::new(
        num(f[1], 1)? as i32,
        num(f[2], 1)? as i32,
        num(f[3], 1)? as u32,
    )?;
    let t_len = slices.len();
    if f.len() != 4 + t_len {
        return Err(err(1, "slice totals do not match the slice range"));
    }
    let totals: Vec<u64> = f[4..]
        .iter()
        .map(|s| num(s, 1).map(|x| x as u64))
        .collect::<Result<_>>()?;
    lines.next().ok_or_else(|| err(2, "missing header"))??;
    let mut words = Vec::new();
    let mut counts = vec![Vec::new(); t_len];
    for (i, line) in lines.enumerate() {
        let ln = i + 3;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 + t_len {
            return Err(err(ln, "wrong column count"));
        }
        if num(f[0], ln)? as usize != words.len() {
            return Err(err(ln, "ids must be dense and ordered"));
        }
        words.push(f[1].to_string());
        for t in 0..t_len {
            counts[t].push(num(f[3 + t], ln)? as u64);
        }
    }
    Vocabulary::from_parts(words, slices, counts, totals)
}
