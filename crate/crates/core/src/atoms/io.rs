//! Atom files.
//!
//! Assignments are TSV rows `year<TAB>atom_id<TAB>word<TAB>score`, grouped by
//! atom with the best-scoring members first; zero-norm words carry the atom
//! id `unassigned`. The dictionary matrix is binary, little-endian:
//! magic `TATM`, version u32, year i32, K u32, k u32, then K·k f64 row-major.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{atom_summary, Assignment, AtomDictionary};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TATM";
const VERSION: u32 = 1;

pub fn write_assignments_tsv(
    w: &mut impl Write,
    dict: &AtomDictionary,
    words: &[String],
) -> Result<()> {
    if words.len() != dict.assignment.len() {
        return Err(Error::DimensionMismatch("word list vs assignment".into()));
    }
    writeln!(w, "year\tatom_id\tword\tscore")?;
    for group in atom_summary(dict, usize::MAX) {
        for (wid, score) in group.members {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                dict.year, group.atom, words[wid], score
            )?;
        }
    }
    for wid in dict.assignment.unassigned() {
        writeln!(w, "{}\tunassigned\t{}\t0", dict.year, words[wid])?;
    }
    Ok(())
}

/// Reads an assignment TSV back into word-id order using `index`.
pub fn read_assignments_tsv(
    path: &Path,
    index: &HashMap<String, usize>,
) -> Result<(i32, Assignment)> {
    let name = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let n = index.len();
    let mut out = Assignment {
        atom: vec![None; n],
        score: vec![0.0; n],
    };
    let mut seen = vec![false; n];
    let mut year = None;
    for (i, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let err = |m: &str| Error::parse(&name, i + 1, m);
        if f.len() != 4 {
            return Err(err("expected 4 columns"));
        }
        let y: i32 = f[0].parse().map_err(|_| err("bad year"))?;
        if *year.get_or_insert(y) != y {
            return Err(err("mixed years in one file"));
        }
        let wid = *index
            .get(f[2])
            .ok_or_else(|| err("word not in vocabulary"))?;
        if std::mem::replace(&mut seen[wid], true) {
            return Err(err("word assigned twice"));
        }
        out.atom[wid] = match f[1] {
            "unassigned" => None,
            a => Some(a.parse().map_err(|_| err("bad atom id"))?),
        };
        out.score[wid] = f[3].parse().map_err(|_| err("bad score"))?;
    }
    if let Some(w) = seen.iter().position(|s| !s) {
        return Err(Error::parse(
            &name,
            0,
            format!("word id {w} missing from assignment"),
        ));
    }
    Ok((year.unwrap_or_default(), out))
}

pub fn write_dictionary(w: &mut impl Write, dict: &AtomDictionary) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dict.year.to_le_bytes())?;
    w.write_all(&(dict.atoms.nrows() as u32).to_le_bytes())?;
    w.write_all(&(dict.atoms.ncols() as u32).to_le_bytes())?;
    for r in 0..dict.atoms.nrows() {
        for c in 0..dict.atoms.ncols() {
            w.write_all(&dict.atoms[(r, c)].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Returns the year and the `K × k` atom matrix.
pub fn read_dictionary(r: &mut impl Read) -> Result<(i32, DMatrix<f64>)> {
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if &b4 != MAGIC {
        return Err(Error::Format("not an atom dictionary (bad magic)".into()));
    }
    let mut u32_at = |r: &mut dyn Read| -> Result<u32> {
        r.read_exact(&mut b4)?;
        Ok(u32::from_le_bytes(b4))
    };
    let version = u32_at(r)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported dictionary version {version}"
        )));
    }
    let year = u32_at(r)? as i32;
    let (k_atoms, dim) = (u32_at(r)? as usize, u32_at(r)? as usize);
    let mut buf = vec![0u8; k_atoms * dim * 8];
    r.read_exact(&mut buf)?;
    let vals = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok((year, DMatrix::from_row_iterator(k_atoms, dim, vals)))
}
