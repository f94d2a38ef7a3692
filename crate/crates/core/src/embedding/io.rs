//! Embedding files.
//!
//! Binary layout, little-endian:
//!
//! ```text
//! magic    4 bytes  "TEMB"
//! version  u32      1
//! T, n, k  u32 ×3
//! years    i32 ×T
//! values   f32 ×(T·n·k), slice-major then row-major
//! ```

use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::EmbeddingTensor;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TEMB";
const VERSION: u32 = 1;

pub fn write_embeddings(w: &mut impl Write, u: &EmbeddingTensor) -> Result<()> {
    w.write_all(MAGIC)?;
    for x in [VERSION, u.num_slices() as u32, u.n() as u32, u.k() as u32] {
        w.write_all(&x.to_le_bytes())?;
    }
    for y in u.years() {
        w.write_all(&y.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(u.n() * u.k() * 4);
    for s in u.slices() {
        buf.clear();
        for i in 0..s.nrows() {
            for c in 0..s.ncols() {
                buf.extend_from_slice(&(s[(i, c)] as f32).to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_embeddings(r: &mut impl Read) -> Result<EmbeddingTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an embedding file (bad magic)".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported embedding file version {version}"
        )));
    }
    let (t, n, k) = (
        read_u32(r)? as usize,
        read_u32(r)? as usize,
        read_u32(r)? as usize,
    );
    let mut years = Vec::with_capacity(t);
    for _ in 0..t {
        years.push(read_u32(r)? as i32);
    }
    let mut slices = Vec::with_capacity(t);
    let mut buf = vec![0u8; n * k * 4];
    for _ in 0..t {
        r.read_exact(&mut buf)?;
        let vals = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
        slices.push(DMatrix::from_row_iterator(n, k, vals));
    }
    EmbeddingTensor::new(slices, years)
}

/// `word<TAB>year<TAB>v1..vk`, one line per word and slice.
pub fn write_embeddings_tsv(
    w: &mut impl Write,
    u: &EmbeddingTensor,
    words: &[String],
) -> Result<()> {
    if words.len() != u.n() {
        return Err(Error::DimensionMismatch(
            "word list vs embedding rows".into(),
        ));
    }
    for (t, s) in u.slices().iter().enumerate() {
        let year = u.years()[t];
        for (i, word) in words.iter().enumerate() {
            write!(w, "{word}\t{year}")?;
            for c in 0..s.ncols() {
                write!(w, "\t{}", s[(i, c)] as f32)?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}
