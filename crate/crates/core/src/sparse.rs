//! Compressed sparse row storage for symmetric matrices.
//!
//! Both triangles are stored so row slices can be used directly in
//! sparse-dense products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SymCsr {
    pub fn zeros(n: usize) -> Self {
        SymCsr {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from upper-triangle triplets `(i, j, v)` with `i <= j`.
    /// Duplicate coordinates are summed in input order.
    pub fn from_upper_triplets(n: usize, triplets: &[(u32, u32, f64)]) -> Result<Self> {
        let mut full: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            if i > j {
                return Err(Error::Format(format!(
                    "triplet ({i},{j}) is below the diagonal"
                )));
            }
            if i as usize >= n || j as usize >= n {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({i},{j}) outside {n}x{n}"
                )));
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        Ok(Self::from_full_triplets(n, full))
    }

    /// Builds from triplets that already contain both orientations.
    pub(crate) fn from_full_triplets(n: usize, mut full: Vec<(u32, u32, f64)>) -> Self {
        // stable sort keeps the summation order of duplicates
        full.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(full.len());
        let mut vals: Vec<f64> = Vec::with_capacity(full.len());
        let mut last: Option<(u32, u32)> = None;
        for (i, j, v) in full {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i as usize + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SymCsr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries with `i <= j`.
    pub fn nnz_upper(&self) -> usize {
        self.iter().filter(|(i, j, _)| i <= j).count()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .map(move |(&j, &v)| (i, j as usize, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum()
    }

    /// Returns `self * dense`.
    pub fn mul_dense(&self, dense: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(dense.nrows(), self.n, "sparse-dense product dimension");
        let k = dense.ncols();
        let mut out = DMatrix::zeros(self.n, k);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                for c in 0..k {
                    out[(i, c)] += v * dense[(j as usize, c)];
                }
            }
        }
        out
    }

    /// `sum_{(i,j) stored} self[i,j] * <a_i, b_j>`, i.e. `<self, A Bᵀ>_F`.
    pub fn inner_with_product(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let k = a.ncols();
        let mut acc = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let mut dot = 0.0;
                for c in 0..k {
                    dot += a[(i, c)] * b[(j as usize, c)];
                }
                acc += v * dot;
            }
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j, v)| self.get(j, i) == v)
    }

    /// Applies `f` to every stored value, dropping entries mapped to zero.
    pub(crate) fn map_filter(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> SymCsr {
        let mut full = Vec::with_capacity(self.vals.len());
        for (i, j, v) in self.iter() {
            let nv = f(i, j, v);
            if nv != 0.0 {
                full.push((i as u32, j as u32, nv));
            }
        }
        SymCsr::from_full_triplets(self.n, full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_triplets_mirror() {
        let m = SymCsr::from_upper_triplets(3, &[(0, 1, 2.0), (1, 2, 3.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(2, 1), 3.0);
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.nnz_upper(), 3);
        assert!(m.is_symmetric());
        assert_eq!(m.row_sums(), vec![2.0, 5.0, 4.0]);
    }

    #[test]
    fn rejects_lower_triplet() {
        assert!(SymCsr::from_upper_triplets(3, &[(2, 1, 1.0)]).is_err());
    }

    #[test]
    fn mul_dense_matches_dense() {
        let m = SymCsr::from_upper_triplets(3, &[(0, 1, 2.0), (0, 2, -1.0), (1, 1, 4.0)]).unwrap();
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let got = m.mul_dense(&x);
        let want = m.to_dense() * &x;
        assert!((got - want).abs().max() < 1e-14);
    }
}
