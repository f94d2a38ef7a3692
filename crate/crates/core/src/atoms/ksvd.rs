use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{assign_words, check_finite, normalized_rows, AtomConfig, AtomDictionary};
use crate::error::Result;

/// Sparse code of one sample: `(atom, coefficient)` pairs.
pub type SparseCode = Vec<(usize, f64)>;

fn residual_sq(x: &[f64], dict: &DMatrix<f64>, code: &SparseCode) -> f64 {
    let mut r = x.to_vec();
    for &(a, c) in code {
        for (d, ri) in r.iter_mut().enumerate() {
            *ri -= c * dict[(a, d)];
        }
    }
    r.iter().map(|v| v * v).sum()
}

/// Greedy orthogonal matching pursuit against the rows of `dict`, selecting
/// at most `sparsity` atoms and refitting all coefficients by least squares
/// after each selection.
pub fn orthogonal_matching_pursuit(x: &[f64], dict: &DMatrix<f64>, sparsity: usize) -> SparseCode {
    let dim = x.len();
    let xv = DVector::from_column_slice(x);
    let mut residual = xv.clone();
    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut coefs = DVector::zeros(0);
    let scale = xv.norm().max(1.0);
    for _ in 0..sparsity.min(dict.nrows()) {
        if residual.norm() <= 1e-14 * scale {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for a in 0..dict.nrows() {
            if support.contains(&a) {
                continue;
            }
            let corr = (0..dim)
                .map(|d| dict[(a, d)] * residual[d])
                .sum::<f64>()
                .abs();
            if best.is_none_or(|(_, c)| corr > c) {
                best = Some((a, corr));
            }
        }
        let Some((a, corr)) = best else { break };
        if corr <= 1e-14 * scale {
            break;
        }
        support.push(a);
        let sub = DMatrix::from_fn(dim, support.len(), |d, j| dict[(support[j], d)]);
        let gram = sub.transpose() * &sub;
        let Some(chol) = gram.cholesky() else {
            support.pop();
            break;
        };
        coefs = chol.solve(&(sub.transpose() * &xv));
        residual = &xv - &sub * &coefs;
    }
    support.into_iter().zip(coefs.iter().copied()).collect()
}

/// Leading right singular vector of `e` by power iteration on `EᵀE`,
/// started from `start`. Each step can only raise `‖E v‖`, so the refit
/// never does worse than the current atom.
fn leading_direction(e: &DMatrix<f64>, start: &DVector<f64>) -> DVector<f64> {
    let mut v = start.normalize();
    let mut energy = (e * &v).norm_squared();
    for _ in 0..500 {
        let w = e.tr_mul(&(e * &v));
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = w / norm;
        let next_energy = (e * &next).norm_squared();
        let done = next_energy - energy <= 1e-15 * next_energy.max(f64::MIN_POSITIVE);
        if next_energy >= energy {
            v = next;
            energy = next_energy;
        }
        if done {
            break;
        }
    }
    v
}

/// k-SVD on the row-normalized word vectors of one slice.
///
/// Each iteration sparse-codes every word with OMP (keeping the previous
/// code when it reconstructs better), then refits each atom and its
/// coefficients as the leading singular pair of the residual restricted to
/// the words using it. Unused atoms are reseeded from the worst
/// reconstructed words.
pub fn ksvd_train(words: &DMatrix<f64>, year: i32, cfg: &AtomConfig) -> Result<AtomDictionary> {
    cfg.validate(words.nrows())?;
    check_finite(words)?;
    let (x, _live) = normalized_rows(words);
    let (n, dim) = x.shape();
    let k_atoms = cfg.num_atoms;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut dict = DMatrix::zeros(k_atoms, dim);
    for (a, &i) in order.iter().take(k_atoms).enumerate() {
        dict.set_row(a, &x.row(i));
    }
    // fewer live words than atoms: fill with canonical directions
    for a in n.min(k_atoms)..k_atoms {
        dict[(a, a % dim)] = 1.0;
    }

    let mut codes: Vec<SparseCode> = vec![Vec::new(); n];
    let mut trace = Vec::with_capacity(cfg.iterations);
    for iter in 0..cfg.iterations {
        let fresh: Vec<SparseCode> = rows
            .par_iter()
            .zip(codes.par_iter())
            .map(|(row, old)| {
                let new = orthogonal_matching_pursuit(row, &dict, cfg.sparsity);
                if iter > 0 && residual_sq(row, &dict, old) <= residual_sq(row, &dict, &new) {
                    old.clone()
                } else {
                    new
                }
            })
            .collect();
        codes = fresh;

        let mut resid = x.clone();
        for (i, code) in codes.iter().enumerate() {
            for &(a, c) in code {
                for d in 0..dim {
                    resid[(i, d)] -= c * dict[(a, d)];
                }
            }
        }

        let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k_atoms];
        for (i, code) in codes.iter().enumerate() {
            for (slot, &(a, _)) in code.iter().enumerate() {
                users[a].push((i, slot));
            }
        }

        let mut dead = Vec::new();
        for a in 0..k_atoms {
            if users[a].is_empty() {
                dead.push(a);
                continue;
            }
            // E = residual with atom a's contribution restored, one row per user
            let m = users[a].len();
            let mut e = DMatrix::zeros(m, dim);
            for (r, &(i, slot)) in users[a].iter().enumerate() {
                let c = codes[i][slot].1;
                for d in 0..dim {
                    e[(r, d)] = resid[(i, d)] + c * dict[(a, d)];
                }
            }
            let atom = leading_direction(&e, &dict.row(a).transpose());
            let new_coefs = &e * &atom;
            for d in 0..dim {
                dict[(a, d)] = atom[d];
            }
            for (r, &(i, slot)) in users[a].iter().enumerate() {
                codes[i][slot].1 = new_coefs[r];
                for d in 0..dim {
                    resid[(i, d)] = e[(r, d)] - new_coefs[r] * atom[d];
                }
            }
        }

        let err: Vec<f64> = (0..n).map(|i| resid.row(i).norm_squared()).collect();
        trace.push(err.iter().sum());

        if !dead.is_empty() {
            let mut worst: Vec<usize> = (0..n).collect();
            worst.sort_by(|&a, &b| err[b].total_cmp(&err[a]).then(a.cmp(&b)));
            for (a, &i) in dead.iter().zip(worst.iter()) {
                let r = resid.row(i);
                let norm = r.norm();
                // a fully reconstructed worst word means every word is exact
                let src = if norm > 1e-12 {
                    r / norm
                } else {
                    x.row(i).into_owned()
                };
                dict.set_row(*a, &src);
            }
            log::debug!("k-SVD iteration {iter}: reseeded {} dead atoms", dead.len());
        }
    }

    // orient each atom toward the words that use it
    let mut mass = vec![0.0; k_atoms];
    for code in &codes {
        for &(a, c) in code {
            mass[a] += c;
        }
    }
    for (a, &m) in mass.iter().enumerate() {
        if m < 0.0 {
            for d in 0..dim {
                dict[(a, d)] = -dict[(a, d)];
            }
        }
    }

    let assignment = assign_words(&dict, words);
    Ok(AtomDictionary {
        year,
        atoms: dict,
        assignment,
        trace,
    })
}
