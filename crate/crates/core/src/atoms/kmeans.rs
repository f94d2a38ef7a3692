use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assign_words, check_finite, normalized_rows, AtomConfig, AtomDictionary};
use crate::error::Result;

fn nearest(x: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for c in 0..centers.nrows() {
        let s = x.row(i).dot(&centers.row(c));
        if s > best.1 {
            best = (c, s);
        }
    }
    best
}

fn plus_plus_init(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut dist: Vec<f64> = (0..n)
        .map(|i| 1.0 - x.row(i).dot(&x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let weights: Vec<f64> = dist.iter().map(|d| d.max(0.0).powi(2)).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // every point coincides with a center
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(pick);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(1.0 - x.row(i).dot(&x.row(pick)));
        }
    }
    DMatrix::from_fn(k, x.ncols(), |r, c| x[(chosen[r], c)])
}

/// Spherical k-means on length-normalized word vectors with k-means++
/// seeding. Empty clusters are reseeded from the point farthest from its
/// center.
pub fn kmeans_train(words: &DMatrix<f64>, year: i32, cfg: &AtomConfig) -> Result<AtomDictionary> {
    cfg.validate(words.nrows())?;
    check_finite(words)?;
    let (x, _live) = normalized_rows(words);
    let (n, dim) = x.shape();
    let k = cfg.num_atoms.min(n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = if n == 0 {
        DMatrix::zeros(cfg.num_atoms, dim)
    } else {
        plus_plus_init(&x, k, &mut rng)
    };

    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::with_capacity(cfg.iterations);
    for iter in 0..cfg.iterations {
        let mut sims = vec![0.0; n];
        let mut changed = false;
        for i in 0..n {
            let (c, s) = nearest(&x, i, &centers);
            changed |= labels[i] != c;
            labels[i] = c;
            sims[i] = s;
        }
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[labels[i]] > 1)
                .min_by(|&a, &b| sims[a].total_cmp(&sims[b]).then(a.cmp(&b)));
            if let Some(i) = far {
                sizes[labels[i]] -= 1;
                labels[i] = c;
                sizes[c] = 1;
                sims[i] = 1.0;
                centers.set_row(c, &x.row(i));
                changed = true;
            }
        }
        for c in 0..k {
            let mut sum = nalgebra::RowDVector::zeros(dim);
            for i in (0..n).filter(|&i| labels[i] == c) {
                sum += x.row(i);
            }
            let norm = sum.norm();
            // a zero sum scores every direction equally; keep the old center
            if norm > 0.0 {
                centers.set_row(c, &(sum / norm));
            }
        }
        let distortion: f64 = (0..n)
            .map(|i| 1.0 - x.row(i).dot(&centers.row(labels[i])))
            .sum();
        trace.push(distortion.max(0.0));
        if !changed && iter > 0 {
            break;
        }
    }

    let assignment = assign_words(&centers, words);
    Ok(AtomDictionary {
        year,
        atoms: centers,
        assignment,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::AtomMethod;

    fn cfg(k: usize) -> AtomConfig {
        AtomConfig {
            num_atoms: k,
            sparsity: 1,
            iterations: 20,
            method: AtomMethod::Kmeans,
            seed: 11,
        }
    }

    #[test]
    fn separable_clusters_recovered() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let e = 0.01 * i as f64;
            rows.extend_from_slice(&[1.0, e, 0.0]);
            rows.extend_from_slice(&[0.0, e, 1.0]);
        }
        let words = DMatrix::from_row_slice(20, 3, &rows);
        let d = kmeans_train(&words, 2000, &cfg(2)).unwrap();
        let a = &d.assignment.atom;
        for i in (0..20).step_by(2) {
            assert_eq!(a[i], a[0]);
            assert_eq!(a[i + 1], a[1]);
        }
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn k_equals_n_has_zero_distortion() {
        let words = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0, 0.3]);
        let d = kmeans_train(&words, 2000, &cfg(4)).unwrap();
        assert!(d.trace.last().unwrap().abs() < 1e-12);
        let mut seen: Vec<_> = d.assignment.atom.iter().map(|a| a.unwrap()).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn centers_unit_norm() {
        let words = DMatrix::from_fn(30, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let d = kmeans_train(&words, 2000, &cfg(5)).unwrap();
        for c in 0..5 {
            assert!((d.atoms.row(c).norm() - 1.0).abs() < 1e-12);
        }
    }
}
