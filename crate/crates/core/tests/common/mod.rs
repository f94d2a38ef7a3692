#![allow(dead_code)]

use landscape_core::corpus::{
    build_ppmi, build_vocab, count_cooccurrence, tokenize_corpus, CooccurConfig, DocumentRecord,
    PpmiMatrix, SliceSpec, Source, TokenRules, Vocabulary,
};
use landscape_core::sparse::SymCsr;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn doc(id: usize, year: i32, text: String) -> DocumentRecord {
    DocumentRecord {
        id: format!("d{id}"),
        year,
        source: Source::News,
        text,
    }
}

/// Vocabulary and per-slice PPMI of a document set, yearly slices.
pub fn ppmi_of(
    docs: &[DocumentRecord],
    years: (i32, i32),
    min_count: u64,
) -> (Vocabulary, Vec<PpmiMatrix>) {
    let corpus = tokenize_corpus(
        docs,
        &TokenRules::default(),
        SliceSpec::yearly(years.0, years.1),
    );
    let vocab = build_vocab(&corpus, min_count).unwrap();
    let counts = count_cooccurrence(&corpus, &vocab, &CooccurConfig::default()).unwrap();
    let y = counts.iter().map(|c| build_ppmi(c, 1.0).unwrap()).collect();
    (vocab, y)
}

pub fn cluster_words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:02}")).collect()
}

/// Three yearly slices (2000–2002) of documents drawn from two 20-word
/// clusters. `mover` appears in cluster `a` documents before `flip_year`
/// and in cluster `b` documents from then on.
pub fn planted_migration_corpus(seed: u64, flip_year: i32) -> Vec<DocumentRecord> {
    let mut r = rng(seed);
    let a = cluster_words("alpha", 20);
    let b = cluster_words("beta", 20);
    let mut docs = Vec::new();
    for year in 2000..=2002 {
        for i in 0..300 {
            let in_a = i % 2 == 0;
            let pool = if in_a { &a } else { &b };
            let mut toks: Vec<String> = (0..15)
                .map(|_| pool.choose(&mut r).unwrap().clone())
                .collect();
            if in_a == (year < flip_year) && i % 4 < 2 {
                let at = r.gen_range(0..toks.len());
                toks.insert(at, "mover".into());
            }
            docs.push(doc(docs.len(), year, toks.join(" ")));
        }
    }
    docs
}

/// Random symmetric nonnegative sparse matrix.
pub fn random_sym(r: &mut ChaCha8Rng, n: usize, density: f64) -> SymCsr {
    let mut trip = Vec::new();
    for i in 0..n {
        for j in i..n {
            if r.gen::<f64>() < density {
                trip.push((i as u32, j as u32, r.gen_range(0.0..3.0)));
            }
        }
    }
    SymCsr::from_upper_triplets(n, &trip).unwrap()
}

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| r.gen_range(-scale..scale))
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

/// Path of the bundled mini fixture config.
pub fn mini_config() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/config.toml")
}
