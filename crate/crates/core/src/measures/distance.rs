use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Flag, TokenLabel};
use crate::atoms::Assignment;
use crate::corpus::Vocabulary;
use crate::embedding::cosine;

/// One slice of the landscape as seen by the measures.
#[derive(Debug, Clone, Copy)]
pub struct SliceView<'a> {
    pub vocab: &'a Vocabulary,
    /// `n × k` word vectors of the slice.
    pub vectors: &'a DMatrix<f64>,
    pub assignment: &'a Assignment,
}

/// A measure value plus the flag raised when it fell back to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub flag: Option<Flag>,
}

impl Measure {
    fn ok(value: f64) -> Self {
        Measure { value, flag: None }
    }

    fn degenerate(flag: Flag) -> Self {
        Measure {
            value: 0.0,
            flag: Some(flag),
        }
    }
}

/// How within-atom distances are aggregated across atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Mean over the union of all within-atom pairs.
    #[default]
    Pairs,
    /// Mean of per-atom means.
    Regions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub vector: Vec<f64>,
    pub n_valid: usize,
    pub flag: Option<Flag>,
}

/// Mean of the vectors of in-vocabulary tokens, duplicates counted.
pub fn description_centroid<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    vectors: &DMatrix<f64>,
) -> Centroid {
    let k = vectors.ncols();
    let mut sum = vec![0.0; k];
    let mut n_valid = 0;
    for id in tokens.iter().filter_map(|t| vocab.id(t.as_ref())) {
        n_valid += 1;
        for (c, s) in sum.iter_mut().enumerate() {
            *s += vectors[(id, c)];
        }
    }
    if n_valid == 0 {
        return Centroid {
            vector: sum,
            n_valid,
            flag: Some(Flag::NoValidElements),
        };
    }
    let vector: Vec<f64> = sum.into_iter().map(|s| s / n_valid as f64).collect();
    let flag = vector
        .iter()
        .all(|&v| v == 0.0)
        .then_some(Flag::ZeroCentroid);
    Centroid {
        vector,
        n_valid,
        flag,
    }
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0).then(|| v.into_iter().map(|x| x / norm).collect())
}

fn cos_dist(a: &[f64], b: &[f64]) -> Option<f64> {
    cosine(a, b).map(|c| 1.0 - c)
}

fn mean_of_units(members: &[usize], units: &BTreeMap<usize, Vec<f64>>) -> Vec<f64> {
    let k = units.values().next().map_or(0, Vec::len);
    let mut sum = vec![0.0; k];
    for w in members {
        for (s, x) in sum.iter_mut().zip(&units[w]) {
            *s += x;
        }
    }
    sum.into_iter().map(|s| s / members.len() as f64).collect()
}

/// A company's distinct, assigned, in-vocabulary words grouped by atom.
///
/// Distance measures work on distinct words with unit-normalized vectors,
/// so they ignore token order, repetition and per-word vector scale.
#[derive(Debug, Clone)]
pub struct CompanyModules {
    /// atom → member word ids, ascending.
    pub groups: BTreeMap<usize, Vec<usize>>,
    units: BTreeMap<usize, Vec<f64>>,
}

impl CompanyModules {
    pub fn new<S: AsRef<str>>(tokens: &[S], view: &SliceView) -> Self {
        let ids: BTreeSet<usize> = tokens
            .iter()
            .filter_map(|t| view.vocab.id(t.as_ref()))
            .collect();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut units = BTreeMap::new();
        for id in ids {
            let Some(atom) = view.assignment.atom[id] else {
                continue;
            };
            let Some(u) = unit(view.vectors.row(id).iter().copied().collect()) else {
                continue;
            };
            units.insert(id, u);
            groups.entry(atom).or_default().push(id);
        }
        CompanyModules { groups, units }
    }

    pub fn unit_vector(&self, word: usize) -> &[f64] {
        &self.units[&word]
    }

    /// Atoms with at least `min_size` company words.
    pub fn surviving(&self, min_size: usize) -> impl Iterator<Item = (usize, &[usize])> {
        self.groups
            .iter()
            .filter(move |(_, m)| m.len() >= min_size.max(1))
            .map(|(&a, m)| (a, m.as_slice()))
    }

    fn centroid(&self, members: &[usize]) -> Option<Vec<f64>> {
        let c = mean_of_units(members, &self.units);
        c.iter().any(|&x| x != 0.0).then_some(c)
    }
}

/// Mean cosine distance between company words sharing an atom.
pub fn local_distance(m: &CompanyModules, min_module_size: usize, pooling: Pooling) -> Measure {
    let mut pooled = 0.0;
    let mut pairs = 0usize;
    let mut region_means = Vec::new();
    for (_, members) in m.surviving(min_module_size) {
        let (mut s, mut c) = (0.0, 0usize);
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                s += cos_dist(m.unit_vector(a), m.unit_vector(b)).unwrap_or(0.0);
                c += 1;
            }
        }
        if c > 0 {
            pooled += s;
            pairs += c;
            region_means.push(s / c as f64);
        }
    }
    if pairs == 0 {
        return Measure::degenerate(Flag::LocalEmptyPool);
    }
    match pooling {
        Pooling::Pairs => Measure::ok(pooled / pairs as f64),
        Pooling::Regions => {
            Measure::ok(region_means.iter().sum::<f64>() / region_means.len() as f64)
        }
    }
}

/// Mean cosine distance between the per-atom centroids of company words.
pub fn global_distance(m: &CompanyModules, min_module_size: usize) -> Measure {
    let centroids: Vec<Vec<f64>> = m
        .surviving(min_module_size)
        .filter_map(|(_, mem)| m.centroid(mem))
        .collect();
    if centroids.len() < 2 {
        return Measure::degenerate(Flag::GlobalFewModules);
    }
    let (mut s, mut c) = (0.0, 0usize);
    for (i, a) in centroids.iter().enumerate() {
        for b in &centroids[i + 1..] {
            s += cos_dist(a, b).unwrap_or(0.0);
            c += 1;
        }
    }
    Measure::ok(s / c as f64)
}

/// Mean cosine distance over (technology, application) word pairs sharing
/// an atom, pooled across atoms.
pub fn tech_app_local_distance(
    m: &CompanyModules,
    labels: &BTreeMap<usize, TokenLabel>,
    min_module_size: usize,
) -> Measure {
    let (mut s, mut c) = (0.0, 0usize);
    for (_, members) in m.surviving(min_module_size) {
        let (tech, app): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|w| labels.get(w) == Some(&TokenLabel::Technology));
        for &t in &tech {
            for &a in &app {
                s += cos_dist(m.unit_vector(t), m.unit_vector(a)).unwrap_or(0.0);
                c += 1;
            }
        }
    }
    if c == 0 {
        return Measure::degenerate(Flag::TechAppEmptyPool);
    }
    Measure::ok(s / c as f64)
}

/// Mean over atoms of the mean cosine distance from each company word to
/// the company's centroid in that atom. Atoms with a zero centroid are
/// skipped and flagged.
pub fn centroid_spread(m: &CompanyModules, min_module_size: usize) -> Measure {
    let mut per_atom = Vec::new();
    let mut skipped = false;
    for (_, members) in m.surviving(min_module_size) {
        let Some(c) = m.centroid(members) else {
            skipped = true;
            continue;
        };
        let total: f64 = members
            .iter()
            .map(|&w| cos_dist(m.unit_vector(w), &c).unwrap_or(0.0))
            .sum();
        per_atom.push(total / members.len() as f64);
    }
    if per_atom.is_empty() {
        return Measure::degenerate(Flag::SpreadDegenerate);
    }
    Measure {
        value: per_atom.iter().sum::<f64>() / per_atom.len() as f64,
        flag: skipped.then_some(Flag::SpreadDegenerate),
    }
}

/// `Σ pᵢ ln pᵢ / ln C` over the `C` occupied atoms, in `[−1, 0]`.
pub fn negentropy_balance(m: &CompanyModules) -> Measure {
    let counts: Vec<usize> = m.groups.values().map(Vec::len).collect();
    if counts.len() < 2 {
        return Measure::degenerate(Flag::SingleModule);
    }
    let total: usize = counts.iter().sum();
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p.ln()
        })
        .sum();
    Measure::ok((h / (counts.len() as f64).ln()).clamp(-1.0, 0.0))
}
