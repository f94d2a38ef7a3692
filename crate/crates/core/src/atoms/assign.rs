use nalgebra::DMatrix;
use serde::Serialize;

use super::AtomDictionary;

/// Hard assignment of every word: `atom[w]` is `None` for zero-norm words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub atom: Vec<Option<usize>>,
    pub score: Vec<f64>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.atom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom.is_empty()
    }

    pub fn unassigned(&self) -> Vec<usize> {
        (0..self.atom.len())
            .filter(|&i| self.atom[i].is_none())
            .collect()
    }
}

/// Assigns each word to the atom of highest cosine similarity; the lowest
/// atom index wins ties.
pub fn assign_words(atoms: &DMatrix<f64>, words: &DMatrix<f64>) -> Assignment {
    let norms: Vec<f64> = (0..atoms.nrows()).map(|a| atoms.row(a).norm()).collect();
    let mut out = Assignment {
        atom: Vec::with_capacity(words.nrows()),
        score: Vec::with_capacity(words.nrows()),
    };
    for i in 0..words.nrows() {
        let w = words.row(i);
        let wn = w.norm();
        if wn == 0.0 {
            out.atom.push(None);
            out.score.push(0.0);
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (a, &norm) in norms.iter().enumerate() {
            if norm == 0.0 {
                continue;
            }
            let cos = w.dot(&atoms.row(a)) / (wn * norm);
            if best.is_none_or(|(_, s)| cos > s) {
                best = Some((a, cos));
            }
        }
        out.atom.push(best.map(|b| b.0));
        out.score.push(best.map_or(0.0, |b| b.1));
    }
    let missing = out.atom.iter().filter(|a| a.is_none()).count();
    if missing > 0 {
        log::warn!("{missing} zero-norm words left unassigned");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomMembers {
    pub atom: usize,
    /// `(word id, score)`, best first.
    pub members: Vec<(usize, f64)>,
}

/// Top-`top_m` members of every atom, by score then word id.
pub fn atom_summary(dict: &AtomDictionary, top_m: usize) -> Vec<AtomMembers> {
    let mut groups: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dict.num_atoms()];
    for (w, a) in dict.assignment.atom.iter().enumerate() {
        if let Some(a) = a {
            groups[*a].push((w, dict.assignment.score[w]));
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(atom, mut members)| {
            members.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            members.truncate(top_m);
            AtomMembers { atom, members }
        })
        .collect()
}
