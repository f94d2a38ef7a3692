use super::SliceCooccurrence;
use crate::error::{Error, Result};
use crate::sparse::SymCsr;

/// Shifted positive PMI matrix of one slice. Pairs that never co-occur are
/// structural zeros and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PpmiMatrix {
    pub slice: usize,
    pub values: SymCsr,
}

impl PpmiMatrix {
    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }
}

/// `Y[w,c] = max(ln(#(w,c)·D / (#(w)·#(c))) − ln(shift), 0)`.
pub fn build_ppmi(counts: &SliceCooccurrence, shift: f64) -> Result<PpmiMatrix> {
    if !(shift >= 1.0 && shift.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "shift must be >= 1, got {shift}"
        )));
    }
    let log_shift = shift.ln();
    let d = counts.total;
    let m = &counts.marginals;
    let mut bad = None;
    let values = counts.pairs.map_filter(|w, c, v| {
        if v <= 0.0 {
            return 0.0;
        }
        if m[w] <= 0.0 || m[c] <= 0.0 {
            bad = Some((w, c));
            return 0.0;
        }
        let pmi = ((v * d) / (m[w] * m[c])).ln() - log_shift;
        pmi.max(0.0)
    });
    if let Some((w, c)) = bad {
        return Err(Error::InconsistentCounts(format!(
            "pair ({w},{c}) has mass but a zero marginal"
        )));
    }
    Ok(PpmiMatrix {
        slice: counts.slice,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_counts() -> SliceCooccurrence {
        // #(a,b)=2, #(a)=4, #(b)=2, D=8 via extra mass on (a,c) and (c,c')
        let pairs =
            SymCsr::from_upper_triplets(4, &[(0, 1, 2.0), (0, 2, 2.0), (2, 3, 0.0)]).unwrap();
        let mut s = SliceCooccurrence::from_pairs(0, pairs);
        s.marginals = vec![4.0, 2.0, 2.0, 0.0];
        s.total = 8.0;
        s
    }

    #[test]
    fn hand_pmi() {
        let y = build_ppmi(&hand_counts(), 1.0).unwrap();
        assert!((y.get(0, 1) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(y.get(0, 1), y.get(1, 0));
        assert_eq!(y.get(1, 2), 0.0);
        assert_eq!(y.get(3, 3), 0.0);
    }

    #[test]
    fn shift_clips() {
        let y = build_ppmi(&hand_counts(), std::f64::consts::E).unwrap();
        assert_eq!(y.get(0, 1), 0.0);
        assert!(build_ppmi(&hand_counts(), 0.5).is_err());
    }

    #[test]
    fn zero_marginal_is_inconsistent() {
        let pairs = SymCsr::from_upper_triplets(2, &[(0, 1, 1.0)]).unwrap();
        let mut s = SliceCooccurrence::from_pairs(0, pairs);
        s.marginals[1] = 0.0;
        assert!(matches!(
            build_ppmi(&s, 1.0),
            Err(Error::InconsistentCounts(_))
        ));
    }
}
