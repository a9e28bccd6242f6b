use crate::datasets::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// Which members classify each reference pattern correctly, stored as one
/// member bitset per pattern so intersections over a neighborhood are cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessMatrix {
    n_members: usize,
    n_patterns: usize,
    words: usize,
    bits: Vec<u64>,
}

impl CorrectnessMatrix {
    /// `rows[j][i]` tells whether member `j` is correct on pattern `i`.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n_members = rows.len();
        if n_members == 0 {
            return Err(Error::validation(
                "correctness matrix needs at least one member",
            ));
        }
        let n_patterns = rows[0].len();
        if rows.iter().any(|r| r.len() != n_patterns) {
            return Err(Error::validation("correctness rows differ in length"));
        }
        let mut m = CorrectnessMatrix::empty(n_members, n_patterns);
        for (j, row) in rows.iter().enumerate() {
            for (i, &ok) in row.iter().enumerate() {
                if ok {
                    m.set(j, i);
                }
            }
        }
        Ok(m)
    }

    fn empty(n_members: usize, n_patterns: usize) -> Self {
        let words = n_members.div_ceil(64);
        CorrectnessMatrix {
            n_members,
            n_patterns,
            words,
            bits: vec![0; words * n_patterns],
        }
    }

    fn set(&mut self, member: usize, pattern: usize) {
        self.bits[pattern * self.words + member / 64] |= 1 << (member % 64);
    }

    pub fn n_members(&self) -> usize {
        self.n_members
    }

    pub fn n_patterns(&self) -> usize {
        self.n_patterns
    }

    pub fn get(&self, member: usize, pattern: usize) -> bool {
        self.bits[pattern * self.words + member / 64] >> (member % 64) & 1 == 1
    }

    /// Bitset of members correct on `pattern`.
    pub fn pattern_mask(&self, pattern: usize) -> &[u64] {
        &self.bits[pattern * self.words..(pattern + 1) * self.words]
    }

    pub fn full_mask(&self) -> Vec<u64> {
        let mut mask = vec![u64::MAX; self.words];
        let spare = self.words * 64 - self.n_members;
        if spare > 0 {
            if let Some(last) = mask.last_mut() {
                *last >>= spare;
            }
        }
        mask
    }

    pub fn row(&self, member: usize) -> Vec<bool> {
        (0..self.n_patterns).map(|i| self.get(member, i)).collect()
    }
}

/// Member indices set in `mask`, ascending.
pub(crate) fn mask_members(mask: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in mask.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            out.push(w * 64 + b);
            bits &= bits - 1;
        }
    }
    out
}

/// Entry `(j, i)` is true iff member `j` predicts the label of reference pattern `i`.
pub fn build_correctness_matrix(
    ensemble: &Ensemble,
    reference: &Dataset,
) -> Result<CorrectnessMatrix> {
    if reference.is_empty() {
        return Err(Error::validation("reference set is empty"));
    }
    let preds = ensemble.predictions(reference)?;
    let mut m = CorrectnessMatrix::empty(ensemble.len(), reference.len());
    for i in 0..reference.len() {
        for (j, &v) in preds.votes(i).iter().enumerate() {
            if v == reference.label(i) {
                m.set(j, i);
            }
        }
    }
    Ok(m)
}
