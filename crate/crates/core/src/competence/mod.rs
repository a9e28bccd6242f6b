//! The region of competence: the validation patterns a query's neighborhood
//! is drawn from, optionally edited by ENN, with per-pattern radii for the
//! adaptive distance and the member correctness matrix used by selection.

mod correctness;
mod enn;
mod neighbors;

pub(crate) use self::correctness::mask_members;
pub use self::correctness::{build_correctness_matrix, CorrectnessMatrix};
pub use self::enn::{
    enn_filter, knn_vote, leave_one_out_predictions, neighbors_excluding_self, write_region_csv,
    EditedSet,
};
pub use self::neighbors::{compute_radii, euclidean, Neighbor, NeighborList};

use serde::{Deserialize, Serialize};

use self::neighbors::{check_k, k_smallest};
use crate::datasets::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// How neighbors are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborRule {
    /// Raw Euclidean distance.
    Plain,
    /// Raw distance divided by the reference pattern's radius.
    Adaptive,
}

/// Reference patterns with their radii and the pool's correctness on them.
/// Immutable once built; queries only read it.
#[derive(Debug, Clone)]
pub struct CompetenceIndex {
    reference: Dataset,
    /// `None` when the reference holds a single class, in which case
    /// adaptive ranking falls back to raw distance.
    radii: Option<Vec<f64>>,
    correctness: Option<CorrectnessMatrix>,
}

impl CompetenceIndex {
    pub fn new(reference: Dataset) -> Self {
        let radii = compute_radii(&reference).ok();
        CompetenceIndex {
            reference,
            radii,
            correctness: None,
        }
    }

    /// Builds the index and precomputes `ensemble`'s correctness matrix.
    pub fn build(reference: Dataset, ensemble: &Ensemble) -> Result<Self> {
        let mut index = CompetenceIndex::new(reference);
        index.correctness = Some(build_correctness_matrix(ensemble, &index.reference)?);
        Ok(index)
    }

    pub fn with_correctness(mut self, correctness: CorrectnessMatrix) -> Result<Self> {
        if correctness.n_patterns() != self.reference.len() {
            return Err(Error::validation(format!(
                "correctness matrix covers {} patterns, reference has {}",
                correctness.n_patterns(),
                self.reference.len()
            )));
        }
        self.correctness = Some(correctness);
        Ok(self)
    }

    pub fn reference(&self) -> &Dataset {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn radii(&self) -> Option<&[f64]> {
        self.radii.as_deref()
    }

    /// A cross-class duplicate (zero radius) ranks after every finite
    /// adaptive distance.
    pub fn is_infinite_adaptive(&self, i: usize) -> bool {
        self.radii.as_ref().is_some_and(|r| r[i] == 0.0)
    }

    pub fn correctness(&self) -> Option<&CorrectnessMatrix> {
        self.correctness.as_ref()
    }

    fn check_query(&self, query: &[f64], k: usize) -> Result<()> {
        if query.len() != self.reference.n_features() {
            return Err(Error::validation(format!(
                "query has {} features, reference has {}",
                query.len(),
                self.reference.n_features()
            )));
        }
        check_k(k, self.len())
    }

    fn scan(&self, query: &[f64], k: usize, effective: impl Fn(usize, f64) -> f64) -> NeighborList {
        let candidates = self
            .reference
            .rows()
            .enumerate()
            .map(|(index, row)| {
                let distance = euclidean(query, row);
                Neighbor {
                    index,
                    distance,
                    effective: effective(index, distance),
                }
            })
            .collect();
        k_smallest(candidates, k)
    }

    /// The `k` patterns nearest to `query` by Euclidean distance.
    pub fn knn(&self, query: &[f64], k: usize) -> Result<NeighborList> {
        self.check_query(query, k)?;
        Ok(self.scan(query, k, |_, d| d))
    }

    /// The `k` patterns with the smallest adaptive distance `d / R_i`.
    pub fn adaptive_knn(&self, query: &[f64], k: usize) -> Result<NeighborList> {
        self.check_query(query, k)?;
        Ok(match &self.radii {
            Some(radii) => self.scan(query, k, |i, d| {
                if radii[i] > 0.0 {
                    d / radii[i]
                } else {
                    f64::INFINITY
                }
            }),
            None => self.scan(query, k, |_, d| d),
        })
    }

    pub fn neighbors(&self, rule: NeighborRule, query: &[f64], k: usize) -> Result<NeighborList> {
        match rule {
            NeighborRule::Plain => self.knn(query, k),
            NeighborRule::Adaptive => self.adaptive_knn(query, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], labels: Vec<usize>) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::from_rows("line", &rows, labels, 2).unwrap()
    }

    #[test]
    fn adaptive_distance_prefers_wide_spheres() {
        // A@0 (R=3), B@3 (R=1), A@4 (R=1).
        let idx = CompetenceIndex::new(line(&[0.0, 3.0, 4.0], vec![0, 1, 0]));
        let plain = idx.knn(&[2.0], 1).unwrap();
        assert_eq!(plain.indices(), vec![1]);
        let adaptive = idx.adaptive_knn(&[2.0], 3).unwrap();
        assert_eq!(adaptive.indices(), vec![0, 1, 2]);
        let eff: Vec<f64> = adaptive.iter().map(|n| n.effective).collect();
        assert!((eff[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(&eff[1..], &[1.0, 2.0]);
    }

    #[test]
    fn exact_match_and_full_scan() {
        let idx = CompetenceIndex::new(line(&[0.0, 3.0, 4.0, 1.0], vec![0, 1, 0, 1]));
        let one = idx.knn(&[3.0], 1).unwrap();
        assert_eq!((one.indices(), one.as_slice()[0].distance), (vec![1], 0.0));
        assert_eq!(idx.knn(&[0.4], 4).unwrap().indices(), vec![0, 3, 1, 2]);
        assert!(idx.knn(&[0.0], 0).is_err());
        assert!(idx.knn(&[0.0], 5).is_err());
        assert!(idx.knn(&[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn zero_radius_sorts_last() {
        let idx = CompetenceIndex::new(line(&[1.0, 1.0, 5.0, 9.0], vec![0, 1, 1, 0]));
        assert!(idx.is_infinite_adaptive(0) && idx.is_infinite_adaptive(1));
        let list = idx.adaptive_knn(&[1.0], 4).unwrap();
        assert_eq!(list.indices(), vec![2, 3, 0, 1]);
        // Plain k-NN still finds the duplicates first.
        assert_eq!(idx.knn(&[1.0], 2).unwrap().indices(), vec![0, 1]);
    }

    #[test]
    fn equal_radii_keep_plain_order() {
        // Every pattern's nearest foe is exactly 1 away.
        let idx = CompetenceIndex::new(line(&[0.0, 1.0, 2.0, 3.0], vec![0, 1, 0, 1]));
        assert_eq!(idx.radii().unwrap(), &[1.0, 1.0, 1.0, 1.0]);
        for q in [-0.3, 0.7, 1.6, 2.2, 5.0] {
            assert_eq!(
                idx.knn(&[q], 4).unwrap().indices(),
                idx.adaptive_knn(&[q], 4).unwrap().indices()
            );
        }
    }

    #[test]
    fn single_class_reference_ranks_by_raw_distance() {
        let idx = CompetenceIndex::new(line(&[0.0, 2.0, 1.0], vec![1, 1, 1]));
        assert!(idx.radii().is_none());
        assert_eq!(
            idx.adaptive_knn(&[1.9], 3).unwrap().indices(),
            vec![1, 2, 0]
        );
    }
}
