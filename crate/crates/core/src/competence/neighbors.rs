use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One reference pattern returned by a neighbor query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
    /// Distance used for ranking: the raw distance for plain k-NN, the raw
    /// distance over the pattern's radius for adaptive k-NN.
    pub effective: f64,
}

/// Neighbors sorted by effective distance, ties by reference index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeighborList(Vec<Neighbor>);

impl NeighborList {
    pub fn from_neighbors(neighbors: Vec<Neighbor>) -> Self {
        NeighborList(neighbors)
    }

    /// Builds a list from indices alone, nearest first, for hand-made cases.
    pub fn from_indices(indices: &[usize]) -> Self {
        NeighborList(
            indices
                .iter()
                .enumerate()
                .map(|(rank, &index)| Neighbor {
                    index,
                    distance: rank as f64,
                    effective: rank as f64,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.0.iter()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|n| n.index).collect()
    }

    pub fn as_slice(&self) -> &[Neighbor] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a NeighborList {
    type Item = &'a Neighbor;
    type IntoIter = std::slice::Iter<'a, Neighbor>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Keeps the `k` smallest candidates by `(effective, index)`, sorted.
pub(crate) fn k_smallest(mut candidates: Vec<Neighbor>, k: usize) -> NeighborList {
    let order = |a: &Neighbor, b: &Neighbor| {
        a.effective
            .total_cmp(&b.effective)
            .then(a.index.cmp(&b.index))
    };
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, order);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(order);
    NeighborList(candidates)
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "k = {k} outside 1..={n} reference patterns"
        )));
    }
    Ok(())
}

/// Radius of each pattern: distance to the nearest pattern of another class.
///
/// A radius of zero means a pattern of another class sits on the same point.
pub fn compute_radii(reference: &Dataset) -> Result<Vec<f64>> {
    if reference.classes_present() < 2 {
        return Err(Error::validation(
            "radii need patterns of at least two classes",
        ));
    }
    let n = reference.len();
    let mut radii = vec![f64::INFINITY; n];
    for i in 0..n {
        let (xi, ci) = (reference.row(i), reference.label(i));
        for j in (i + 1)..n {
            if reference.label(j) != ci {
                let d = euclidean(xi, reference.row(j));
                radii[i] = radii[i].min(d);
                radii[j] = radii[j].min(d);
            }
        }
    }
    Ok(radii)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], labels: Vec<usize>) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::from_rows("line", &rows, labels, 2).unwrap()
    }

    #[test]
    fn radii_on_a_line() {
        let d = line(&[0.0, 3.0, 4.0], vec![0, 1, 0]);
        assert_eq!(compute_radii(&d).unwrap(), vec![3.0, 1.0, 1.0]);
    }

    #[test]
    fn cross_class_duplicate_has_zero_radius() {
        let d = line(&[1.0, 1.0, 5.0], vec![0, 1, 1]);
        assert_eq!(compute_radii(&d).unwrap(), vec![0.0, 0.0, 4.0]);
    }

    #[test]
    fn single_class_has_no_radii() {
        let d = line(&[1.0, 2.0], vec![1, 1]);
        assert!(compute_radii(&d).is_err());
    }

    #[test]
    fn k_smallest_breaks_ties_by_index() {
        let c = |index, effective| Neighbor {
            index,
            distance: effective,
            effective,
        };
        let list = k_smallest(
            vec![c(3, 1.0), c(0, 2.0), c(1, 1.0), c(2, f64::INFINITY)],
            3,
        );
        assert_eq!(list.indices(), vec![1, 3, 0]);
    }
}
