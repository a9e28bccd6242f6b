//! KNORA-Eliminate dynamic ensemble selection and the three classification
//! pipelines built on it: KNORA-E over plain k-NN, KNORA-E over adaptive
//! k-NN, and DES-FA (ENN-edited reference + adaptive k-NN).

use serde::{Deserialize, Serialize};

use crate::competence::{
    enn_filter, mask_members, CompetenceIndex, CorrectnessMatrix, EditedSet, NeighborList,
    NeighborRule,
};
use crate::datasets::Dataset;
use crate::ensemble::{majority_vote, subset_vote, Ensemble};
use crate::error::{Error, Result};

/// Neighborhood size used by every pipeline unless configured otherwise.
pub const DEFAULT_K: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Members correct on all of the first `final_k` neighbors, ascending.
    pub selected: Vec<usize>,
    pub final_k: usize,
    /// Number of times the neighborhood was shrunk.
    pub reductions: usize,
    /// No member was correct even on the nearest neighbor.
    pub fallback_used: bool,
}

/// KNORA-Eliminate. Keeps the members correct on every one of the first
/// `k'` neighbors, starting at `k' = initial_k` and dropping the farthest
/// neighbor while nobody survives.
///
/// Shrinking the neighborhood can only grow the surviving set, so the
/// result equals the largest `k'` whose prefix intersection is non-empty;
/// one pass over the prefix masks finds it.
pub fn knora_eliminate(
    correctness: &CorrectnessMatrix,
    neighbors: &NeighborList,
    initial_k: usize,
) -> Result<SelectionOutcome> {
    if initial_k == 0 {
        return Err(Error::validation(
            "KNORA-E needs an initial k of at least 1",
        ));
    }
    if initial_k > neighbors.len() {
        return Err(Error::validation(format!(
            "initial k = {initial_k} exceeds the {} neighbors supplied",
            neighbors.len()
        )));
    }
    let mut survivors = correctness.full_mask();
    let mut best: Option<(usize, Vec<u64>)> = None;
    for (depth, n) in neighbors.iter().take(initial_k).enumerate() {
        if n.index >= correctness.n_patterns() {
            return Err(Error::validation(format!(
                "neighbor {} outside the correctness matrix",
                n.index
            )));
        }
        for (s, &m) in survivors.iter_mut().zip(correctness.pattern_mask(n.index)) {
            *s &= m;
        }
        if survivors.iter().all(|&w| w == 0) {
            break;
        }
        best = Some((depth + 1, survivors.clone()));
    }
    Ok(match best {
        Some((final_k, mask)) => SelectionOutcome {
            selected: mask_members(&mask),
            final_k,
            reductions: initial_k - final_k,
            fallback_used: false,
        },
        None => SelectionOutcome {
            selected: Vec::new(),
            final_k: 0,
            reductions: initial_k - 1,
            fallback_used: true,
        },
    })
}

/// Result of classifying one query dynamically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: usize,
    pub neighbors: NeighborList,
    pub outcome: SelectionOutcome,
}

/// Classifies a query whose member votes are already known. When selection
/// is exhausted the whole pool votes.
pub fn classify_votes(
    index: &CompetenceIndex,
    rule: NeighborRule,
    query: &[f64],
    votes: &[usize],
    n_classes: usize,
    k: usize,
) -> Result<Decision> {
    let correctness = index
        .correctness()
        .ok_or_else(|| Error::validation("competence index has no correctness matrix"))?;
    if votes.len() != correctness.n_members() {
        return Err(Error::validation(format!(
            "{} votes for {} members",
            votes.len(),
            correctness.n_members()
        )));
    }
    let k = k.min(index.len());
    let neighbors = index.neighbors(rule, query, k)?;
    let outcome = knora_eliminate(correctness, &neighbors, k)?;
    let label = if outcome.fallback_used {
        majority_vote(votes, n_classes)?
    } else {
        subset_vote(votes, &outcome.selected, n_classes)?
    };
    Ok(Decision {
        label,
        neighbors,
        outcome,
    })
}

pub fn classify(
    ensemble: &Ensemble,
    index: &CompetenceIndex,
    rule: NeighborRule,
    query: &[f64],
    k: usize,
) -> Result<Decision> {
    let votes = ensemble.votes(query)?;
    classify_votes(index, rule, query, &votes, ensemble.n_classes(), k)
}

/// KNORA-E with plain k-NN; `index` should be built over the unfiltered validation set.
pub fn classify_knora_e(
    ensemble: &Ensemble,
    index: &CompetenceIndex,
    query: &[f64],
    k: usize,
) -> Result<usize> {
    Ok(classify(ensemble, index, NeighborRule::Plain, query, k)?.label)
}

/// KNORA-E with adaptive k-NN over the unfiltered validation set.
pub fn classify_aknn_knora(
    ensemble: &Ensemble,
    index: &CompetenceIndex,
    query: &[f64],
    k: usize,
) -> Result<usize> {
    Ok(classify(ensemble, index, NeighborRule::Adaptive, query, k)?.label)
}

/// DES-FA: adaptive k-NN over the ENN-edited reference, then KNORA-E.
pub fn classify_des_fa(
    ensemble: &Ensemble,
    region: &DesFaRegion,
    query: &[f64],
    k: usize,
) -> Result<usize> {
    Ok(classify(ensemble, &region.index, NeighborRule::Adaptive, query, k)?.label)
}

/// Competence index over an unedited validation set.
pub fn build_region(ensemble: &Ensemble, validation: &Dataset) -> Result<CompetenceIndex> {
    CompetenceIndex::build(validation.clone(), ensemble)
}

/// The DES-FA region of competence: the validation set edited by ENN.
#[derive(Debug, Clone)]
pub struct DesFaRegion {
    pub index: CompetenceIndex,
    pub edited: EditedSet,
    /// ENN removed every pattern and the unedited set is used instead.
    pub enn_fallback: bool,
}

impl DesFaRegion {
    /// At least one class lost all of its patterns to the filter.
    pub fn class_vanished(&self) -> bool {
        !self.edited.vanished_classes.is_empty()
    }
}

pub fn build_des_fa_region(
    ensemble: &Ensemble,
    validation: &Dataset,
    k_enn: usize,
) -> Result<DesFaRegion> {
    let edited = enn_filter(validation, k_enn)?;
    let (reference, enn_fallback) = if edited.is_empty() {
        (validation.clone(), true)
    } else {
        (edited.apply(validation)?, false)
    };
    Ok(DesFaRegion {
        index: CompetenceIndex::build(reference, ensemble)?,
        edited,
        enn_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[bool]]) -> CorrectnessMatrix {
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.to_vec()).collect();
        CorrectnessMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn lone_competent_member_is_selected() {
        let t = [true; 7];
        let mut f = [true; 7];
        f[3] = false;
        let m = matrix(&[&f, &t, &f]);
        let out =
            knora_eliminate(&m, &NeighborList::from_indices(&[0, 1, 2, 3, 4, 5, 6]), 7).unwrap();
        assert_eq!(out.selected, vec![1]);
        assert_eq!(
            (out.final_k, out.reductions, out.fallback_used),
            (7, 0, false)
        );
    }

    #[test]
    fn reduction_drops_the_farthest_neighbor() {
        let m = matrix(&[&[true, true, false], &[false, true, true]]);
        let out = knora_eliminate(&m, &NeighborList::from_indices(&[0, 1, 2]), 3).unwrap();
        assert_eq!(out.selected, vec![0]);
        assert_eq!((out.final_k, out.reductions), (2, 1));
    }

    #[test]
    fn exhaustion_sets_fallback() {
        let m = matrix(&[&[false, true], &[false, true]]);
        let out = knora_eliminate(&m, &NeighborList::from_indices(&[0, 1]), 2).unwrap();
        assert!(out.fallback_used);
        assert!(out.selected.is_empty());
        assert_eq!((out.final_k, out.reductions), (0, 1));
    }

    #[test]
    fn initial_k_is_validated() {
        let m = matrix(&[&[true]]);
        let list = NeighborList::from_indices(&[0]);
        assert!(knora_eliminate(&m, &list, 0).is_err());
        assert!(knora_eliminate(&m, &list, 2).is_err());
    }
}
