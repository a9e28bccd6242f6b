//! Bagged pools of perceptrons and the fusion baselines computed from them:
//! majority vote, static ensemble, single best and the oracle.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::perceptron::{train_perceptron, Perceptron, PerceptronParams};

/// Redraws allowed when a bootstrap sample holds a single class.
pub const BOOTSTRAP_RETRIES: usize = 10;

// Decorrelates the perceptron's shuffling stream from the bootstrap stream.
const TRAIN_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<Perceptron>,
    bootstrap_seeds: Vec<u64>,
}

/// Draws `labels.len()` indices with replacement. A draw covering a single
/// class is repeated, up to [`BOOTSTRAP_RETRIES`] times.
pub fn bootstrap_indices(labels: &[usize], seed: u64) -> Result<Vec<usize>> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::validation("cannot bootstrap an empty training set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..=BOOTSTRAP_RETRIES {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let first = labels[idx[0]];
        if idx.iter().any(|&i| labels[i] != first) {
            return Ok(idx);
        }
    }
    Err(Error::validation(format!(
        "every bootstrap of {n} rows held a single class after {BOOTSTRAP_RETRIES} redraws"
    )))
}

/// Bagging: member `i` is trained on its own bootstrap of `train`.
pub fn bagging(
    train: &Dataset,
    size: usize,
    params: &PerceptronParams,
    seed: u64,
) -> Result<Ensemble> {
    if size == 0 {
        return Err(Error::validation("ensemble size must be at least 1"));
    }
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let bootstrap_seeds: Vec<u64> = (0..size).map(|_| master.next_u64()).collect();
    let members = bootstrap_seeds
        .par_iter()
        .map(|&s| {
            let idx = bootstrap_indices(train.labels(), s)?;
            let sample = train.subset(&idx)?;
            train_perceptron(&sample, params, s ^ TRAIN_SEED_SALT)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        members,
        bootstrap_seeds,
    })
}

/// Most voted class. Ties go to the class voted by the lowest-index
/// classifier among those voting for a tied class.
pub fn majority_vote(votes: &[usize], n_classes: usize) -> Result<usize> {
    if votes.is_empty() {
        return Err(Error::validation(
            "majority vote over an empty classifier subset",
        ));
    }
    let mut counts = vec![0usize; n_classes];
    for &v in votes {
        if v >= n_classes {
            return Err(Error::validation(format!(
                "vote {v} outside 0..{n_classes}"
            )));
        }
        counts[v] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&0);
    Ok(*votes
        .iter()
        .find(|&&v| counts[v] == top)
        .unwrap_or(&votes[0]))
}

/// Majority vote restricted to the members listed in `subset`.
pub fn subset_vote(votes: &[usize], subset: &[usize], n_classes: usize) -> Result<usize> {
    let picked: Vec<usize> = subset.iter().map(|&j| votes[j]).collect();
    majority_vote(&picked, n_classes)
}

impl Ensemble {
    pub fn from_members(members: Vec<Perceptron>, bootstrap_seeds: Vec<u64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("ensemble needs at least one member"));
        }
        if members.len() != bootstrap_seeds.len() {
            return Err(Error::validation("one bootstrap seed per member required"));
        }
        let d = members[0].n_features();
        if members.iter().any(|m| m.n_features() != d) {
            return Err(Error::validation("members disagree on dimensionality"));
        }
        Ok(Ensemble {
            members,
            bootstrap_seeds,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Perceptron] {
        &self.members
    }

    pub fn bootstrap_seeds(&self) -> &[u64] {
        &self.bootstrap_seeds
    }

    pub fn n_classes(&self) -> usize {
        self.members[0].n_classes()
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    /// Every member's prediction on `x`, in member order.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.n_features() {
            return Err(Error::validation(format!(
                "pattern has {} features, ensemble expects {}",
                x.len(),
                self.n_features()
            )));
        }
        let mut buf = vec![0.0; x.len()];
        Ok(self
            .members
            .iter()
            .map(|m| m.predict_with(x, &mut buf))
            .collect())
    }

    pub fn majority_vote(&self, x: &[f64]) -> Result<usize> {
        majority_vote(&self.votes(x)?, self.n_classes())
    }

    /// Predictions of every member on every row of `data`.
    pub fn predictions(&self, data: &Dataset) -> Result<PredictionMatrix> {
        let per_member = self
            .members
            .iter()
            .map(|m| m.predict_dataset(data))
            .collect::<Result<Vec<_>>>()?;
        let n = data.len();
        let mut by_pattern = vec![0; n * self.len()];
        for (j, preds) in per_member.iter().enumerate() {
            for (i, &p) in preds.iter().enumerate() {
                by_pattern[i * self.len() + j] = p;
            }
        }
        Ok(PredictionMatrix {
            n_members: self.len(),
            n_classes: self.n_classes(),
            votes: by_pattern,
        })
    }

    /// Text record: `ensemble <L>`, then per member a `seed <s>` line
    /// followed by that member's perceptron record.
    pub fn to_record(&self) -> String {
        let mut out = format!("ensemble {}\n", self.len());
        for (m, s) in self.members.iter().zip(&self.bootstrap_seeds) {
            out.push_str(&format!("seed {s}\n"));
            out.push_str(&m.to_record());
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut chunks = text.split("seed ");
        let head = chunks.next().unwrap_or_default().trim();
        let expected: usize = head
            .strip_prefix("ensemble ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::validation("expected `ensemble <L>` header"))?;
        let mut members = Vec::new();
        let mut seeds = Vec::new();
        for chunk in chunks {
            let (seed, body) = chunk
                .split_once('\n')
                .ok_or_else(|| Error::validation("truncated ensemble record"))?;
            seeds.push(
                seed.trim()
                    .parse()
                    .map_err(|_| Error::validation(format!("bad seed `{seed}`")))?,
            );
            members.push(Perceptron::from_record(body)?);
        }
        if members.len() != expected {
            return Err(Error::validation(format!(
                "ensemble record declares {expected} members, holds {}",
                members.len()
            )));
        }
        Ensemble::from_members(members, seeds)
    }
}

/// Member votes for a set of patterns, stored pattern-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    n_members: usize,
    n_classes: usize,
    votes: Vec<usize>,
}

impl PredictionMatrix {
    pub fn n_members(&self) -> usize {
        self.n_members
    }

    pub fn n_patterns(&self) -> usize {
        self.votes.len() / self.n_members
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Votes of all members on pattern `i`.
    pub fn votes(&self, i: usize) -> &[usize] {
        &self.votes[i * self.n_members..(i + 1) * self.n_members]
    }

    pub fn oracle_correct(&self, i: usize, label: usize) -> bool {
        self.votes(i).contains(&label)
    }

    pub fn static_vote(&self, i: usize) -> usize {
        // Votes are in 0..n_classes by construction.
        majority_vote(self.votes(i), self.n_classes).unwrap_or(0)
    }

    /// Per-member accuracy against `labels`.
    pub fn member_accuracies(&self, labels: &[usize]) -> Vec<f64> {
        let mut correct = vec![0usize; self.n_members];
        for (i, &l) in labels.iter().enumerate() {
            for (j, &v) in self.votes(i).iter().enumerate() {
                correct[j] += usize::from(v == l);
            }
        }
        correct
            .into_iter()
            .map(|c| c as f64 / labels.len() as f64)
            .collect()
    }
}

fn require_rows(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        Err(Error::validation("evaluation set is empty"))
    } else {
        Ok(())
    }
}

fn fraction(hits: usize, n: usize) -> f64 {
    hits as f64 / n as f64
}

/// Share of patterns that at least one member classifies correctly.
pub fn oracle_accuracy(ensemble: &Ensemble, test: &Dataset) -> Result<f64> {
    require_rows(test)?;
    let preds = ensemble.predictions(test)?;
    let hits = (0..test.len())
        .filter(|&i| preds.oracle_correct(i, test.label(i)))
        .count();
    Ok(fraction(hits, test.len()))
}

/// Member with the highest accuracy on `validation`; ties go to the lowest index.
pub fn single_best(ensemble: &Ensemble, validation: &Dataset) -> Result<usize> {
    require_rows(validation)?;
    let acc = ensemble
        .predictions(validation)?
        .member_accuracies(validation.labels());
    Ok(argmax_first(&acc))
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Accuracy of the majority vote over all members.
pub fn static_ensemble_accuracy(ensemble: &Ensemble, test: &Dataset) -> Result<f64> {
    require_rows(test)?;
    let preds = ensemble.predictions(test)?;
    let hits = (0..test.len())
        .filter(|&i| preds.static_vote(i) == test.label(i))
        .count();
    Ok(fraction(hits, test.len()))
}
