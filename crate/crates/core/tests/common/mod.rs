//! Brute-force reference implementations and random instance builders shared
//! by the integration tests. Everything here is deliberately naive: full
//! sorts and double loops, no shared code with the library's search paths.

#![allow(dead_code)]

use std::cmp::Ordering;

use desfa::Dataset;
use rand::Rng;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn by_value_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .expect("no NaN keys")
        .then(a.1.cmp(&b.1))
}

/// All indices ordered by `(key, index)`.
pub fn full_order(keys: &[f64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize)> = keys.iter().copied().zip(0..).collect();
    pairs.sort_by(by_value_then_index);
    pairs.into_iter().map(|(_, i)| i).collect()
}

/// Plurality class; a tie goes to whichever tied class appears first in
/// `nearest_first`.
pub fn vote(nearest_first: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0; n_classes];
    for &l in nearest_first {
        counts[l] += 1;
    }
    let best = *counts.iter().max().unwrap();
    for &l in nearest_first {
        if counts[l] == best {
            return l;
        }
    }
    unreachable!()
}

/// ENN keep flags: pattern `i` stays iff its label equals the vote of its
/// `k` nearest other patterns.
pub fn enn_keep(rows: &[Vec<f64>], labels: &[usize], n_classes: usize, k: usize) -> Vec<bool> {
    (0..rows.len())
        .map(|i| {
            let keys: Vec<f64> = (0..rows.len())
                .map(|j| {
                    if j == i {
                        f64::INFINITY
                    } else {
                        dist(&rows[i], &rows[j])
                    }
                })
                .collect();
            let order: Vec<usize> = full_order(&keys).into_iter().filter(|&j| j != i).collect();
            let nearest: Vec<usize> = order[..k].iter().map(|&j| labels[j]).collect();
            vote(&nearest, n_classes) == labels[i]
        })
        .collect()
}

/// Distance from each pattern to the closest pattern of another class.
pub fn radii(rows: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; rows.len()];
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            if labels[i] != labels[j] {
                out[i] = out[i].min(dist(&rows[i], &rows[j]));
            }
        }
    }
    out
}

/// Reference indices ordered by raw distance to `query`.
pub fn plain_order(rows: &[Vec<f64>], query: &[f64]) -> Vec<usize> {
    let keys: Vec<f64> = rows.iter().map(|r| dist(r, query)).collect();
    full_order(&keys)
}

/// Reference indices ordered by `d / R`, a zero radius ranking last.
pub fn adaptive_order(rows: &[Vec<f64>], radii: &[f64], query: &[f64]) -> Vec<usize> {
    let keys: Vec<f64> = rows
        .iter()
        .zip(radii)
        .map(|(r, &rad)| {
            if rad == 0.0 {
                f64::INFINITY
            } else {
                dist(r, query) / rad
            }
        })
        .collect();
    full_order(&keys)
}

/// KNORA-E by trying every neighborhood size from `k` down to 1.
/// `correct[m][p]` says whether member `m` is right on pattern `p`.
/// Returns `(selected, final_k)`, with `final_k = 0` when nobody survives.
pub fn knora_exhaustive(
    correct: &[Vec<bool>],
    neighbors: &[usize],
    k: usize,
) -> (Vec<usize>, usize) {
    for kk in (1..=k).rev() {
        let selected: Vec<usize> = (0..correct.len())
            .filter(|&m| neighbors[..kk].iter().all(|&p| correct[m][p]))
            .collect();
        if !selected.is_empty() {
            return (selected, kk);
        }
    }
    (Vec::new(), 0)
}

/// Random labelled points on a coarse grid, so exact distance ties occur.
pub fn random_instance(
    rng: &mut impl Rng,
    n: usize,
    d: usize,
    c: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let coarse = rng.random_bool(0.5);
    let rows = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if coarse {
                        f64::from(rng.random_range(0..6u8))
                    } else {
                        rng.random_range(-10.0..10.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    labels[0] = 0;
    labels[1] = 1;
    (rows, labels)
}

pub fn dataset(rows: &[Vec<f64>], labels: &[usize], c: usize) -> Dataset {
    Dataset::from_rows("random", rows, labels.to_vec(), c).unwrap()
}
