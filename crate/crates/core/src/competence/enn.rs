use std::io::Write;

use super::neighbors::{check_k, euclidean, k_smallest, Neighbor, NeighborList};
use crate::datasets::Dataset;
use crate::error::{Error, Result};

/// Majority class among neighbor labels given nearest first. Ties go to the
/// class of the nearest neighbor among the tied classes.
pub fn knn_vote(labels_nearest_first: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &l in labels_nearest_first {
        counts[l] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0);
    labels_nearest_first
        .iter()
        .copied()
        .find(|&l| counts[l] == top)
        .unwrap_or(0)
}

/// The `k` nearest patterns of `data` to row `i`, excluding row `i` itself.
pub fn neighbors_excluding_self(data: &Dataset, i: usize, k: usize) -> NeighborList {
    let xi = data.row(i);
    let candidates = (0..data.len())
        .filter(|&j| j != i)
        .map(|j| {
            let d = euclidean(xi, data.row(j));
            Neighbor {
                index: j,
                distance: d,
                effective: d,
            }
        })
        .collect();
    k_smallest(candidates, k)
}

/// k-NN prediction for every row of `data` using all other rows as reference.
pub fn leave_one_out_predictions(data: &Dataset, k: usize) -> Result<Vec<usize>> {
    if k >= data.len() {
        return Err(Error::validation(format!(
            "k = {k} must be smaller than the {} patterns",
            data.len()
        )));
    }
    check_k(k, data.len() - 1)?;
    Ok((0..data.len())
        .map(|i| {
            let labels: Vec<usize> = neighbors_excluding_self(data, i, k)
                .iter()
                .map(|n| data.label(n.index))
                .collect();
            knn_vote(&labels, data.n_classes())
        })
        .collect())
}

/// Outcome of Edited Nearest Neighbor filtering, as row indices into the
/// filtered set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditedSet {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    /// Classes present before filtering that have no kept pattern.
    pub vanished_classes: Vec<usize>,
}

impl EditedSet {
    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// The kept patterns of `original`, in their original order.
    pub fn apply(&self, original: &Dataset) -> Result<Dataset> {
        original.subset(&self.kept)
    }
}

/// Edited Nearest Neighbor: keeps exactly the patterns whose label matches
/// the k-NN vote of the other patterns. Every decision is taken against the
/// unfiltered set.
pub fn enn_filter(data: &Dataset, k_enn: usize) -> Result<EditedSet> {
    if k_enn == 0 {
        return Err(Error::validation("ENN needs k >= 1"));
    }
    let predictions = leave_one_out_predictions(data, k_enn)?;
    let (kept, removed): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| predictions[i] == data.label(i));
    let mut before = vec![false; data.n_classes()];
    let mut after = vec![false; data.n_classes()];
    for i in 0..data.len() {
        before[data.label(i)] = true;
    }
    for &i in &kept {
        after[data.label(i)] = true;
    }
    let vanished_classes = (0..data.n_classes())
        .filter(|&c| before[c] && !after[c])
        .collect();
    Ok(EditedSet {
        kept,
        removed,
        vanished_classes,
    })
}

/// Writes one line per pattern of `original`: features, label, radius in
/// the filtered reference (empty when removed) and a kept flag.
pub fn write_region_csv(
    original: &Dataset,
    edited: &EditedSet,
    radii_of_kept: Option<&[f64]>,
    mut out: impl Write,
) -> Result<()> {
    let io = |e| Error::io("<region dump>", e);
    let header: Vec<String> = (0..original.n_features())
        .map(|j| format!("f{j}"))
        .chain(["label", "radius", "kept"].map(String::from))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let mut kept_pos = edited.kept.iter().enumerate().peekable();
    for i in 0..original.len() {
        let radius = match kept_pos.peek() {
            Some(&(pos, &k)) if k == i => {
                kept_pos.next();
                radii_of_kept
                    .map(|r| r[pos].to_string())
                    .unwrap_or_default()
            }
            _ => String::new(),
        };
        let kept = edited.kept.binary_search(&i).is_ok();
        let cells: Vec<String> = original.row(i).iter().map(f64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{}",
            cells.join(","),
            original.class_names()[original.label(i)],
            radius,
            u8::from(kept)
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], labels: Vec<usize>) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::from_rows("line", &rows, labels, 2).unwrap()
    }

    #[test]
    fn hand_traced_one_nn_edit() {
        // A at 0.0 and 0.2, B at 0.21, 5.0 and 6.0.
        let d = line(&[0.0, 0.2, 0.21, 5.0, 6.0], vec![0, 0, 1, 1, 1]);
        let e = enn_filter(&d, 1).unwrap();
        assert_eq!(e.kept, vec![0, 3, 4]);
        assert_eq!(e.removed, vec![1, 2]);
        assert!(e.vanished_classes.is_empty());
    }

    #[test]
    fn single_class_keeps_everything() {
        let d = line(&[0.0, 1.0, 2.0, 3.0], vec![1, 1, 1, 1]);
        let e = enn_filter(&d, 3).unwrap();
        assert_eq!(e.kept, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_must_be_below_set_size() {
        let d = line(&[0.0, 1.0, 2.0], vec![0, 1, 0]);
        assert!(enn_filter(&d, 3).is_err());
        assert!(enn_filter(&d, 0).is_err());
        assert!(enn_filter(&d, 2).is_ok());
    }

    #[test]
    fn vanished_class_is_flagged() {
        let d = line(&[0.0, 1.0, 2.0, 1.1], vec![0, 0, 0, 1]);
        let e = enn_filter(&d, 1).unwrap();
        assert_eq!(e.vanished_classes, vec![1]);
    }

    #[test]
    fn vote_ties_follow_the_nearest_neighbor() {
        assert_eq!(knn_vote(&[1, 0], 2), 1);
        assert_eq!(knn_vote(&[2, 0, 0, 2, 1], 3), 2);
        assert_eq!(knn_vote(&[0, 1, 1], 2), 1);
    }

    #[test]
    fn region_dump_marks_removed_rows() {
        let d = line(&[0.0, 0.2, 0.21, 5.0, 6.0], vec![0, 0, 1, 1, 1]);
        let e = enn_filter(&d, 1).unwrap();
        let mut buf = Vec::new();
        write_region_csv(&d, &e, Some(&[5.0, 5.0, 6.0]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "f0,label,radius,kept");
        assert_eq!(lines[1], "0,0,5,1");
        assert_eq!(lines[2], "0.2,0,,0");
        assert_eq!(lines[5], "6,1,6,1");
    }
}
