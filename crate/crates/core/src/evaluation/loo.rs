use crate::competence::leave_one_out_predictions;
use crate::datasets::Dataset;
use crate::error::Result;
use crate::scaling::MinMaxScaler;

/// Leave-one-out accuracy of plain k-NN: each pattern is classified by a
/// majority vote of its `k` nearest other patterns.
///
/// With `scale`, features are min-max scaled over the whole dataset first.
pub fn leave_one_out_knn(dataset: &Dataset, k: usize, scale: bool) -> Result<f64> {
    let scaled;
    let data = if scale {
        scaled = MinMaxScaler::fit(dataset).transform(dataset);
        &scaled
    } else {
        dataset
    };
    let preds = leave_one_out_predictions(data, k)?;
    let hits = preds
        .iter()
        .zip(data.labels())
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_corners_are_always_wrong() {
        let d = Dataset::from_rows(
            "xor",
            &[
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
            ],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap();
        assert_eq!(leave_one_out_knn(&d, 1, false).unwrap(), 0.0);
        assert_eq!(leave_one_out_knn(&d, 1, true).unwrap(), 0.0);
    }

    #[test]
    fn duplicated_points_find_their_twin() {
        let base =
            crate::datasets::generate_two_gaussians(15, [0.0, 0.0], [1.0, 0.0], 1.0, 3).unwrap();
        let idx: Vec<usize> = (0..base.len()).flat_map(|i| [i, i]).collect();
        let twice = base.subset(&idx).unwrap();
        assert_eq!(leave_one_out_knn(&twice, 1, true).unwrap(), 1.0);
    }

    #[test]
    fn k_must_be_below_size() {
        let d = Dataset::from_rows("s", &[vec![0.0], vec![1.0]], vec![0, 1], 2).unwrap();
        assert!(leave_one_out_knn(&d, 2, false).is_err());
    }
}
