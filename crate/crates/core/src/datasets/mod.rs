//! Labelled numeric datasets: the in-memory representation, CSV ingestion,
//! synthetic generators, train/validation/test splitting and the registry of
//! named benchmark databases.

mod csv;
mod registry;
mod split;
mod synthetic;

pub use self::csv::{load_csv, parse_csv, save_csv, write_csv, LabelColumn};
pub use self::registry::{DataSource, DatasetName, Registry};
pub use self::split::{
    apportion, split, split_indices, split_predefined, Split, SplitIndices, SplitSpec,
};
pub use self::synthetic::{
    constants, generate_banana, generate_lithuanian, generate_two_gaussians,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense `N x D` feature matrix with one class label per row.
///
/// Labels are dense integers in `0..n_classes()`. The class count is a
/// property of the problem, not of the rows currently held, so subsets keep
/// the class names of their parent even when a class has no rows left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::validation("dataset needs at least one feature"));
        }
        if labels.is_empty() {
            return Err(Error::validation("dataset needs at least one row"));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::validation(format!(
                "feature buffer holds {} values, expected {} rows x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::validation(format!(
                "dataset needs at least two classes, found {}",
                class_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::validation(format!(
                "label {bad} outside 0..{}",
                class_names.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite feature value at row {}, column {}",
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Dataset {
            name: name.into(),
            n_features,
            features,
            labels,
            class_names,
        })
    }

    /// Builds a dataset from rows, naming classes `"0"`, `"1"`, ...
    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::validation("rows have differing lengths"));
        }
        if rows.len() != labels.len() {
            return Err(Error::validation("row and label counts differ"));
        }
        let features = rows.iter().flatten().copied().collect();
        let class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Dataset::new(name, features, n_features, labels, class_names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Row-major feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Number of rows per class, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of classes with at least one row.
    pub fn classes_present(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Rows at `indices`, in that order. Rows and labels move together.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::validation(format!(
                "empty subset of dataset `{}`",
                self.name
            )));
        }
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::validation(format!(
                    "row index {i} out of range for {} rows",
                    self.len()
                )));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Ok(Dataset {
            name: self.name.clone(),
            n_features: self.n_features,
            features,
            labels,
            class_names: self.class_names.clone(),
        })
    }

    /// Applies `f` to every row, producing a dataset with the same labels.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Dataset {
        let mut features = vec![0.0; self.features.len()];
        for (src, dst) in self
            .features
            .chunks_exact(self.n_features)
            .zip(features.chunks_exact_mut(self.n_features))
        {
            f(src, dst);
        }
        Dataset {
            features,
            ..self.clone()
        }
    }

    /// Compares rows by feature values and class *names*, ignoring how the
    /// names happen to be numbered.
    pub fn same_content(&self, other: &Dataset) -> bool {
        self.len() == other.len()
            && self.n_features == other.n_features
            && self.features == other.features
            && self
                .labels
                .iter()
                .zip(&other.labels)
                .all(|(&a, &b)| self.class_names[a] == other.class_names[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::from_rows(
            "toy",
            &[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]],
            vec![0, 1, 0],
            2,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_labels_and_values() {
        assert!(Dataset::from_rows("x", &[vec![1.0]], vec![2], 2).is_err());
        assert!(Dataset::from_rows("x", &[vec![f64::NAN]], vec![0], 2).is_err());
        assert!(Dataset::from_rows("x", &[vec![1.0]], vec![0], 1).is_err());
        assert!(Dataset::from_rows("x", &[], vec![], 2).is_err());
    }

    #[test]
    fn subset_keeps_rows_and_labels_together() {
        let d = toy();
        let s = d.subset(&[2, 1]).unwrap();
        assert_eq!(s.row(0), &[4.0, 5.0]);
        assert_eq!(s.labels(), &[0, 1]);
        assert_eq!(s.n_classes(), 2);
        assert!(d.subset(&[]).is_err());
        assert!(d.subset(&[3]).is_err());
    }

    #[test]
    fn class_counts() {
        assert_eq!(toy().class_counts(), vec![2, 1]);
        assert_eq!(toy().subset(&[0, 2]).unwrap().classes_present(), 1);
    }
}
