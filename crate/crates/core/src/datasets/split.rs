use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// How a dataset is divided into training, validation and test parts.
///
/// `train_fraction` of the rows (rounded up) form the training portion;
/// `validation_fraction_of_train` of that portion (rounded down) is held out
/// as the validation set, the remainder trains the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub validation_fraction_of_train: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.5,
            validation_fraction_of_train: 0.25,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        SplitSpec { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("train_fraction", self.train_fraction),
            (
                "validation_fraction_of_train",
                self.validation_fraction_of_train,
            ),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(format!(
                    "{name} must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Row indices of each part, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

// Guards ceil/floor against representation error such as 0.7 * 10 = 7.000000000000001.
const ROUNDING_SLACK: f64 = 1e-9;

fn ceil_share(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) - ROUNDING_SLACK).ceil().max(0.0) as usize
}

fn floor_share(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + ROUNDING_SLACK).floor() as usize
}

/// Distributes `total` items over groups proportionally to `counts` by the
/// largest-remainder rule; remainder ties go to the lower group index.
pub fn apportion(total: usize, counts: &[usize]) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return vec![0; counts.len()];
    }
    let mut quota: Vec<usize> = counts.iter().map(|&c| total * c / n).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(total * counts[c] % n), c));
    let assigned: usize = quota.iter().sum();
    for &c in order.iter().take(total - assigned) {
        quota[c] += 1;
    }
    quota
}

/// Splits `pool` (grouped by class) in two: the first part receives `first_total`
/// rows apportioned across classes. Groups must already be shuffled.
fn take_per_class(groups: &[Vec<usize>], first_total: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quota = apportion(first_total, &counts);
    groups
        .iter()
        .zip(quota)
        .map(|(g, q)| (g[..q].to_vec(), g[q..].to_vec()))
        .unzip()
}

fn require_each_class(
    dataset: &Dataset,
    present: &[bool],
    part: &[Vec<usize>],
    part_name: &str,
) -> Result<()> {
    for (c, members) in part.iter().enumerate() {
        if present[c] && members.is_empty() {
            return Err(Error::validation(format!(
                "class `{}` of `{}` is too small to stratify: no samples left for the {part_name} part",
                dataset.class_names()[c],
                dataset.name()
            )));
        }
    }
    Ok(())
}

fn flatten_sorted(groups: Vec<Vec<usize>>) -> Vec<usize> {
    let mut v: Vec<usize> = groups.into_iter().flatten().collect();
    v.sort_unstable();
    v
}

fn group_by_class(dataset: &Dataset, rows: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); dataset.n_classes()];
    for &i in rows {
        groups[dataset.label(i)].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

fn check_non_empty(name: &str, part: &[usize]) -> Result<()> {
    if part.is_empty() {
        Err(Error::validation(format!(
            "split leaves the {name} part empty"
        )))
    } else {
        Ok(())
    }
}

/// Divides `rows` of `dataset` into (train, validation), holding out
/// `validation_fraction` of them, rounded down.
fn split_train_validation(
    dataset: &Dataset,
    rows: &[usize],
    validation_fraction: f64,
    stratified: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_val = floor_share(validation_fraction, rows.len());
    let (train, validation) = if stratified {
        let groups = group_by_class(dataset, rows, rng);
        let present: Vec<bool> = groups.iter().map(|g| !g.is_empty()).collect();
        let (val, train) = take_per_class(&groups, n_val);
        require_each_class(dataset, &present, &val, "validation")?;
        require_each_class(dataset, &present, &train, "training")?;
        (flatten_sorted(train), flatten_sorted(val))
    } else {
        let mut shuffled = rows.to_vec();
        shuffled.shuffle(rng);
        let (val, train) = shuffled.split_at(n_val);
        (
            flatten_sorted(vec![train.to_vec()]),
            flatten_sorted(vec![val.to_vec()]),
        )
    };
    check_non_empty("training", &train)?;
    check_non_empty("validation", &validation)?;
    Ok((train, validation))
}

pub fn split_indices(dataset: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let all: Vec<usize> = (0..dataset.len()).collect();
    let n_train_portion = ceil_share(spec.train_fraction, dataset.len());

    let (portion, test) = if spec.stratified {
        let groups = group_by_class(dataset, &all, &mut rng);
        let present: Vec<bool> = groups.iter().map(|g| !g.is_empty()).collect();
        let (portion, test) = take_per_class(&groups, n_train_portion);
        require_each_class(dataset, &present, &test, "test")?;
        (flatten_sorted(portion), flatten_sorted(test))
    } else {
        let mut shuffled = all;
        shuffled.shuffle(&mut rng);
        let (portion, test) = shuffled.split_at(n_train_portion.min(dataset.len()));
        (
            flatten_sorted(vec![portion.to_vec()]),
            flatten_sorted(vec![test.to_vec()]),
        )
    };
    check_non_empty("test", &test)?;
    let (train, validation) = split_train_validation(
        dataset,
        &portion,
        spec.validation_fraction_of_train,
        spec.stratified,
        &mut rng,
    )?;
    Ok(SplitIndices {
        train,
        validation,
        test,
    })
}

/// Splits one dataset into training, validation and test parts.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Split> {
    let idx = split_indices(dataset, spec)?;
    Ok(Split {
        train: dataset.subset(&idx.train)?,
        validation: dataset.subset(&idx.validation)?,
        test: dataset.subset(&idx.test)?,
    })
}

/// For databases shipped with a fixed train/test division: only the
/// validation hold-out is drawn, from the training file.
pub fn split_predefined(
    train_file: &Dataset,
    test_file: &Dataset,
    spec: &SplitSpec,
) -> Result<Split> {
    spec.validate()?;
    if train_file.n_features() != test_file.n_features() {
        return Err(Error::validation(format!(
            "train file has {} features but test file has {}",
            train_file.n_features(),
            test_file.n_features()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows: Vec<usize> = (0..train_file.len()).collect();
    let (train, validation) = split_train_validation(
        train_file,
        &rows,
        spec.validation_fraction_of_train,
        spec.stratified,
        &mut rng,
    )?;
    Ok(Split {
        train: train_file.subset(&train)?,
        validation: train_file.subset(&validation)?,
        test: test_file.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(labels: Vec<usize>, n_classes: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..labels.len()).map(|i| vec![i as f64]).collect();
        Dataset::from_rows("d", &rows, labels, n_classes).unwrap()
    }

    fn spec(seed: u64, stratified: bool) -> SplitSpec {
        SplitSpec {
            seed,
            stratified,
            ..SplitSpec::default()
        }
    }

    #[test]
    fn sizes_follow_rounding_rule() {
        let d = dataset((0..100).map(|i| i % 2).collect(), 2);
        for stratified in [false, true] {
            let s = split_indices(&d, &spec(1, stratified)).unwrap();
            assert_eq!(
                (s.train.len(), s.validation.len(), s.test.len()),
                (38, 12, 50)
            );
        }
    }

    #[test]
    fn odd_sizes_round_toward_train() {
        let d = dataset((0..101).map(|i| i % 2).collect(), 2);
        let s = split_indices(&d, &spec(1, false)).unwrap();
        assert_eq!(s.train.len() + s.validation.len(), 51);
        assert_eq!(s.validation.len(), 12);
    }

    #[test]
    fn apportion_largest_remainder() {
        assert_eq!(apportion(5, &[1, 1]), vec![3, 2]);
        assert_eq!(apportion(10, &[50, 30, 20]), vec![5, 3, 2]);
        assert_eq!(apportion(7, &[3, 3, 4]), vec![2, 2, 3]);
        assert_eq!(apportion(0, &[3, 3]), vec![0, 0]);
    }

    #[test]
    fn stratified_preserves_class_proportions() {
        let labels: Vec<usize> = (0..300).map(|i| if i % 3 == 0 { 1 } else { 0 }).collect();
        let d = dataset(labels, 2);
        let s = split_indices(&d, &spec(7, true)).unwrap();
        let count = |part: &[usize], c: usize| part.iter().filter(|&&i| d.label(i) == c).count();
        // 100 of class 1: 50 to the training portion, 12 or 13 of those to validation.
        assert_eq!(count(&s.test, 1), 50);
        assert!((12..=13).contains(&count(&s.validation, 1)));
    }

    #[test]
    fn tiny_class_is_reported_by_name() {
        let d = dataset(vec![0, 0, 0, 0, 0, 0, 0, 0, 1], 2);
        let err = split_indices(&d, &spec(0, true)).unwrap_err();
        assert!(err.to_string().contains("class `1`"), "{err}");
    }

    #[test]
    fn fractions_are_validated() {
        let d = dataset((0..10).map(|i| i % 2).collect(), 2);
        let bad = SplitSpec {
            train_fraction: 1.0,
            ..SplitSpec::default()
        };
        assert!(split_indices(&d, &bad).is_err());
    }

    #[test]
    fn predefined_keeps_test_file() {
        let train = dataset((0..40).map(|i| i % 2).collect(), 2);
        let test = dataset((0..10).map(|i| i % 2).collect(), 2);
        let s = split_predefined(&train, &test, &spec(3, true)).unwrap();
        assert_eq!(s.test, test);
        assert_eq!((s.train.len(), s.validation.len()), (30, 10));
    }
}
