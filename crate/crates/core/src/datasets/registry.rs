use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{constants, generate_banana, generate_lithuanian, load_csv, Dataset, LabelColumn};
use crate::error::{Error, Result};

/// Size of the synthetic problems and the seeds they are generated with.
const SYNTHETIC_SIZE: usize = 600;
const BANANA_SEED: u64 = 600_001;
const LITHUANIAN_SEED: u64 = 600_002;

/// Rows per class in the UCI Image Segmentation training file.
const SEGMENTATION_TRAIN_PER_CLASS: usize = 30;
const SEGMENTATION_PARTITION_SEED: u64 = 2310;

/// The nine benchmark databases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Pima,
    Liver,
    Wdbc,
    Optdigits,
    Blood,
    Segmentation,
    Banana,
    Vehicle,
    Lithuanian,
}

impl DatasetName {
    pub const ALL: [DatasetName; 9] = [
        DatasetName::Pima,
        DatasetName::Liver,
        DatasetName::Wdbc,
        DatasetName::Optdigits,
        DatasetName::Blood,
        DatasetName::Segmentation,
        DatasetName::Banana,
        DatasetName::Vehicle,
        DatasetName::Lithuanian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::Pima => "pima",
            DatasetName::Liver => "liver",
            DatasetName::Wdbc => "wdbc",
            DatasetName::Optdigits => "optdigits",
            DatasetName::Blood => "blood",
            DatasetName::Segmentation => "segmentation",
            DatasetName::Banana => "banana",
            DatasetName::Vehicle => "vehicle",
            DatasetName::Lithuanian => "lithuanian",
        }
    }

    /// Display name used in rendered tables.
    pub fn title(self) -> &'static str {
        match self {
            DatasetName::Pima => "Pima",
            DatasetName::Liver => "Liver Disorders",
            DatasetName::Wdbc => "WDBC",
            DatasetName::Optdigits => "Optical Digits",
            DatasetName::Blood => "Blood Transfusion",
            DatasetName::Segmentation => "Image Segmentation",
            DatasetName::Banana => "Banana",
            DatasetName::Vehicle => "Vehicle",
            DatasetName::Lithuanian => "Lithuanian Classes",
        }
    }

    /// `(dimensionality, classes)` of the database.
    pub fn shape(self) -> (usize, usize) {
        match self {
            DatasetName::Pima => (8, 2),
            DatasetName::Liver => (6, 2),
            DatasetName::Wdbc => (30, 2),
            DatasetName::Optdigits => (64, 10),
            DatasetName::Blood => (4, 2),
            DatasetName::Segmentation => (19, 7),
            DatasetName::Banana => (2, 2),
            DatasetName::Vehicle => (18, 4),
            DatasetName::Lithuanian => (2, 2),
        }
    }

    pub fn is_synthetic(self) -> bool {
        matches!(self, DatasetName::Banana | DatasetName::Lithuanian)
    }

    fn fetch_hint(self) -> &'static str {
        match self {
            DatasetName::Pima => "save the UCI Pima Indians Diabetes data as pima.csv",
            DatasetName::Liver => "save the UCI Liver Disorders (BUPA) data as liver.csv, label = selector column",
            DatasetName::Wdbc => "save the UCI Breast Cancer Wisconsin (Diagnostic) features with the diagnosis last as wdbc.csv",
            DatasetName::Optdigits => "save the UCI optdigits.tra/optdigits.tes files as optdigits_train.csv/optdigits_test.csv (or a single optdigits.csv)",
            DatasetName::Blood => "download transfusion.data from the UCI Blood Transfusion Service Center page and save it as blood.csv",
            DatasetName::Segmentation => "save the UCI segmentation.data/segmentation.test files as segmentation_train.csv/segmentation_test.csv with the class last (or a single segmentation.csv)",
            DatasetName::Vehicle => "concatenate the UCI Statlog Vehicle xa?.dat files into vehicle.csv",
            DatasetName::Banana | DatasetName::Lithuanian => "generated in-process",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let name = match lower.as_str() {
            "pima" => DatasetName::Pima,
            "liver" | "bupa" => DatasetName::Liver,
            "wdbc" | "breast" => DatasetName::Wdbc,
            "optdigits" => DatasetName::Optdigits,
            "blood" | "transfusion" => DatasetName::Blood,
            "segmentation" | "segment" => DatasetName::Segmentation,
            "banana" => DatasetName::Banana,
            "vehicle" => DatasetName::Vehicle,
            "lithuanian" => DatasetName::Lithuanian,
            _ => return Err(Error::UnknownDataset(s.to_string())),
        };
        Ok(name)
    }
}

/// Either one dataset to be split, or a fixed train/test pair.
#[derive(Debug, Clone)]
pub enum DataSource {
    Single(Dataset),
    Predefined { train: Dataset, test: Dataset },
}

impl DataSource {
    pub fn name(&self) -> &str {
        match self {
            DataSource::Single(d) => d.name(),
            DataSource::Predefined { train, .. } => train.name(),
        }
    }

    /// All rows, train file first for predefined sources.
    pub fn full(&self) -> Result<Dataset> {
        match self {
            DataSource::Single(d) => Ok(d.clone()),
            DataSource::Predefined { train, test } => concat(train, test),
        }
    }
}

fn concat(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    if a.class_names() != b.class_names() || a.n_features() != b.n_features() {
        return Err(Error::validation(format!(
            "`{}` and `{}` do not share features and classes",
            a.name(),
            b.name()
        )));
    }
    let mut features = a.features().to_vec();
    features.extend_from_slice(b.features());
    let mut labels = a.labels().to_vec();
    labels.extend_from_slice(b.labels());
    Dataset::new(
        a.name(),
        features,
        a.n_features(),
        labels,
        a.class_names().to_vec(),
    )
}

/// Resolves benchmark names to data, reading UCI files from `data_dir`.
#[derive(Debug, Clone)]
pub struct Registry {
    data_dir: PathBuf,
}

impl Registry {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Registry {
            data_dir: data_dir.into(),
        }
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    /// Accepts a registered name or a path to a CSV file.
    pub fn resolve(&self, name_or_path: &str) -> Result<DataSource> {
        match name_or_path.parse::<DatasetName>() {
            Ok(name) => self.load(name),
            Err(unknown) => {
                let path = Path::new(name_or_path);
                if path.is_file() {
                    Ok(DataSource::Single(load_csv(path, LabelColumn::Last)?))
                } else {
                    Err(unknown)
                }
            }
        }
    }

    pub fn load(&self, name: DatasetName) -> Result<DataSource> {
        let source = match name {
            DatasetName::Banana => DataSource::Single(generate_banana(
                SYNTHETIC_SIZE,
                constants::BANANA_NOISE,
                BANANA_SEED,
            )?),
            DatasetName::Lithuanian => {
                DataSource::Single(generate_lithuanian(SYNTHETIC_SIZE, LITHUANIAN_SEED)?)
            }
            DatasetName::Optdigits | DatasetName::Segmentation => match self.load_pair(name)? {
                Some((train, test)) => DataSource::Predefined { train, test },
                None if name == DatasetName::Segmentation => {
                    let full = self.load_file(name, name.as_str())?;
                    segmentation_partition(full)?
                }
                None => DataSource::Single(self.load_file(name, name.as_str())?),
            },
            _ => DataSource::Single(self.load_file(name, name.as_str())?),
        };
        check_shape(name, &source)?;
        Ok(source)
    }

    fn load_file(&self, name: DatasetName, stem: &str) -> Result<Dataset> {
        let path = self.data_dir.join(format!("{stem}.csv"));
        if !path.is_file() {
            return Err(Error::MissingData {
                path,
                hint: name.fetch_hint().to_string(),
            });
        }
        Ok(load_csv(&path, LabelColumn::Last)?.with_name(name.as_str()))
    }

    fn load_pair(&self, name: DatasetName) -> Result<Option<(Dataset, Dataset)>> {
        let train_path = self.data_dir.join(format!("{name}_train.csv"));
        let test_path = self.data_dir.join(format!("{name}_test.csv"));
        if !(train_path.is_file() && test_path.is_file()) {
            return Ok(None);
        }
        let train = self.load_file(name, &format!("{name}_train"))?;
        let test = self.load_file(name, &format!("{name}_test"))?;
        let (train, test) = align_classes(train, test)?;
        Ok(Some((train, test)))
    }
}

/// Renumbers `test` labels into `train`'s class-name numbering.
fn align_classes(train: Dataset, test: Dataset) -> Result<(Dataset, Dataset)> {
    let mut names = train.class_names().to_vec();
    let mut labels = Vec::with_capacity(test.len());
    for &l in test.labels() {
        let token = &test.class_names()[l];
        let id = match names.iter().position(|n| n == token) {
            Some(id) => id,
            None => {
                names.push(token.clone());
                names.len() - 1
            }
        };
        labels.push(id);
    }
    let train = Dataset::new(
        train.name(),
        train.features().to_vec(),
        train.n_features(),
        train.labels().to_vec(),
        names.clone(),
    )?;
    let test = Dataset::new(
        train.name(),
        test.features().to_vec(),
        test.n_features(),
        labels,
        names,
    )?;
    Ok((train, test))
}

/// Rebuilds the UCI train/test division (30 rows per class for training) from
/// the combined Image Segmentation file, with a fixed seed.
fn segmentation_partition(full: Dataset) -> Result<DataSource> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEGMENTATION_PARTITION_SEED);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..full.n_classes() {
        let mut rows: Vec<usize> = (0..full.len())
            .filter(|&i| full.label(i) == class)
            .collect();
        rows.shuffle(&mut rng);
        let cut = SEGMENTATION_TRAIN_PER_CLASS.min(rows.len());
        train.extend_from_slice(&rows[..cut]);
        test.extend_from_slice(&rows[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(DataSource::Predefined {
        train: full.subset(&train)?,
        test: full.subset(&test)?,
    })
}

fn check_shape(name: DatasetName, source: &DataSource) -> Result<()> {
    let (dims, classes) = name.shape();
    let d = match source {
        DataSource::Single(d) | DataSource::Predefined { train: d, .. } => d,
    };
    if d.n_features() != dims || d.n_classes() != classes {
        return Err(Error::validation(format!(
            "`{name}` should have {dims} features and {classes} classes, found {} and {}",
            d.n_features(),
            d.n_classes()
        )));
    }
    Ok(())
}
