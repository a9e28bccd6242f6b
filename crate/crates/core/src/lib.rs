//! Dynamic ensemble selection over bagged perceptrons.
//!
//! A pool of perceptrons is trained by bagging. For each query, KNORA-Eliminate
//! keeps the members that classify every pattern of the query's region of
//! competence correctly, shrinking the region until some member survives. DES-FA
//! builds that region from a validation set edited by ENN and ranks neighbors by
//! an adaptive distance that pushes boundary patterns away.
//!
//! [`evaluation`] runs the full benchmark protocol and renders its tables.

pub mod competence;
pub mod datasets;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod perceptron;
pub mod scaling;
pub mod selection;

pub use crate::competence::{CompetenceIndex, NeighborRule};
pub use crate::datasets::{DataSource, Dataset, DatasetName, Registry, SplitSpec};
pub use crate::ensemble::{bagging, Ensemble};
pub use crate::error::{Error, Result};
pub use crate::evaluation::{run_experiment, ExperimentConfig, ExperimentReport, Method};
pub use crate::perceptron::{train_perceptron, Perceptron, PerceptronParams};
pub use crate::scaling::MinMaxScaler;
pub use crate::selection::{knora_eliminate, SelectionOutcome};
