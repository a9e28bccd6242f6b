//! One-vs-rest perceptron, the weak base learner of the pool.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::scaling::MinMaxScaler;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptronParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronParams {
    fn default() -> Self {
        PerceptronParams {
            epochs: 100,
            learning_rate: 1.0,
        }
    }
}

impl PerceptronParams {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("perceptron needs at least one epoch"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Linear one-vs-rest classifier: one weight row and bias per class, applied
/// to min-max scaled inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perceptron {
    n_classes: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    scaler: MinMaxScaler,
    train_seed: u64,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains with classic online perceptron updates from zero weights.
///
/// Every epoch visits the samples in a fresh seed-driven order and updates
/// each class's unit whenever its sign disagrees with the one-vs-rest target.
/// Training ends early after an epoch without updates.
pub fn train_perceptron(
    train: &Dataset,
    params: &PerceptronParams,
    seed: u64,
) -> Result<Perceptron> {
    params.validate()?;
    if train.is_empty() {
        return Err(Error::validation("cannot train on an empty dataset"));
    }
    let scaler = MinMaxScaler::fit(train);
    let scaled = scaler.transform(train);
    let (c, d) = (train.n_classes(), train.n_features());
    let mut weights = vec![0.0; c * d];
    let mut bias = vec![0.0; c];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lr = params.learning_rate;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut updates = 0usize;
        for &i in &order {
            let x = scaled.row(i);
            let y = scaled.label(i);
            for (class, (w, b)) in weights.chunks_exact_mut(d).zip(bias.iter_mut()).enumerate() {
                let target = if class == y { 1.0 } else { -1.0 };
                if target * (dot(w, x) + *b) <= 0.0 {
                    for (wj, &xj) in w.iter_mut().zip(x) {
                        *wj += lr * target * xj;
                    }
                    *b += lr * target;
                    updates += 1;
                }
            }
        }
        if updates == 0 {
            break;
        }
    }

    Ok(Perceptron {
        n_classes: c,
        weights,
        bias,
        scaler,
        train_seed: seed,
    })
}

impl Perceptron {
    /// Assembles a model from explicit parameters; `weights` holds one row per class.
    pub fn from_parts(
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        scaler: MinMaxScaler,
        train_seed: u64,
    ) -> Result<Self> {
        let d = scaler.n_features();
        if weights.len() < 2 || weights.len() != bias.len() {
            return Err(Error::validation(
                "need one weight row and bias per class, at least two classes",
            ));
        }
        if weights.iter().any(|w| w.len() != d) {
            return Err(Error::validation(
                "weight rows must match the scaler dimensionality",
            ));
        }
        let weights: Vec<f64> = weights.into_iter().flatten().collect();
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::validation("weights must be finite"));
        }
        Ok(Perceptron {
            n_classes: bias.len(),
            weights,
            bias,
            scaler,
            train_seed,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.scaler.n_features()
    }

    pub fn train_seed(&self) -> u64 {
        self.train_seed
    }

    pub fn scaler(&self) -> &MinMaxScaler {
        &self.scaler
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights(&self, class: usize) -> &[f64] {
        let d = self.n_features();
        &self.weights[class * d..(class + 1) * d]
    }

    /// Per-class activations `w_c . scale(x) + b_c`.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let scaled = self.scaler.transform_row(x);
        Ok(self
            .weights
            .chunks_exact(self.n_features())
            .zip(&self.bias)
            .map(|(w, b)| dot(w, &scaled) + b)
            .collect())
    }

    /// Class with the largest activation; ties go to the smaller class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        let mut buf = vec![0.0; x.len()];
        Ok(self.predict_with(x, &mut buf))
    }

    /// `predict` without the dimension check, scaling into `buf`.
    pub(crate) fn predict_with(&self, x: &[f64], buf: &mut [f64]) -> usize {
        self.scaler.transform_into(x, buf);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (class, (w, b)) in self
            .weights
            .chunks_exact(buf.len())
            .zip(&self.bias)
            .enumerate()
        {
            let score = dot(w, buf) + b;
            if score > best_score {
                best = class;
                best_score = score;
            }
        }
        best
    }

    /// Predictions for every row of `data`.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<usize>> {
        if data.n_features() != self.n_features() {
            return Err(self.dim_error(data.n_features()));
        }
        let mut buf = vec![0.0; self.n_features()];
        Ok(data
            .rows()
            .map(|x| self.predict_with(x, &mut buf))
            .collect())
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let preds = self.predict_dataset(data)?;
        let correct = preds
            .iter()
            .zip(data.labels())
            .filter(|(p, l)| p == l)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.n_features() {
            Ok(())
        } else {
            Err(self.dim_error(x.len()))
        }
    }

    fn dim_error(&self, got: usize) -> Error {
        Error::validation(format!(
            "pattern has {got} features, model expects {}",
            self.n_features()
        ))
    }

    /// Flat text record:
    ///
    /// ```text
    /// perceptron <classes> <features> <train_seed>
    /// min <f_1> .. <f_D>
    /// max <f_1> .. <f_D>
    /// class <bias> <w_1> .. <w_D>      (one line per class)
    /// ```
    ///
    /// Floats use Rust's shortest round-trip formatting.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            out,
            "perceptron {} {} {}",
            self.n_classes,
            self.n_features(),
            self.train_seed
        );
        let _ = writeln!(out, "min {}", join(self.scaler.min()));
        let _ = writeln!(out, "max {}", join(self.scaler.max()));
        for c in 0..self.n_classes {
            let _ = writeln!(out, "class {} {}", self.bias[c], join(self.weights(c)));
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (n_classes, n_features, seed) = {
            let (no, head) = lines
                .next()
                .ok_or_else(|| Error::validation("empty perceptron record"))?;
            let f: Vec<&str> = head.split_whitespace().collect();
            if f.len() != 4 || f[0] != "perceptron" {
                return Err(record_error(
                    no,
                    "expected `perceptron <classes> <features> <seed>`",
                ));
            }
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| record_error(no, "bad integer"))
            };
            (num(f[1])? as usize, num(f[2])? as usize, num(f[3])?)
        };
        let mut expect = |tag: &str, len: usize| -> Result<Vec<f64>> {
            let (no, line) = lines.next().ok_or_else(|| {
                Error::validation(format!("perceptron record ends before `{tag}`"))
            })?;
            let mut f = line.split_whitespace();
            if f.next() != Some(tag) {
                return Err(record_error(no, &format!("expected `{tag}` line")));
            }
            let values: Vec<f64> = f
                .map(|s| s.parse::<f64>().map_err(|_| record_error(no, "bad number")))
                .collect::<Result<_>>()?;
            if values.len() != len {
                return Err(record_error(
                    no,
                    &format!("expected {len} values, found {}", values.len()),
                ));
            }
            Ok(values)
        };
        let min = expect("min", n_features)?;
        let max = expect("max", n_features)?;
        let mut weights = Vec::with_capacity(n_classes);
        let mut bias = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            let mut row = expect("class", n_features + 1)?;
            bias.push(row.remove(0));
            weights.push(row);
        }
        Perceptron::from_parts(weights, bias, MinMaxScaler::from_bounds(min, max)?, seed)
    }
}

fn record_error(line: usize, message: &str) -> Error {
    Error::Parse {
        line: line + 1,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_1d() -> Dataset {
        let xs = [-3.0, -2.0, -1.0, -1.5, 1.0, 2.0, 3.0, 1.5];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let labels = xs.iter().map(|&x| usize::from(x > 0.0)).collect();
        Dataset::from_rows("sep", &rows, labels, 2).unwrap()
    }

    fn unit_scaler(d: usize) -> MinMaxScaler {
        MinMaxScaler::from_bounds(vec![0.0; d], vec![1.0; d]).unwrap()
    }

    #[test]
    fn separable_data_is_learned_perfectly() {
        let d = separable_1d();
        let m = train_perceptron(&d, &PerceptronParams::default(), 1).unwrap();
        assert_eq!(m.accuracy(&d).unwrap(), 1.0);
        assert_eq!(m.predict_dataset(&d).unwrap(), d.labels());
    }

    #[test]
    fn hyperparameters_are_validated() {
        let d = separable_1d();
        let zero_epochs = PerceptronParams {
            epochs: 0,
            ..Default::default()
        };
        assert!(train_perceptron(&d, &zero_epochs, 1).is_err());
        let bad_rate = PerceptronParams {
            learning_rate: 0.0,
            ..Default::default()
        };
        assert!(train_perceptron(&d, &bad_rate, 1).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let d =
            crate::datasets::generate_two_gaussians(40, [0.0, 0.0], [1.0, 0.0], 1.0, 2).unwrap();
        let p = PerceptronParams::default();
        assert_eq!(
            train_perceptron(&d, &p, 11).unwrap(),
            train_perceptron(&d, &p, 11).unwrap()
        );
    }

    #[test]
    fn identity_weights_pick_the_larger_coordinate() {
        let m = Perceptron::from_parts(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            unit_scaler(2),
            0,
        )
        .unwrap();
        assert_eq!(m.predict(&[0.2, 0.9]).unwrap(), 1);
        assert_eq!(m.predict(&[0.9, 0.2]).unwrap(), 0);
        // Exact tie goes to the smaller class index.
        assert_eq!(m.predict(&[0.5, 0.5]).unwrap(), 0);
        assert!(m.predict(&[0.5]).is_err());
    }

    #[test]
    fn record_round_trip() {
        let d =
            crate::datasets::generate_two_gaussians(30, [0.0, 0.0], [2.0, 1.0], 1.0, 5).unwrap();
        let m = train_perceptron(&d, &PerceptronParams::default(), 3).unwrap();
        let back = Perceptron::from_record(&m.to_record()).unwrap();
        assert_eq!(m, back);
        assert!(Perceptron::from_record("perceptron 2 1 0\nmin 0\n").is_err());
    }
}
