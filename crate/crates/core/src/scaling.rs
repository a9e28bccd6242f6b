use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};

/// Per-feature min-max scaling onto `[0, 1]` (for the fitted range).
///
/// Constant features map to `0`. Values outside the fitted range are not
/// clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(data: &Dataset) -> Self {
        let d = data.n_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in data.rows() {
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        MinMaxScaler { min, max }
    }

    /// Fits on the union of several datasets sharing a feature space.
    pub fn fit_many(parts: &[&Dataset]) -> Self {
        let mut fitted = MinMaxScaler::fit(parts[0]);
        for part in &parts[1..] {
            let other = MinMaxScaler::fit(part);
            for j in 0..fitted.min.len() {
                fitted.min[j] = fitted.min[j].min(other.min[j]);
                fitted.max[j] = fitted.max[j].max(other.max[j]);
            }
        }
        fitted
    }

    pub fn from_bounds(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::validation(
                "scaler bounds must be non-empty and equal length",
            ));
        }
        if min
            .iter()
            .zip(&max)
            .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(Error::validation(
                "scaler needs finite bounds with max >= min",
            ));
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    #[inline]
    pub fn transform_into(&self, x: &[f64], out: &mut [f64]) {
        for (j, (o, &v)) in out.iter_mut().zip(x).enumerate() {
            let range = self.max[j] - self.min[j];
            *o = if range > 0.0 {
                (v - self.min[j]) / range
            } else {
                0.0
            };
        }
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.transform_into(x, &mut out);
        out
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        data.map_rows(|src, dst| self.transform_into(src, dst))
    }
}
