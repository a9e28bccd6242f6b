use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided paired t-test on per-iteration score differences `a - b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    /// `+inf` / `-inf` when every difference is the same non-zero value.
    #[serde(with = "super::float_sentinel")]
    pub t: f64,
    pub degrees_of_freedom: usize,
    pub alpha: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub significant: bool,
}

pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::validation("paired t-test needs at least two pairs"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::validation(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let df = n - 1;
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::validation(format!("t distribution: {e}")))?;
    let critical_value = dist.inverse_cdf(1.0 - alpha / 2.0);

    let (t, p_value) = if sd > 0.0 {
        let t = mean / (sd / (n as f64).sqrt());
        (t, 2.0 * (1.0 - dist.cdf(t.abs())))
    } else if mean == 0.0 {
        (0.0, 1.0)
    } else {
        (mean.signum() * f64::INFINITY, 0.0)
    };
    Ok(PairedTTest {
        t,
        degrees_of_freedom: df,
        alpha,
        critical_value,
        p_value,
        significant: t.abs() > critical_value,
    })
}
