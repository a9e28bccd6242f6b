//! Aggregated results and their renderings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{paired_t_test, ExperimentConfig, IterationRun, Method, PairedTTest};
use crate::datasets::{Dataset, DatasetName};
use crate::error::{Error, Result};

/// ENN statistics of one DES-FA column, over all iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnnStats {
    /// Mean fraction of the validation set that survived editing.
    pub mean_kept_fraction: f64,
    /// Iterations in which editing removed every pattern of some class.
    pub iterations_with_vanished_class: usize,
    /// Iterations in which editing removed everything and the unedited set was used.
    pub iterations_enn_emptied: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean test accuracy in percent.
    pub mean: f64,
    /// Population standard deviation of `scores`.
    pub stddev: f64,
    /// Per-iteration test accuracy in percent.
    pub scores: Vec<f64>,
    /// KNORA k-reductions summed over every query of every iteration.
    pub total_reductions: u64,
    /// Queries where no member survived any neighborhood size.
    pub total_fallbacks: u64,
    /// Test queries classified, over all iterations.
    pub queries: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enn: Option<EnnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestSummary {
    pub method: Method,
    pub baseline: Method,
    #[serde(flatten)]
    pub test: PairedTTest,
}

/// Deterministic results of one experiment. Wall times live in [`TimingReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub title: String,
    pub n_instances: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub config: ExperimentConfig,
    pub stddev_convention: String,
    /// Leave-one-out k-NN accuracy in percent over the whole dataset.
    pub leave_one_out: Option<f64>,
    pub methods: Vec<MethodSummary>,
    pub t_tests: Vec<TTestSummary>,
    pub iteration_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: Method,
    pub total_seconds: f64,
    pub mean_seconds_per_iteration: f64,
    pub total_reductions: u64,
    pub total_fallbacks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub dataset: String,
    pub methods: Vec<MethodTiming>,
}

pub fn population_stddev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = mean(xs);
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn mean(&self, method: Method) -> Option<f64> {
        self.summary(method).map(|m| m.mean)
    }

    /// The DES-FA column with the highest mean; ties go to the smaller ENN k.
    pub fn best_des_fa(&self) -> Option<&MethodSummary> {
        self.methods
            .iter()
            .filter(|m| matches!(m.method, Method::DesFa(_)))
            .fold(None, |best: Option<&MethodSummary>, m| match best {
                Some(b) if b.mean >= m.mean => Some(b),
                _ => Some(m),
            })
    }

    /// Checks that every mean and stddev matches its raw scores.
    pub fn check_consistency(&self, tolerance: f64) -> Result<()> {
        for m in &self.methods {
            if m.scores.iter().any(|s| !(0.0..=100.0).contains(s)) {
                return Err(Error::validation(format!(
                    "{} has a score outside [0, 100]",
                    m.method
                )));
            }
            let (mu, sd) = (mean(&m.scores), population_stddev(&m.scores));
            if (mu - m.mean).abs() > tolerance || (sd - m.stddev).abs() > tolerance {
                return Err(Error::validation(format!(
                    "{}: stored mean/stddev {}/{} but scores give {mu}/{sd}",
                    m.method, m.mean, m.stddev
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn assemble(
    config: &ExperimentConfig,
    full: &Dataset,
    seeds: &[u64],
    iterations: &[IterationRun],
    leave_one_out: Option<f64>,
) -> Result<(ExperimentReport, TimingReport)> {
    let mut methods = Vec::with_capacity(config.methods.len());
    let mut timings = Vec::with_capacity(config.methods.len());
    for (col, &method) in config.methods.iter().enumerate() {
        let runs: Vec<_> = iterations.iter().map(|it| &it.methods[col]).collect();
        let scores: Vec<f64> = runs.iter().map(|r| 100.0 * r.accuracy).collect();
        let total_reductions = runs.iter().map(|r| r.reductions).sum();
        let total_fallbacks = runs.iter().map(|r| r.fallbacks).sum();
        let enn = matches!(method, Method::DesFa(_)).then(|| EnnStats {
            mean_kept_fraction: mean(
                &runs
                    .iter()
                    .map(|r| r.enn_kept_fraction.unwrap_or(1.0))
                    .collect::<Vec<_>>(),
            ),
            iterations_with_vanished_class: runs.iter().filter(|r| r.enn_class_vanished).count(),
            iterations_enn_emptied: runs.iter().filter(|r| r.enn_emptied).count(),
        });
        let total_seconds: f64 = runs.iter().map(|r| r.seconds).sum();
        timings.push(MethodTiming {
            method,
            total_seconds,
            mean_seconds_per_iteration: total_seconds / runs.len() as f64,
            total_reductions,
            total_fallbacks,
        });
        methods.push(MethodSummary {
            method,
            mean: mean(&scores),
            stddev: population_stddev(&scores),
            queries: runs.iter().map(|r| r.queries).sum(),
            scores,
            total_reductions,
            total_fallbacks,
            enn,
        });
    }

    let mut t_tests = Vec::new();
    if let Some(base) = methods.iter().find(|m| m.method == Method::KnoraE) {
        for m in &methods {
            if matches!(m.method, Method::DesFa(_) | Method::AknnKnoraE) && m.scores.len() >= 2 {
                t_tests.push(TTestSummary {
                    method: m.method,
                    baseline: Method::KnoraE,
                    test: paired_t_test(&m.scores, &base.scores, config.alpha)?,
                });
            }
        }
    }

    let title = config
        .dataset
        .parse::<DatasetName>()
        .map(|n| n.title().to_string())
        .unwrap_or_else(|_| full.name().to_string());
    let report = ExperimentReport {
        dataset: full.name().to_string(),
        title,
        n_instances: full.len(),
        n_features: full.n_features(),
        n_classes: full.n_classes(),
        config: config.clone(),
        stddev_convention: "population".into(),
        leave_one_out,
        methods,
        t_tests,
        iteration_seeds: seeds.to_vec(),
    };
    let timing = TimingReport {
        dataset: report.dataset.clone(),
        methods: timings,
    };
    Ok((report, timing))
}

fn render_grid(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

/// Leave-one-out accuracy against the KNORA-E, static and oracle means.
pub fn render_leave_one_out_table(reports: &[ExperimentReport]) -> String {
    let header: Vec<String> = [
        "Database",
        "Leave-One-Out",
        "KNORA-E",
        "Static Ensemble",
        "Oracle",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.title.clone(),
                cell(r.leave_one_out),
                cell(r.mean(Method::KnoraE)),
                cell(r.mean(Method::StaticEnsemble)),
                cell(r.mean(Method::Oracle)),
            ]
        })
        .collect();
    render_grid(&header, &rows)
}

/// `mean(stddev)` per method, one row per report.
pub fn render_results_table(reports: &[ExperimentReport]) -> String {
    let columns: BTreeSet<Method> = reports
        .iter()
        .flat_map(|r| r.methods.iter().map(|m| m.method))
        .collect();
    let mut header = vec!["Database".to_string()];
    header.extend(columns.iter().map(Method::title));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.title.clone()];
            row.extend(columns.iter().map(|&m| {
                r.summary(m)
                    .map_or_else(|| "-".into(), |s| format!("{:.2}({:.2})", s.mean, s.stddev))
            }));
            row
        })
        .collect();
    render_grid(&header, &rows)
}

/// Total k-reductions of the best DES-FA column and of KNORA-E, with wall
/// seconds appended when a matching timing report is given.
pub fn render_timing_table(reports: &[ExperimentReport], timings: &[TimingReport]) -> String {
    let with_seconds = !timings.is_empty();
    let mut header: Vec<String> = ["Database", "DES-FA (k)", "reductions", "KNORA-E reductions"]
        .map(String::from)
        .to_vec();
    if with_seconds {
        header.extend(["DES-FA seconds".to_string(), "KNORA-E seconds".to_string()]);
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let best = r.best_des_fa();
            let knora = r.summary(Method::KnoraE);
            let mut row = vec![
                r.title.clone(),
                best.map_or_else(|| "-".into(), |b| b.method.title()),
                best.map_or_else(|| "-".into(), |b| b.total_reductions.to_string()),
                knora.map_or_else(|| "-".into(), |k| k.total_reductions.to_string()),
            ];
            if with_seconds {
                let timing = timings.iter().find(|t| t.dataset == r.dataset);
                let secs = |m: Option<Method>| {
                    let s = m.and_then(|m| timing?.methods.iter().find(|t| t.method == m));
                    s.map_or_else(|| "-".into(), |s| format!("{:.3}", s.total_seconds))
                };
                row.push(secs(best.map(|b| b.method)));
                row.push(secs(knora.map(|k| k.method)));
            }
            row
        })
        .collect();
    render_grid(&header, &rows)
}

/// Raw per-iteration scores, one row per iteration.
pub fn scores_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("iteration,seed");
    for m in &report.methods {
        let _ = write!(out, ",{}", m.method);
    }
    out.push('\n');
    for (i, seed) in report.iteration_seeds.iter().enumerate() {
        let _ = write!(out, "{i},{seed}");
        for m in &report.methods {
            let _ = write!(out, ",{}", m.scores[i]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_report() -> ExperimentReport {
        let summary = |method, scores: Vec<f64>, reductions| MethodSummary {
            method,
            mean: mean(&scores),
            stddev: population_stddev(&scores),
            scores,
            total_reductions: reductions,
            total_fallbacks: 0,
            queries: 0,
            enn: None,
        };
        let mut config = ExperimentConfig::new("toy");
        config.iterations = 2;
        config.methods = vec![
            Method::DesFa(1),
            Method::DesFa(3),
            Method::KnoraE,
            Method::Oracle,
        ];
        ExperimentReport {
            dataset: "toy".into(),
            title: "Toy".into(),
            n_instances: 10,
            n_features: 2,
            n_classes: 2,
            config,
            stddev_convention: "population".into(),
            leave_one_out: Some(70.0),
            methods: vec![
                summary(Method::DesFa(1), vec![80.0, 90.0], 3),
                summary(Method::DesFa(3), vec![85.0, 85.0], 2),
                summary(Method::KnoraE, vec![70.0, 80.0], 9),
                summary(Method::Oracle, vec![100.0, 100.0], 0),
            ],
            t_tests: vec![],
            iteration_seeds: vec![11, 12],
        }
    }

    #[test]
    fn population_stddev_divides_by_n() {
        assert_eq!(population_stddev(&[80.0, 90.0]), 5.0);
        assert_eq!(population_stddev(&[3.0]), 0.0);
    }

    #[test]
    fn best_des_fa_prefers_smaller_k_on_ties() {
        let r = sample_report();
        assert_eq!(r.best_des_fa().unwrap().method, Method::DesFa(1));
        r.check_consistency(1e-9).unwrap();
    }

    #[test]
    fn inconsistent_summary_is_caught() {
        let mut r = sample_report();
        r.methods[0].mean += 0.5;
        assert!(r.check_consistency(1e-9).is_err());
    }

    #[test]
    fn results_table_follows_column_order() {
        let table = render_results_table(&[sample_report()]);
        let header = table.lines().next().unwrap();
        let pos = |s: &str| header.find(s).unwrap();
        assert!(pos("DES-FA (1)") < pos("DES-FA (3)"));
        assert!(pos("DES-FA (3)") < pos("KNORA-E"));
        assert!(pos("KNORA-E") < pos("Oracle"));
        assert!(table.contains("85.00(5.00)"));
    }

    #[test]
    fn scores_csv_has_one_row_per_iteration() {
        let csv = scores_csv(&sample_report());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,seed,des-fa-1,des-fa-3,knora-e,oracle");
        assert_eq!(lines[1], "0,11,80,85,70,100");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn timing_table_uses_best_des_fa() {
        let t = render_timing_table(&[sample_report()], &[]);
        let row = t.lines().nth(2).unwrap();
        assert!(row.contains("DES-FA (1)"));
        assert!(row.contains('3') && row.contains('9'));
    }
}
