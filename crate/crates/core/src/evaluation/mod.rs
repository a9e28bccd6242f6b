//! The experimental protocol: repeated random splits, bagged pools, every
//! selection method scored on the test part, and the summary statistics
//! (means, standard deviations, paired t-tests, reduction counts).

mod loo;
mod report;
mod ttest;

pub use self::loo::leave_one_out_knn;
pub use self::report::{
    population_stddev, render_leave_one_out_table, render_results_table, render_timing_table,
    scores_csv, EnnStats, ExperimentReport, MethodSummary, MethodTiming, TTestSummary,
    TimingReport,
};
pub use self::ttest::{paired_t_test, PairedTTest};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competence::{CompetenceIndex, NeighborRule};
use crate::datasets::{split, split_predefined, DataSource, Dataset, Split, SplitSpec};
use crate::ensemble::{argmax_first, bagging, PredictionMatrix};
use crate::error::{Error, Result};
use crate::perceptron::PerceptronParams;
use crate::scaling::MinMaxScaler;
use crate::selection::{build_des_fa_region, build_region, classify_votes, DEFAULT_K};

/// A column of the comparison: one classification scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// ENN-edited reference with the given ENN `k`, adaptive k-NN, KNORA-E.
    DesFa(usize),
    AknnKnoraE,
    KnoraE,
    StaticEnsemble,
    Oracle,
    SingleBest,
}

impl Method {
    /// The comparison columns in display order.
    pub fn defaults() -> Vec<Method> {
        vec![
            Method::DesFa(1),
            Method::DesFa(3),
            Method::DesFa(5),
            Method::AknnKnoraE,
            Method::KnoraE,
            Method::StaticEnsemble,
            Method::Oracle,
            Method::SingleBest,
        ]
    }

    pub fn title(&self) -> String {
        match self {
            Method::DesFa(k) => format!("DES-FA ({k})"),
            Method::AknnKnoraE => "A-kNN + KNORA-E".into(),
            Method::KnoraE => "KNORA-E".into(),
            Method::StaticEnsemble => "Static Ensemble".into(),
            Method::Oracle => "Oracle".into(),
            Method::SingleBest => "Single Best".into(),
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, Method::DesFa(_) | Method::AknnKnoraE | Method::KnoraE)
    }

    /// Parses a comma-separated list. `des-fa` expands to one column per
    /// value of `enn_ks`; `all` selects every default column.
    pub fn parse_list(list: &str, enn_ks: &[usize]) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.to_ascii_lowercase().as_str() {
                "all" => {
                    out.extend(enn_ks.iter().map(|&k| Method::DesFa(k)));
                    out.extend(
                        Method::defaults()
                            .into_iter()
                            .filter(|m| !matches!(m, Method::DesFa(_))),
                    );
                }
                "des-fa" | "desfa" => out.extend(enn_ks.iter().map(|&k| Method::DesFa(k))),
                other => out.push(other.parse()?),
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::validation("no methods selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::DesFa(k) => write!(f, "des-fa-{k}"),
            Method::AknnKnoraE => f.write_str("aknn-knora-e"),
            Method::KnoraE => f.write_str("knora-e"),
            Method::StaticEnsemble => f.write_str("static"),
            Method::Oracle => f.write_str("oracle"),
            Method::SingleBest => f.write_str("single-best"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "aknn-knora-e" | "a-knn-knora-e" | "aknn" => Method::AknnKnoraE,
            "knora-e" | "knorae" => Method::KnoraE,
            "static" | "static-ensemble" => Method::StaticEnsemble,
            "oracle" => Method::Oracle,
            "single-best" | "sb" => Method::SingleBest,
            other => {
                let k = other
                    .strip_prefix("des-fa-")
                    .or_else(|| other.strip_prefix("desfa-"))
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| Error::validation(format!("unknown method `{s}`")))?;
                Method::DesFa(k)
            }
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serializes non-finite floats as `"+inf"`, `"-inf"` or `"nan"`.
pub(crate) mod float_sentinel {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("+inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

/// Everything that determines an experiment's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Registered dataset name or CSV path.
    pub dataset: String,
    pub ensemble_size: usize,
    pub k: usize,
    pub methods: Vec<Method>,
    pub iterations: usize,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub perceptron: PerceptronParams,
    /// Min-max scale features, fitted on the training portion.
    pub scale_features: bool,
    /// Also compute the leave-one-out k-NN accuracy over the whole dataset.
    pub leave_one_out: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Record a per-query trace of every dynamic decision.
    #[serde(default)]
    pub trace: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<String>) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            ensemble_size: 10,
            k: DEFAULT_K,
            methods: Method::defaults(),
            iterations: 20,
            train_fraction: 0.5,
            validation_fraction: 0.25,
            stratified: true,
            seed: 0,
            perceptron: PerceptronParams::default(),
            scale_features: true,
            leave_one_out: true,
            alpha: default_alpha(),
            trace: false,
        }
    }

    pub fn split_spec(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            validation_fraction_of_train: self.validation_fraction,
            seed,
            stratified: self.stratified,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::validation("ensemble size must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::validation("at least one iteration is required"));
        }
        if self.methods.is_empty() {
            return Err(Error::validation("no methods selected"));
        }
        if self.methods.contains(&Method::DesFa(0)) {
            return Err(Error::validation("ENN k must be at least 1"));
        }
        self.split_spec(0).validate()?;
        self.perceptron.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation("alpha must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Per-iteration seeds derived from the master seed.
    pub fn iteration_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.iterations).map(|_| rng.next_u64()).collect()
    }
}

/// One dynamic decision, for the optional per-query trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub method: Method,
    pub query: usize,
    pub truth: usize,
    pub label: usize,
    pub neighbors: Vec<usize>,
    /// Ranking distances; `null` marks an infinite adaptive distance.
    pub effective_distances: Vec<Option<f64>>,
    pub final_k: usize,
    pub reductions: usize,
    pub selected: Vec<usize>,
    pub fallback_used: bool,
}

/// Per-method results of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MethodRun {
    pub method: Method,
    pub accuracy: f64,
    pub reductions: u64,
    pub fallbacks: u64,
    pub queries: u64,
    pub seconds: f64,
    pub enn_kept_fraction: Option<f64>,
    pub enn_class_vanished: bool,
    pub enn_emptied: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct IterationRun {
    pub methods: Vec<MethodRun>,
    pub trace: Vec<TraceRecord>,
}

/// Report plus the non-deterministic side products of a run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub timing: TimingReport,
    pub trace: Vec<TraceRecord>,
}

fn scaled_split(config: &ExperimentConfig, source: &DataSource, seed: u64) -> Result<Split> {
    let spec = config.split_spec(seed);
    let parts = match source {
        DataSource::Single(d) => split(d, &spec)?,
        DataSource::Predefined { train, test } => split_predefined(train, test, &spec)?,
    };
    if !config.scale_features {
        return Ok(parts);
    }
    let scaler = MinMaxScaler::fit_many(&[&parts.train, &parts.validation]);
    Ok(Split {
        train: scaler.transform(&parts.train),
        validation: scaler.transform(&parts.validation),
        test: scaler.transform(&parts.test),
    })
}

fn accuracy_of(hits: usize, n: usize) -> f64 {
    hits as f64 / n as f64
}

struct DynamicPass {
    hits: usize,
    reductions: u64,
    fallbacks: u64,
}

#[allow(clippy::too_many_arguments)]
fn dynamic_pass(
    iteration: usize,
    method: Method,
    index: &CompetenceIndex,
    rule: NeighborRule,
    test: &Dataset,
    preds: &PredictionMatrix,
    k: usize,
    trace: Option<&mut Vec<TraceRecord>>,
) -> Result<DynamicPass> {
    let mut pass = DynamicPass {
        hits: 0,
        reductions: 0,
        fallbacks: 0,
    };
    let mut trace = trace;
    for i in 0..test.len() {
        let d = classify_votes(
            index,
            rule,
            test.row(i),
            preds.votes(i),
            preds.n_classes(),
            k,
        )?;
        pass.hits += usize::from(d.label == test.label(i));
        pass.reductions += d.outcome.reductions as u64;
        pass.fallbacks += u64::from(d.outcome.fallback_used);
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRecord {
                iteration,
                method,
                query: i,
                truth: test.label(i),
                label: d.label,
                neighbors: d.neighbors.indices(),
                effective_distances: d
                    .neighbors
                    .iter()
                    .map(|n| n.effective.is_finite().then_some(n.effective))
                    .collect(),
                final_k: d.outcome.final_k,
                reductions: d.outcome.reductions,
                selected: d.outcome.selected,
                fallback_used: d.outcome.fallback_used,
            });
        }
    }
    Ok(pass)
}

fn run_iteration(
    config: &ExperimentConfig,
    source: &DataSource,
    iteration: usize,
    seed: u64,
) -> Result<IterationRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split_seed = rng.next_u64();
    let bag_seed = rng.next_u64();
    let Split {
        train,
        validation,
        test,
    } = scaled_split(config, source, split_seed)?;
    let ensemble = bagging(&train, config.ensemble_size, &config.perceptron, bag_seed)?;
    let preds = ensemble.predictions(&test)?;
    let n = test.len();
    let oracle_hits = (0..n)
        .filter(|&i| preds.oracle_correct(i, test.label(i)))
        .count();

    let mut trace = Vec::new();
    let mut runs = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let started = Instant::now();
        let mut run = MethodRun {
            method,
            accuracy: 0.0,
            reductions: 0,
            fallbacks: 0,
            queries: n as u64,
            seconds: 0.0,
            enn_kept_fraction: None,
            enn_class_vanished: false,
            enn_emptied: false,
        };
        let sink = config.trace.then_some(&mut trace);
        let hits = match method {
            Method::Oracle => oracle_hits,
            Method::StaticEnsemble => (0..n)
                .filter(|&i| preds.static_vote(i) == test.label(i))
                .count(),
            Method::SingleBest => {
                let acc = ensemble
                    .predictions(&validation)?
                    .member_accuracies(validation.labels());
                let best = argmax_first(&acc);
                (0..n)
                    .filter(|&i| preds.votes(i)[best] == test.label(i))
                    .count()
            }
            Method::KnoraE | Method::AknnKnoraE => {
                let index = build_region(&ensemble, &validation)?;
                let rule = if method == Method::KnoraE {
                    NeighborRule::Plain
                } else {
                    NeighborRule::Adaptive
                };
                let pass = dynamic_pass(
                    iteration, method, &index, rule, &test, &preds, config.k, sink,
                )?;
                run.reductions = pass.reductions;
                run.fallbacks = pass.fallbacks;
                pass.hits
            }
            Method::DesFa(k_enn) => {
                let region = build_des_fa_region(&ensemble, &validation, k_enn)?;
                run.enn_kept_fraction =
                    Some(region.edited.kept.len() as f64 / validation.len() as f64);
                run.enn_class_vanished = region.class_vanished();
                run.enn_emptied = region.enn_fallback;
                let pass = dynamic_pass(
                    iteration,
                    method,
                    &region.index,
                    NeighborRule::Adaptive,
                    &test,
                    &preds,
                    config.k,
                    sink,
                )?;
                run.reductions = pass.reductions;
                run.fallbacks = pass.fallbacks;
                pass.hits
            }
        };
        if hits > oracle_hits {
            return Err(Error::validation(format!(
                "{method} scored {hits} hits above the oracle's {oracle_hits}"
            )));
        }
        run.accuracy = accuracy_of(hits, n);
        run.seconds = started.elapsed().as_secs_f64();
        runs.push(run);
    }
    Ok(IterationRun {
        methods: runs,
        trace,
    })
}

/// Runs the full protocol on `source`.
pub fn run_experiment(config: &ExperimentConfig, source: &DataSource) -> Result<ExperimentOutcome> {
    config.validate()?;
    let seeds = config.iteration_seeds();
    let iterations = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            run_iteration(config, source, i, seed).map_err(|e| Error::Iteration {
                iteration: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let full = source.full()?;
    let leave_one_out = if config.leave_one_out && config.k < full.len() {
        Some(100.0 * leave_one_out_knn(&full, config.k, config.scale_features)?)
    } else {
        None
    };
    let (report, timing) = report::assemble(config, &full, &seeds, &iterations, leave_one_out)?;
    let trace = iterations.into_iter().flat_map(|it| it.trace).collect();
    Ok(ExperimentOutcome {
        report,
        timing,
        trace,
    })
}

/// Per-method wall time and reduction counts of a full run.
pub fn measure_timing(config: &ExperimentConfig, source: &DataSource) -> Result<TimingReport> {
    Ok(run_experiment(config, source)?.timing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::defaults() {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("des-fa-0".parse::<Method>().is_err());
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn method_list_expands_des_fa() {
        let m = Method::parse_list("knora-e,des-fa", &[1]).unwrap();
        assert_eq!(m, vec![Method::DesFa(1), Method::KnoraE]);
        let all = Method::parse_list("all", &[1, 3, 5]).unwrap();
        assert_eq!(all, Method::defaults());
        assert!(Method::parse_list("", &[1]).is_err());
    }

    #[test]
    fn config_defaults_match_protocol() {
        let c = ExperimentConfig::new("pima");
        assert_eq!((c.ensemble_size, c.k, c.iterations), (10, 7, 20));
        assert_eq!((c.train_fraction, c.validation_fraction), (0.5, 0.25));
        assert!(c.validate().is_ok());
        let bad = ExperimentConfig {
            iterations: 0,
            ..c.clone()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn float_sentinel_handles_finite_values() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W(#[serde(with = "float_sentinel")] f64);
        for v in [1.5, f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&W(v)).unwrap();
            assert_eq!(serde_json::from_str::<W>(&s).unwrap(), W(v));
        }
    }
}
