use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use desfa::competence::{compute_radii, enn_filter, write_region_csv};
use desfa::datasets::{constants, generate_two_gaussians, save_csv, DatasetName, Registry};
use desfa::evaluation::{
    render_leave_one_out_table, render_results_table, render_timing_table, run_experiment,
    scores_csv, ExperimentConfig, ExperimentReport, Method, TimingReport,
};

use crate::manifest::{unix_now, RunManifest, MANIFEST_FILE};
use crate::{DemoArgs, ReplayArgs, RunArgs, TableArgs};

pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";

/// A bad invocation the core library has no error for; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn config_from_args(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(args.dataset.clone());
    config.methods = Method::parse_list(&args.methods, &args.enn_k)?;
    config.k = args.k;
    config.ensemble_size = args.ensemble_size;
    config.iterations = args.iterations;
    config.seed = args.seed;
    config.perceptron.epochs = args.epochs;
    config.perceptron.learning_rate = args.learning_rate;
    config.leave_one_out = !args.no_loo;
    config.trace = args.trace;
    config.validate()?;
    Ok(config)
}

/// Runs `config` and writes every artifact into `dir`. Returns the manifest.
fn execute(
    config: &ExperimentConfig,
    data_dir: &Path,
    dir: Option<&Path>,
    out: &Path,
) -> Result<(PathBuf, RunManifest)> {
    let started_unix = unix_now();
    let source = Registry::new(data_dir).resolve(&config.dataset)?;
    let outcome = run_experiment(config, &source)?;
    let report = &outcome.report;
    let dir = dir.map_or_else(|| out.join(&report.dataset), Path::to_path_buf);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut artifacts = vec![
        REPORT_FILE.to_string(),
        "scores.csv".into(),
        "table.txt".into(),
        TIMING_FILE.into(),
    ];
    write_file(&dir.join(REPORT_FILE), to_json(report)?)?;
    write_file(&dir.join("scores.csv"), scores_csv(report))?;
    let table = format!(
        "{}\n{}",
        render_results_table(std::slice::from_ref(report)),
        render_leave_one_out_table(std::slice::from_ref(report))
    );
    write_file(&dir.join("table.txt"), table)?;
    write_file(&dir.join(TIMING_FILE), to_json(&outcome.timing)?)?;
    if config.trace {
        let path = dir.join("trace.jsonl");
        let file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        for record in &outcome.trace {
            serde_json::to_writer(&mut w, record)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        artifacts.push("trace.jsonl".into());
    }
    artifacts.push(MANIFEST_FILE.into());
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        data_dir: absolute(data_dir),
        iteration_seeds: report.iteration_seeds.clone(),
        artifacts,
        started_unix,
        finished_unix: unix_now(),
    };
    write_file(&dir.join(MANIFEST_FILE), to_json(&manifest)?)?;
    Ok((dir, manifest))
}

pub fn run(args: &RunArgs) -> Result<ExitCode> {
    let config = config_from_args(args)?;
    let (dir, _) = execute(&config, &args.data_dir, None, &args.out)?;
    let report: ExperimentReport =
        serde_json::from_str(&fs::read_to_string(dir.join(REPORT_FILE))?)?;
    print!("{}", render_results_table(std::slice::from_ref(&report)));
    println!("artifacts written to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn replay(args: &ReplayArgs) -> Result<ExitCode> {
    let manifest = RunManifest::read(&args.manifest)?;
    let original_dir = args.manifest.parent().unwrap_or(Path::new("."));
    let target = args
        .out
        .clone()
        .unwrap_or_else(|| original_dir.join("replay"));
    let (dir, _) = execute(&manifest.config, &manifest.data_dir, Some(&target), &target)?;
    let original = fs::read(original_dir.join(REPORT_FILE))
        .with_context(|| format!("reading the original {REPORT_FILE}"))?;
    let replayed = fs::read(dir.join(REPORT_FILE))?;
    if original == replayed {
        println!("report reproduced bit-identically in {}", dir.display());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("replayed report differs from the original");
        Ok(ExitCode::from(1))
    }
}

pub fn demo_enn(args: &DemoArgs) -> Result<ExitCode> {
    let data = generate_two_gaussians(
        args.n_per_class,
        constants::GAUSSIAN_MU1,
        constants::GAUSSIAN_MU2,
        args.variance,
        args.seed,
    )?;
    let dir = args.out.join("demo-enn");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    save_csv(&data, dir.join("gaussians.csv"))?;
    for &k in &args.enn_k {
        let edited = enn_filter(&data, k)?;
        let radii = compute_radii(&edited.apply(&data)?).ok();
        let path = dir.join(format!("enn_k{k}.csv"));
        let file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_region_csv(&data, &edited, radii.as_deref(), &mut w)?;
        w.flush()?;
        println!(
            "k={k}: kept {} of {} points -> {}",
            edited.kept.len(),
            data.len(),
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn find_reports(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            find_reports(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == REPORT_FILE) {
            found.push(path);
        }
    }
    Ok(())
}

/// Registered datasets in catalog order, then everything else by name.
fn catalog_position(report: &ExperimentReport) -> (usize, String) {
    let pos = report
        .config
        .dataset
        .parse::<DatasetName>()
        .ok()
        .and_then(|n| DatasetName::ALL.iter().position(|&m| m == n))
        .unwrap_or(DatasetName::ALL.len());
    (pos, report.dataset.clone())
}

pub fn table(args: &TableArgs) -> Result<ExitCode> {
    let mut paths = Vec::new();
    find_reports(&args.reports, &mut paths)?;
    if paths.is_empty() {
        return Err(UsageError(format!(
            "no {REPORT_FILE} found under {}",
            args.reports.display()
        ))
        .into());
    }
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for path in &paths {
        let text = fs::read_to_string(path)?;
        let report: ExperimentReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if args.seconds {
            let timing_path = path.with_file_name(TIMING_FILE);
            if let Ok(text) = fs::read_to_string(&timing_path) {
                let timing: TimingReport = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", timing_path.display()))?;
                timings.push(timing);
            }
        }
        reports.push(report);
    }
    reports.sort_by_key(catalog_position);
    let rendered = format!(
        "Leave-one-out comparison\n\n{}\nComparative results, mean(stddev) over iterations\n\n{}\nKNORA k-reductions\n\n{}",
        render_leave_one_out_table(&reports),
        render_results_table(&reports),
        render_timing_table(&reports, &timings),
    );
    match &args.out {
        Some(path) => write_file(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}
