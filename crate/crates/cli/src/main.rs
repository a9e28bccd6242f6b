//! `desfa`: run the benchmark protocol, replay runs, dump ENN demos and render tables.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "desfa",
    version,
    about = "Dynamic ensemble selection benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the repeated-split experiment on one dataset.
    Run(RunArgs),
    /// Re-run an experiment from its manifest and compare the reports.
    Replay(ReplayArgs),
    /// Apply ENN to two Gaussian clouds and write the points as CSV.
    DemoEnn(DemoArgs),
    /// Render stored reports as comparison tables.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Registered dataset name or path to a CSV file (label in the last column).
    #[arg(long)]
    pub dataset: String,
    /// Comma-separated methods: des-fa, des-fa-<k>, aknn-knora-e, knora-e,
    /// static, oracle, single-best, or all.
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// Neighborhood size of the region of competence.
    #[arg(long, default_value_t = 7)]
    pub k: usize,
    /// ENN neighborhood sizes; one DES-FA column each.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    pub enn_k: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub ensemble_size: usize,
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perceptron training epochs.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub learning_rate: f64,
    #[arg(long, env = "DESFA_OUT_DIR", default_value = "results")]
    pub out: PathBuf,
    #[arg(long, env = "DESFA_DATA_DIR", default_value = "data/uci")]
    pub data_dir: PathBuf,
    /// Skip the leave-one-out k-NN baseline.
    #[arg(long)]
    pub no_loo: bool,
    /// Write every dynamic decision to trace.jsonl.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where the replayed artifacts go; defaults to `replay/` next to the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 100)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    pub enn_k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "DESFA_OUT_DIR", default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Directory searched recursively for report.json files.
    #[arg(long)]
    pub reports: PathBuf,
    /// Add wall-clock seconds from timing.json to the timing table.
    #[arg(long)]
    pub seconds: bool,
    /// Write the tables here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Replay(args) => commands::replay(&args),
        Command::DemoEnn(args) => commands::demo_enn(&args),
        Command::Table(args) => commands::table(&args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err
                .downcast_ref::<desfa::Error>()
                .is_some_and(desfa::Error::is_usage_error)
                || err.downcast_ref::<commands::UsageError>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
