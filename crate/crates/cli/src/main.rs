//! `viscom`: extract page features, aggregate sessions, run experiments.

mod commands;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "viscom", version, about = "Visual-complexity features and knowledge-gain experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Global {
    /// Master seed; overrides the seed in the experiment config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per logical core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Experiment config (experiment.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Fact list for the web-relevance features (JSON).
    #[arg(long, global = true)]
    facts: Option<PathBuf>,
    /// Base URL of a remote embedding service.
    #[arg(long, global = true)]
    provider_url: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract page features from snapshot bundles into features_pages.csv.
    Extract { snapshot_root: PathBuf },
    /// Average content pages per session into features.csv and write labels.csv.
    Aggregate { sessions: PathBuf, pages: PathBuf },
    /// Run the configured cross-validation experiment into report.json and report.csv.
    Experiment { features: PathBuf, labels: PathBuf },
    /// Permutation feature importance into pfi.csv.
    Importance { features: PathBuf, labels: PathBuf },
    /// Render report.json as a text table, optionally with a PFI bar chart.
    Report {
        report: PathBuf,
        /// pfi.csv to include.
        #[arg(long)]
        pfi: Option<PathBuf>,
        /// Write a PNG bar chart of the PFI rows here.
        #[arg(long, requires = "pfi")]
        plot: Option<PathBuf>,
    },
    /// Write the feature registry as registry.json.
    Registry,
    /// Generate a synthetic session table with a planted feature.
    Synth {
        #[arg(long, default_value_t = 112)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        noise_features: usize,
        #[arg(long, default_value_t = 0.05)]
        noise_sd: f64,
        /// Leave out the planted feature (pure noise).
        #[arg(long)]
        null: bool,
        /// Add a constant column.
        #[arg(long)]
        constant: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.global.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let g = &cli.global;
    let result = match cli.command {
        Command::Extract { snapshot_root } => commands::extract(g, &snapshot_root),
        Command::Aggregate { sessions, pages } => commands::aggregate(g, &sessions, &pages),
        Command::Experiment { features, labels } => commands::experiment(g, &features, &labels),
        Command::Importance { features, labels } => commands::importance(g, &features, &labels),
        Command::Report { report, pfi, plot } => commands::report(g, &report, pfi.as_deref(), plot.as_deref()),
        Command::Registry => commands::registry(g),
        Command::Synth { n, noise_features, noise_sd, null, constant } => {
            commands::synth(g, n, noise_features, noise_sd, !null, constant)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
