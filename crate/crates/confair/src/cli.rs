//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::dataio::DataSummary;
use crate::experiment::{load_data, run_experiment};
use crate::output::emit_outputs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_ALL_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "confair", version, about = "Fairness-constrained kernel SVM experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validate, train and evaluate every configured cell.
    Run(Common),
    /// Train the baseline and write permutation importances only.
    Rank(Common),
    /// Load the configured dataset and print its shape and group counts.
    ValidateData(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// `key=value`, value parsed as JSON or else taken as a string. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

fn pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

fn threads_from_env() -> Option<usize> {
    std::env::var("CONFAIR_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (common, kind) = match &cli.command {
        Command::Run(c) => (c, "run"),
        Command::Rank(c) => (c, "rank"),
        Command::ValidateData(c) => (c, "validate-data"),
    };
    let cfg = match ExperimentConfig::load(&common.config, &common.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let data = match load_data(&cfg) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DATA;
        }
    };

    if kind == "validate-data" {
        let mut report = serde_json::json!({
            "dataset": data.paths.name,
            "train": DataSummary::of(&data.train),
            "feature_names": data.encoding.feature_names,
        });
        if let Some(t) = &data.test {
            report["test"] = serde_json::to_value(DataSummary::of(t)).unwrap_or_default();
        }
        println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
        return EXIT_OK;
    }

    let rank_only = kind == "rank";
    let outcome = pool(threads_from_env()).install(|| run_experiment(&cfg, &data, rank_only));
    match emit_outputs(&outcome, &cfg, &cfg.output_dir, !rank_only) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing outputs: {e:#}");
            return EXIT_DATA;
        }
    }
    let failed = if rank_only { outcome.rankings().is_empty() } else { outcome.all_failed() };
    if failed {
        eprintln!("error: every cell failed");
        return EXIT_ALL_FAILED;
    }
    println!("wrote outputs to {}", cfg.output_dir.display());
    EXIT_OK
}
