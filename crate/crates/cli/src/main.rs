//! `touchauth`: touch-dynamics authentication from raw logs to reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use touchauth::Execution;

/// Exit status for usage and configuration errors.
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 1;

#[derive(Parser)]
#[command(name = "touchauth", version, about = "Multi-finger touch-dynamics authentication pipeline")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Run every stage on the calling thread
    #[arg(long, global = true)]
    sequential: bool,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Only print errors
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OrderArg {
    /// Column order for logs without a header row, comma-separated
    #[arg(long)]
    field_order: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean raw logs; writes cleaned logs and diagnostics
    Ingest {
        /// Log files or directories of `*.txt` logs
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        order: OrderArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute gesture vectors from `<user>_<game>.txt` logs
    Featurize {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        order: OrderArg,
        #[arg(long, default_value_t = touchauth::windowing::DEFAULT_WINDOW)]
        window: usize,
        /// Shuffle samples with this seed before windowing
        #[arg(long)]
        shuffle_rows: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a balanced, split dataset for one target user
    Dataset {
        /// Gesture vector CSV from `featurize`
        #[arg(long, required = true)]
        vectors: Vec<PathBuf>,
        #[arg(long)]
        user: String,
        /// Keep only vectors from this game
        #[arg(long)]
        game: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one classifier on a dataset CSV
    Train {
        /// Training CSV from `dataset`
        #[arg(long)]
        data: PathBuf,
        /// nn, xgb or svc
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON hyperparameters (`mlp`, `gbt`, `svc` sections)
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained model on a test CSV
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long)]
        game: String,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge per-user metric rows into a grouped report
    Report {
        /// Metric CSVs from `evaluate` or earlier reports
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// model, game or model-game
        #[arg(long, default_value = "model-game")]
        group_by: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate synthetic logs from a profile set
    Synth {
        /// Profile set JSON
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        n_events: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage from one config file
    Pipeline {
        /// Pipeline config, or a manifest from an earlier run to replay
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        shuffle_rows: Option<u64>,
        /// Comma-separated model list, e.g. `nn,xgb`
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        order: OrderArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose, cli.quiet);
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(EXIT_USAGE);
    }
    let jobs = cli.jobs;
    let result = exec.with_jobs(jobs, || commands::dispatch(cli.command, exec, jobs));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}
