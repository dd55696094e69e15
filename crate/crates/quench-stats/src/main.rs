//! `quench-stats`: batch front end over the library. One subcommand per
//! run; every run writes a manifest that can be fed back to --config to
//! reproduce the outputs bit for bit.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use quench_stats::cli::{load_config, run, CliOverrides};
use quench_stats::Error;

#[derive(Parser, Debug)]
#[command(
    name = "quench-stats",
    version,
    about = "Time statistics of observables after a small Hamiltonian quench"
)]
struct Args {
    /// modes | sim | charfun | universal | le | quasifree | exactdiag | scalingfit
    subcommand: String,

    /// JSON configuration (a previous run's manifest.json also works)
    #[arg(long)]
    config: PathBuf,

    /// Output directory (default: quench-out)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the config's top-level seed
    #[arg(long)]
    seed: Option<u64>,

    /// Global thread cap (falls back to QUENCH_STATS_THREADS)
    #[arg(long)]
    threads: Option<usize>,

    /// Table output format: csv | json
    #[arg(long)]
    format: Option<String>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn error_json(kind: &str, err: &dyn std::fmt::Display) -> String {
    serde_json::json!({"error": kind, "detail": err.to_string()}).to_string()
}

fn main() -> ExitCode {
    let args = Args::parse();

    let threads = args.threads.or_else(|| {
        std::env::var("QUENCH_STATS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let format = match args.format.as_deref().map(str::parse).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}", error_json("config-invalid", &e));
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}", error_json("config-invalid", &e));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let doc = match load_config(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}", error_json("config-invalid", &e));
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let overrides = CliOverrides {
        out_dir: args.out,
        seed: args.seed,
        format,
    };
    match run(&args.subcommand, &doc, &overrides) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ (Error::InvalidArgument(_) | Error::Json(_))) => {
            eprintln!("{}", error_json("config-invalid", &e));
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("{}", error_json("numerical-failure", &e));
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
