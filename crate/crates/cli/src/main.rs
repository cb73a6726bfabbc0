use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use graphscale_cli::runner::{EXIT_IO, EXIT_VALIDATION};
use graphscale_cli::{run_experiment, Command, ExperimentConfig};

/// Invariant graphs, pressure zeros and stability-index scaling of driven concave skew products.
#[derive(Parser)]
#[command(name = "graphscale", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "GRAPHSCALE_THREADS")]
    threads: Option<usize>,
    /// Overrides `compute.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.compute.seed = seed;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = run_experiment(&cfg, cli.command, &out);
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.manifest).expect("manifest serializes")
    );
    ExitCode::from(outcome.code as u8)
}
