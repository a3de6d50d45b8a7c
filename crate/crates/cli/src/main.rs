use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qpic_cli::{ExperimentConfig, Scenario, resolve_seed, run_to_directory};

/// Chip-fibre-chip photonic interconnect simulator.
#[derive(Parser, Debug)]
#[command(name = "qpic", version, about)]
struct Cli {
    /// Scenario to run.
    #[arg(value_enum)]
    scenario: Scenario,

    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Random seed (falls back to $QPIC_SEED, then the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for records.csv and summary.json.
    #[arg(long, default_value = "qpic-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match ExperimentConfig::from_json(&text) {
                Ok(config) => config,
                Err(e) => return fail(e),
            },
            Err(e) => return fail(e.into()),
        },
        None => ExperimentConfig::default(),
    };
    let seed = match resolve_seed(cli.seed, &config) {
        Ok(seed) => seed,
        Err(e) => return fail(e),
    };
    match run_to_directory(cli.scenario, &config, seed, &cli.out) {
        Ok(bundle) => {
            println!("{}", serde_json::to_string_pretty(&bundle.summary).unwrap());
            eprintln!("wrote {}", cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: qpic_core::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
