//! Library face of the `qpic` scenario runner: configuration parsing,
//! scenario execution, and output writing, kept callable from tests.

pub mod config;
pub mod scenarios;

use std::path::Path;

use qpic_core::error::{Error, Result};

pub use config::{ExperimentConfig, Scenario};
pub use scenarios::{RunBundle, run};

/// Resolve the effective seed: CLI flag, then the `QPIC_SEED` environment
/// variable, then the config value.
pub fn resolve_seed(cli_seed: Option<u64>, config: &ExperimentConfig) -> Result<u64> {
    if let Some(seed) = cli_seed {
        return Ok(seed);
    }
    match std::env::var("QPIC_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|e| Error::Validation(format!("QPIC_SEED is not a u64: {e}"))),
        Err(_) => Ok(config.run.seed),
    }
}

/// Execute a scenario and write `records.csv`, `summary.json` and any
/// scenario-specific extra files into `out_dir`.
pub fn run_to_directory(
    scenario: Scenario,
    config: &ExperimentConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<RunBundle> {
    let bundle = run(scenario, config, seed)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("records.csv"), &bundle.records_csv)?;
    let mut summary_text = serde_json::to_string_pretty(&bundle.summary)?;
    summary_text.push('\n');
    std::fs::write(out_dir.join("summary.json"), summary_text)?;
    for (name, contents) in &bundle.extra_files {
        std::fs::write(out_dir.join(name), contents)?;
    }
    Ok(bundle)
}
