use std::path::Path;

use pavl_core::distribution::{aggregate, AggregateWarning};
use pavl_core::SweepConfig;
use sha2::{Digest, Sha256};

use crate::config;
use crate::csvio;
use crate::error::Result;
use crate::output::OutDir;
use crate::sweep::run_sweep;

pub const RUNS: &str = "runs.csv";
pub const AGGREGATE: &str = "aggregate.csv";
pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub threads: usize,
    pub timing: bool,
    pub force: bool,
}

pub fn config_hash(config: &SweepConfig) -> String {
    let digest = Sha256::digest(config::to_text(config).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest(config: &SweepConfig, records: usize) -> String {
    format!(
        "tool = pavl {}\nconfig_sha256 = {}\nmaster_seed = {}\nrecords = {records}\n\n[config]\n{}",
        env!("CARGO_PKG_VERSION"),
        config_hash(config),
        config.master_seed,
        config::to_text(config),
    )
}

/// Runs the sweep described by `config` and writes runs, aggregate and
/// manifest files into `out`.
pub fn simulate(config: &SweepConfig, out: &Path, opts: &SimulateOptions) -> Result<Vec<AggregateWarning>> {
    let dir = OutDir::new(out, opts.force);
    dir.prepare(&[RUNS, AGGREGATE, MANIFEST])?;
    let records = run_sweep(config, opts.threads, opts.timing)?;
    let (points, warnings) = aggregate(&records, Some(config.runs_per_point));
    dir.write(RUNS, &csvio::runs_csv(&records))?;
    dir.write(AGGREGATE, &csvio::aggregate_csv(&points))?;
    dir.write(MANIFEST, &manifest(config, records.len()))?;
    Ok(warnings)
}
