use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pavl::config;
use pavl::pipeline::{fit, pareto, report, simulate};
use pavl::{Error, Result};
use pavl_core::distribution::AggregateWarning;

#[derive(Parser)]
#[command(name = "pavl", version, about = "Probabilistically balanced AVL tree experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write runs.csv, aggregate.csv and manifest.txt.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override a config key, e.g. `--set runs_per_point=100`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Worker threads; defaults to PAVL_THREADS or the processor count.
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall-clock time per run in elapsed_ms.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        force: bool,
    },
    /// Fit the rotation, interaction and residual models.
    Fit {
        #[arg(long)]
        aggregate: PathBuf,
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `reference` (the published f(p)) or `fitted`.
        #[arg(long, default_value = "reference")]
        residual_base: fit::ResidualBase,
        #[arg(long)]
        force: bool,
    },
    /// Normalized frontiers, efficiency curves and knees per tree size.
    Pareto {
        #[arg(long)]
        aggregate: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = pavl_core::pareto::DEFAULT_THRESHOLD_FRACTION)]
        threshold: f64,
        /// Minimum normalized rotation increment per efficiency step.
        #[arg(long, default_value_t = pavl_core::pareto::DEFAULT_MIN_ROT_STEP)]
        min_rot_step: f64,
        #[arg(long)]
        force: bool,
    },
    /// Summarize fits.json and knees.csv next to the published values.
    Report {
        /// Directory holding the fit and pareto outputs.
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write summary.txt; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

fn threads_from_env() -> Result<usize> {
    match std::env::var("PAVL_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid PAVL_THREADS `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config: path,
            out,
            overrides,
            threads,
            timing,
            force,
        } => {
            let cfg = config::load(&path, &overrides)?;
            let threads = match threads {
                Some(t) => t,
                None => threads_from_env()?,
            };
            let opts = simulate::SimulateOptions { threads, timing, force };
            for w in simulate::simulate(&cfg, &out, &opts)? {
                let AggregateWarning::RunCountMismatch { n, p, expected, got } = w;
                eprintln!("warning: n = {n}, p = {p}: expected {expected} runs, got {got}");
            }
        }
        Command::Fit {
            aggregate,
            runs,
            out,
            residual_base,
            force,
        } => {
            fit::fit(&aggregate, &runs, &out, residual_base, force)?;
        }
        Command::Pareto {
            aggregate,
            out,
            bins,
            window,
            threshold,
            min_rot_step,
            force,
        } => {
            let opts = pareto::ParetoOptions {
                bins,
                window,
                threshold,
                min_rot_step,
                force,
            };
            for f in pareto::pareto(&aggregate, &out, &opts)? {
                if f.merged_bins > 0 {
                    eprintln!("warning: n = {}: {} empty log-p bins merged", f.n, f.merged_bins);
                }
            }
        }
        Command::Report { input, out, force } => {
            let out = out.unwrap_or_else(|| input.clone());
            report::report(&input, &out, force)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
