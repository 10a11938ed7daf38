use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use robin_core::experiments::{check, default_config, run, Criterion, ExperimentConfig, ExperimentId};
use std::path::PathBuf;
use std::process::ExitCode;

/// Worker count for the grid pool; defaults to the number of cores.
const WORKERS_ENV: &str = "ROBIN_LAB_WORKERS";

#[derive(Parser)]
#[command(name = "robin-lab", version, about = "Robin Laplacian spectral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML configuration.
    Run {
        config: PathBuf,
        /// Artifact directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the verdicts of a summary from the CSV files next to it.
    Check { summary: PathBuf },
    /// List experiment ids.
    ListExperiments,
    /// Print the reference configuration of an experiment.
    Config { experiment: String },
}

fn print_criteria(criteria: &[Criterion]) {
    for c in criteria {
        println!(
            "{} {:<44} value={:<14.6e} target={:<12.4e} tol={:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tol
        );
    }
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{WORKERS_ENV}={v} is not a count"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    init_workers()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let (outcome, path) = run(&cfg, out.as_deref())?;
            let s = &outcome.summary;
            println!("{} -> {}", s.experiment, path.display());
            print_criteria(&s.criteria);
            for e in &s.errors {
                println!("ERROR at {}: {}", e.point, e.message);
            }
            if s.partial {
                println!("partial run: {} grid points failed", s.errors.len());
            }
            Ok(s.pass())
        }
        Command::Check { summary } => {
            let report = check(&summary).with_context(|| format!("checking {}", summary.display()))?;
            print_criteria(&report.recomputed);
            if report.consistent() {
                println!("summary consistent with tables");
            } else {
                println!("MISMATCH: {}", report.mismatches.join(", "));
            }
            Ok(report.consistent())
        }
        Command::ListExperiments => {
            for id in ExperimentId::ALL {
                println!("{:<24} {}", id.name(), id.description());
            }
            Ok(true)
        }
        Command::Config { experiment } => {
            let id: ExperimentId = experiment.parse()?;
            print!("{}", default_config(id).to_toml()?);
            Ok(true)
        }
    }
}
