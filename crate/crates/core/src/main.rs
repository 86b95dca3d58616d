use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gibbslab::experiment::config::{load_simulation_input, SimulationSpec};
use gibbslab::experiment::report::OutDir;
use gibbslab::experiment::validate::{self, ValidateOptions};
use gibbslab::experiment::{analyze, curves, sharpness, simulate, ExperimentConfig};
use gibbslab::par::{set_thread_limit, Execution};

/// Exact variances, rates and simulations for two-component Gibbs samplers.
#[derive(Parser)]
#[command(name = "gibbslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON). Defaults to the builtin binary06 target.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Runs only validation checks whose group or name matches.
    #[arg(long, global = true)]
    filter: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Variance, rate and ordering reports.
    Analyze,
    /// Monte Carlo replicates with batch-means estimates.
    Simulate,
    /// k-curves, optimal r and exact distance curves.
    Curves,
    /// Runs the built-in invariant suite.
    Validate {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Searches for a function attaining the k1 bound.
    Sharpness,
}

const DEFAULT_SIM_T: usize = 100_000;

fn load(path: Option<&Path>, builtin: &str) -> gibbslab::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::for_builtin(builtin)),
    }
}

fn run(cli: Cli) -> gibbslab::Result<bool> {
    let exec = Execution::default();
    match cli.command {
        Command::Validate { inject_fault } => {
            let report = validate::run(cli.filter.as_deref(), &ValidateOptions { inject_fault, exec })?;
            print!("{}", report.table());
            let mut out = OutDir::create(&cli.out)?;
            out.write_json("validate.json", &report)?;
            Ok(report.passed)
        }
        Command::Analyze => {
            let mut cfg = load(cli.config.as_deref(), "binary06")?;
            if let (Some(seed), Some(sim)) = (cli.seed, cfg.simulation.as_mut()) {
                sim.seed = seed;
            }
            let mut out = OutDir::create(&cli.out)?;
            analyze::run(&cfg, &mut out, exec)?;
            report_written(&out);
            Ok(true)
        }
        Command::Simulate => {
            let mut cfg = match cli.config.as_deref() {
                Some(p) => load_simulation_input(p)?,
                None => ExperimentConfig::for_builtin("binary06"),
            };
            let sim = cfg.simulation.get_or_insert(SimulationSpec { t: DEFAULT_SIM_T, seed: 0, replicates: 1, batch_len: None });
            if let Some(seed) = cli.seed {
                sim.seed = seed;
            }
            let mut out = OutDir::create(&cli.out)?;
            simulate::run(&cfg, &mut out, exec)?;
            report_written(&out);
            Ok(true)
        }
        Command::Curves => {
            let cfg = load(cli.config.as_deref(), "binary06")?;
            let mut out = OutDir::create(&cli.out)?;
            curves::run(&cfg, &mut out, exec)?;
            report_written(&out);
            Ok(true)
        }
        Command::Sharpness => {
            let cfg = load(cli.config.as_deref(), "near_reducible")?;
            let mut out = OutDir::create(&cli.out)?;
            sharpness::run(&cfg, &mut out)?;
            report_written(&out);
            Ok(true)
        }
    }
}

fn report_written(out: &OutDir) {
    for path in out.written() {
        println!("wrote {}", path.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("GIBBSLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        set_thread_limit(n);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_assumption_violation() { 2 } else { 1 })
        }
    }
}
