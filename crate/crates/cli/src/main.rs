use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slotguard::experiment::{
    emit_all, emit_event_log, emit_run_metrics, load_scenario, run_experiment_with, ExperimentSpec,
};
use slotguard::sim::{run_averaged_with, RunOptions, RNG_ALGORITHM};
use slotguard::{ConfigError, SimError};

/// Simulate reservation-based parking and compare buffer strategies.
#[derive(Parser)]
#[command(name = "slotguard", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario (for `run`) or experiment (for `sweep`) file.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long, env = "SLOTGUARD_OUT", default_value = "results")]
    out: PathBuf,
    /// Replaces the seed given in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write one event log per run.
    #[arg(long)]
    log_events: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replications of a single scenario.
    Run(RunArgs),
    /// Run an experiment sweep over buffer strategies.
    Sweep(RunArgs),
    /// Check a scenario or experiment file without running it.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
}

enum Failure {
    Config(ConfigError),
    Runtime(SimError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => Failure::Config(c),
            other => Failure::Runtime(other),
        }
    }
}

fn options(args: &RunArgs) -> RunOptions {
    RunOptions {
        log_events: args.log_events,
        check_invariants: true,
    }
}

fn run_scenario(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg = load_scenario(&args.spec)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let avg = run_averaged_with(&cfg, options(args))?;
    create_dir(&args.out)?;
    emit_run_metrics(&avg.runs, &args.out.join("runs.csv"))?;
    if args.log_events {
        write_logs(&args.out.join("events"), "", &avg.runs)?;
    }
    println!(
        "{} runs, seed {}, buffer {}, rng {RNG_ALGORITHM}",
        avg.runs.len(),
        cfg.seed,
        cfg.buffer.label()
    );
    println!(
        "no_park         mean {:9.4}  stddev {:9.4}",
        avg.no_park.mean, avg.no_park.stddev
    );
    println!(
        "no_reservation  mean {:9.4}  stddev {:9.4}",
        avg.no_reservation.mean, avg.no_reservation.stddev
    );
    println!("wrote {}", args.out.join("runs.csv").display());
    Ok(())
}

fn run_sweep(args: &RunArgs) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.base.seed = seed;
    }
    let table = run_experiment_with(&spec, options(args))?;
    let written = emit_all(&table, &args.out)?;
    if args.log_events {
        for cell in &table.cells {
            let prefix = format!("{}_{}_", cell.sweep_value, cell.strategy);
            write_logs(&args.out.join("events"), &prefix, &cell.result.runs)?;
        }
    }
    println!(
        "{} sweep: {} cells x {} runs, seed {}",
        table.kind.name(),
        table.cells.len(),
        table.runs,
        table.seed
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_logs(
    dir: &Path,
    prefix: &str,
    runs: &[slotguard::sim::RunRecord],
) -> Result<(), SimError> {
    create_dir(dir)?;
    for r in runs {
        emit_event_log(r, &dir.join(format!("{prefix}run{}.csv", r.run_index)))?;
    }
    Ok(())
}

/// Accepts either kind of file. A file with experiment-only keys is
/// checked as an experiment; anything else as a scenario.
fn validate(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let experiment_keys = [
        "kind",
        "strategies",
        "base",
        "population_values",
        "bad_fraction_values",
    ];
    let looks_like_experiment = text
        .parse::<toml::Table>()
        .map(|t| experiment_keys.iter().any(|k| t.contains_key(*k)))
        .unwrap_or(false);
    if looks_like_experiment {
        let spec = ExperimentSpec::from_toml_str(&text, path)?;
        println!(
            "{}: valid {} experiment ({} values x {} strategies)",
            path.display(),
            spec.kind.name(),
            spec.sweep_values().len(),
            spec.strategies.len()
        );
    } else {
        let cfg = slotguard::experiment::scenario_from_toml_str(&text, path)?;
        println!(
            "{}: valid scenario ({} vehicles, {} slots, buffer {})",
            path.display(),
            cfg.population,
            cfg.total_slots(),
            cfg.buffer.label()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run_scenario(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Validate { spec } => validate(spec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
