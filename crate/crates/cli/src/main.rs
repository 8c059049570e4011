use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmab_cli::{execute, CliError, ExperimentConfig, Mode, Overrides, Preset};

#[derive(Parser)]
#[command(name = "rmab", version, about = "Probe scheduling experiments for networks under stealthy attack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whittle index table of every component.
    Index(Options),
    /// Monte Carlo cost trajectories per policy.
    Simulate(Options),
    /// Exact expected cost of the whittle and myopic policies.
    Evaluate(Options),
    /// Optimal finite-horizon cost against the index and myopic policies.
    Oracle(Options),
    /// Optimal subsidy of the average-budget relaxation.
    Subsidy(Options),
    /// Map a queueing network and run the command named in its `mode`.
    Queueing(Options),
}

#[derive(Args)]
struct Options {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in reference experiment.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u64>,
    #[arg(long)]
    horizon: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(mode: Mode, opts: Options) -> Result<(), CliError> {
    let mut config = match (&opts.config, opts.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(preset)) => preset.config(),
        (None, None) => unreachable!("clap requires one source"),
    };
    Overrides {
        seed: opts.seed,
        replications: opts.replications,
        horizon: opts.horizon,
    }
    .apply(&mut config);
    let csv = execute(mode, &config)?;
    match opts.out {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, opts) = match cli.command {
        Command::Index(o) => (Mode::Index, o),
        Command::Simulate(o) => (Mode::Simulate, o),
        Command::Evaluate(o) => (Mode::Evaluate, o),
        Command::Oracle(o) => (Mode::Oracle, o),
        Command::Subsidy(o) => (Mode::Subsidy, o),
        Command::Queueing(o) => (Mode::Queueing, o),
    };
    match run(mode, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rmab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
