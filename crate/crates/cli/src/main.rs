use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eigenforge::commands::execute;
use eigenforge::{CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "eigenforge", version, about = "Phase-estimation eigenstate generation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// |f(ω, j)| over a 0.01 grid of ω.
    KernelPlot(RunArgs),
    /// Lower bound on p′ against G, with crossing points.
    BoundPlot(RunArgs),
    /// Number-operator evolution on a Fock state.
    NumopFock(RunArgs),
    /// Coherent state filtered towards a Fock state.
    CoherentToFock(RunArgs),
    /// Squeezed coherent state under a displacement.
    DisplacementSqueezed(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    forced_j: Option<usize>,
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Self::KernelPlot(a) => (Experiment::KernelPlot, a),
            Self::BoundPlot(a) => (Experiment::BoundPlot, a),
            Self::NumopFock(a) => (Experiment::NumopFock, a),
            Self::CoherentToFock(a) => (Experiment::CoherentToFock, a),
            Self::DisplacementSqueezed(a) => (Experiment::DisplacementSqueezed, a),
        }
    }
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.experiment() != experiment {
        return Err(CliError::Config(format!(
            "config describes {} but the subcommand is {}",
            config.experiment().name(),
            experiment.name()
        )));
    }
    let config = config.with_overrides(args.forced_j, args.seed)?;
    let start = Instant::now();
    let written = execute(&config, &args.out)?;
    // Timing stays out of the files so reruns are byte-identical.
    eprintln!("{} finished in {:.3} s", experiment.name(), start.elapsed().as_secs_f64());
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let (experiment, args) = Cli::parse().command.split();
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eigenforge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
