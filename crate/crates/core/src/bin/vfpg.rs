use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vfpg::config::{ExperimentConfig, ExperimentKind};
use vfpg::experiment::run_experiment;

#[derive(Parser)]
#[command(name = "vfpg", about = "Variational path-integral generator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and report its free energy
    Train(Common),
    /// Propagator scan over x_f, trace-normalized
    Scan(Common),
    /// Ground-state density from the diagonal kernel
    GroundState(Common),
    /// Action / log-likelihood scatter diagnostic during training
    Diagnose(Common),
    /// Exact reference solutions only, no training
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `seed` from the config file
    #[arg(long)]
    seed: Option<u64>,
}

fn run(kind: ExperimentKind, args: Common) -> vfpg::Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| vfpg::Error::io(&args.config, e))?;
    let mut cfg = ExperimentConfig::parse_as(&text, kind)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    run_experiment(&cfg, &args.out)
}

fn main() -> ExitCode {
    let (kind, args) = match Cli::parse().command {
        Command::Train(a) => (ExperimentKind::Train, a),
        Command::Scan(a) => (ExperimentKind::Scan, a),
        Command::GroundState(a) => (ExperimentKind::GroundState, a),
        Command::Diagnose(a) => (ExperimentKind::Diagnose, a),
        Command::Oracle(a) => (ExperimentKind::Oracle, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
