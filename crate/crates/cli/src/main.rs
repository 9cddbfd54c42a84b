use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracreg_cli::{cmd_design, cmd_poles, cmd_simulate};

/// Fractional-order PD/PI controller design and simulation.
#[derive(Parser)]
#[command(name = "fracreg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the closed loop and write a trajectory CSV.
    Simulate(Args),
    /// Design a controller for the requested poles and check stability.
    Design(Args),
    /// Find the closed-loop poles of a given controller.
    Poles(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(&a.config, a.out.as_deref()),
        Command::Design(a) => cmd_design(&a.config, a.out.as_deref()),
        Command::Poles(a) => cmd_poles(&a.config, a.out.as_deref()),
    };
    for path in &outcome.written {
        println!("{}", path.display());
    }
    if let Some(msg) = &outcome.diagnostic {
        eprintln!("fracreg: {msg}");
    }
    ExitCode::from(outcome.exit.code())
}
