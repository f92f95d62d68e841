use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fiat_market_cli::{cmd_run, cmd_sweep, cmd_verify, Options};

/// Agent-based simulator of price formation in a fiat-money economy.
///
/// Exit codes: 0 ok, 1 invalid config, 2 I/O failure, 3 attractor
/// comparison failed, 4 invariant violated.
#[derive(Debug, Parser)]
#[command(name = "fiatsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its trajectory and trades.
    Run(Flags),
    /// Run every (start price, seed) pair and compare the settled prices.
    Sweep(Flags),
    /// Audit every invariant along a run and check it replays identically.
    Verify(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Key-value config file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Use this seed instead of the configured seeds.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override n_iterations.
    #[arg(long, value_name = "N")]
    iterations: Option<u64>,
    /// Also write SVG charts.
    #[arg(long)]
    svg: bool,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

impl From<Flags> for Options {
    fn from(f: Flags) -> Self {
        Options {
            config: f.config,
            out: f.out,
            seed: f.seed,
            iterations: f.iterations,
            svg: f.svg,
            force: f.force,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(f) => cmd_run(&f.into()),
        Command::Sweep(f) => cmd_sweep(&f.into()),
        Command::Verify(f) => cmd_verify(&f.into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
