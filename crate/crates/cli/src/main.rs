use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use qmaxent::verification::DEFAULT_SEED;
use qmaxent_cli::{run_update, run_verify, EXIT_ERROR};

/// Maximum relative-entropy updating of distributions and density matrices.
#[derive(Parser)]
#[command(name = "qmaxent", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a classical, quantum or spin problem file and write a JSON report.
    Update {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every property check on seeded random instances.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Update { problem, out } => run_update(&problem, out.as_deref()),
        Command::Verify { seed, trials, out } => run_verify(seed, trials, out.as_deref()),
    };
    ExitCode::from(code as u8)
}
