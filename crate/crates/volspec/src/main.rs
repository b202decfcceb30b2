use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use volspec::{run, Command, RunArgs};

/// Forward and inverse spectral solver for first-order integro-differential
/// operators on [0, π].
#[derive(Parser)]
#[command(name = "volspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the transformation kernel and sample e(x, λ).
    Forward(Common),
    /// Locate eigenvalues inside a search window.
    Spectrum(Common),
    /// Recover profiles from one or more spectra.
    Invert(Common),
    /// Check the identities relating two kernels on two grids.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON, or TOML with a .toml extension).
    #[arg(long)]
    config: PathBuf,
    /// Override the number of grid intervals.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized initial guesses.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Forward(c) => (Command::Forward, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Invert(c) => (Command::Invert, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    let args = RunArgs {
        config: common.config,
        grid_n: common.grid_n,
        out: common.out,
        seed: common.seed,
    };
    match run(command, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("volspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
