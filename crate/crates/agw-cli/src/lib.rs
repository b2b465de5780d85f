//! Batch command-line surface for AGW alignment: data ingestion, solver
//! invocation, metric reporting and hyperparameter sweeps.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a solver did not
//! converge (partial outputs are still written).

pub mod commands;
pub mod config;
pub mod io;
pub mod report;

use clap::Parser;

use commands::{align, dist, hda, prep, sweep, EXIT_INVALID};

#[derive(Debug, Parser)]
#[command(
    name = "agw",
    version,
    about = "Augmented Gromov-Wasserstein alignment: solvers, metrics, preprocessing, sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Solve GW, COOT or AGW on a pair of data matrices.
    Dist(dist::DistArgs),
    /// Solve, project, and score the alignment (FOSCTTM, matching accuracy).
    Align(align::AlignArgs),
    /// Heterogeneous domain adaptation with label propagation.
    Hda(hda::HdaArgs),
    /// Hyperparameter grid sweep with deterministic table output.
    Sweep(sweep::SweepArgs),
    /// Normalize data, build distance matrices, convert matrix formats.
    Prep(prep::PrepArgs),
}

/// Parses the command line and runs the command, returning the process
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors, matching EXIT_INVALID
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Dist(args) => dist::run(args),
        Command::Align(args) => align::run(args),
        Command::Hda(args) => hda::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Prep(args) => prep::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    }
}
