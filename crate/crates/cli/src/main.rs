//! Command-line entry point: coefficient computation, quadrature and RK4
//! trajectories, rigorous certification, blow-up classification, the
//! critical-amplitude estimate, and grid evaluation.
//!
//! Exit codes: 0 success or certified, 2 inconclusive/undetermined verdict,
//! 1 usage or runtime error.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod commands;
mod config;
mod output;

use commands::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let threads = match config::resolve_threads(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: failed to build thread pool: {e}");
            return ExitCode::from(1);
        }
    };

    let result = pool.install(|| match &cli.command {
        Command::Coeffs(args) => commands::run_coeffs(&cli, args, threads),
        Command::Quadrature(args) => commands::run_quadrature(&cli, args, threads),
        Command::Verify(args) => commands::run_verify(&cli, args, threads),
        Command::Classify(args) => commands::run_classify(&cli, args, threads),
        Command::EstimateAstar(args) => commands::run_estimate_astar(&cli, args, threads),
        Command::Evaluate(args) => commands::run_evaluate(&cli, args, threads),
        Command::Integrate(args) => commands::run_integrate(&cli, args, threads),
    });

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
