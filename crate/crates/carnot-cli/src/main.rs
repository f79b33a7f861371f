//! `carnot`: geodesics, classification, curvature reports, verification
//! suites and chart sweeps for rank-two Carnot groups.
//!
//! Exit codes: 0 ok, 2 usage, 3 integrator, 4 not ample or not
//! equiregular, 5 singular covector, 6 verification failed.

mod commands;
mod config;
mod error;

use clap::Parser;

use config::{Cli, Command, RunConfig};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::new(cli);
    let text = match cli.command {
        Command::Geodesic => commands::geodesic(&cfg)?,
        Command::Classify { .. } => commands::classify(&cfg)?,
        Command::Curvature => commands::curvature(&cfg)?,
        Command::Sweep { .. } => commands::sweep(&cfg)?,
        Command::Verify { .. } => {
            let (text, status) = commands::verify(&cfg)?;
            commands::emit(&cfg, &text)?;
            return status;
        }
    };
    commands::emit(&cfg, &text)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
