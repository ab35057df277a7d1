//! `fft3d`: batch front-end for verification suites, table generation and
//! distributed-FFT simulation.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, configuration or
//! file error.

mod args;
mod config;
mod predict;
mod simulate;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use config::{ConfigFile, ExperimentConfig};

/// How a successful invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
}

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(cli: Cli) -> anyhow::Result<Status> {
    let file = match cli.command.config_path() {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let experiment = ExperimentConfig::resolve(&cli.command, file)?;
    match experiment {
        ExperimentConfig::Verify(c) => verify::run(&c),
        ExperimentConfig::Predict(c) => predict::run(&c),
        ExperimentConfig::Simulate(c) => simulate::run(&c),
        ExperimentConfig::Grid(c) => simulate::generate(&c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
