//! `knn-scaling`: run the series, quadrature and Monte Carlo routes from the
//! command line and emit CSV or JSON tables.
//!
//! Exit codes: 0 on success, 1 when a computation fails, 2 on bad usage.

mod commands;
mod config;
mod output;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

/// Bad flags, config or grid.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Compute(knn_scaling::Error),
    Io(std::io::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Self::Usage(e)
    }
}

impl From<knn_scaling::Error> for Failure {
    fn from(e: knn_scaling::Error) -> Self {
        Self::Compute(e)
    }
}

fn dispatch(cli: config::Cli) -> Result<(), Failure> {
    let (cfg, print_only) = config::resolve(cli)?;
    if print_only {
        println!("{}", cfg.canonical_json());
        return Ok(());
    }
    let bytes = commands::run(&cfg)?.render(cfg.format);
    match &cfg.out {
        Some(path) => output::write_atomic(path, &bytes).map_err(Failure::Io),
        None => std::io::stdout().write_all(&bytes).map_err(Failure::Io),
    }
}

fn main() -> ExitCode {
    let cli = match config::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
