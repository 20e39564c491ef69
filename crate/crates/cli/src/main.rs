//! `treepark`: tables, bound certificates, simulations and checks for the
//! parking process on trees.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

/// Ways a run can end other than success, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files.
    Config(String),
    /// A bound could not be certified.
    Refused(String),
    /// An order comparison found a violation.
    Violation(String),
    /// A support, node or depth guard tripped.
    Resource(String),
    /// Anything else, including failed self-checks and I/O errors.
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Refused(_) => 3,
            Failure::Violation(_) => 4,
            Failure::Resource(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::Refused(m)
            | Failure::Violation(m)
            | Failure::Resource(m)
            | Failure::Other(m) => m,
        }
    }
}

impl From<treepark::Error> for Failure {
    fn from(e: treepark::Error) -> Self {
        if e.is_resource_guard() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run(args: Vec<String>) -> Result<(), Failure> {
    let args = config::expand(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Failure::Config(e.to_string().trim_end().to_string())),
    };
    commands::dispatch(cli, &args)
}

fn main() -> ExitCode {
    let args = match config::to_strings(std::env::args_os()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}
