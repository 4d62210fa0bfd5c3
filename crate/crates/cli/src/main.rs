//! `dirinfo-mac`: load channel specs, run computations, write CSV and JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 resource bound.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// The computation ran but a checked property failed.
    Verification(String),
    Core(dirinfo_mac::Error),
    Input(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Core(e) if e.is_resource_bound() => 3,
            Failure::Core(_) | Failure::Input(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Input(m) => f.write_str(m),
        }
    }
}

impl From<dirinfo_mac::Error> for Failure {
    fn from(e: dirinfo_mac::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot set up {t} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
