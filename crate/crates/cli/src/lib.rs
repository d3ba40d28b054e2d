//! Command-line driver: configuration files, seeded experiments, tables of
//! constants and the verification suites.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 for numerical
//! failures and failed checks.

use std::ffi::OsString;
use std::fmt;

pub mod app;
pub mod config;
pub mod output;
pub mod suites;

pub use config::{parse_config, serialize_config, ConfigError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

/// Environment variable that fixes the worker count. Results do not depend
/// on it.
pub const THREADS_ENV: &str = "TAPERFLOW_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Failure(String),
    /// Checks ran and some failed; the report has already been printed.
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(e: impl fmt::Display) -> CliError {
        CliError::Failure(format!("i/o error: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => EXIT_INVALID,
            CliError::Failure(_) | CliError::ChecksFailed(_) => EXIT_FAILURE,
        }
    }
}

impl From<taperflow_core::Error> for CliError {
    fn from(e: taperflow_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}

/// Worker count from [`THREADS_ENV`], or rayon's default.
pub fn configured_threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(CliError::Validation(format!(
                "{THREADS_ENV} must be a positive integer, got \"{v}\""
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::Parser;
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let words: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match app::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match configured_threads() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| app::execute(&cli, &words)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
