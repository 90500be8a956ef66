//! Command-line frontend: argument parsing, input files and run reports.

mod args;
mod commands;
pub mod report;
pub mod selftest;

use std::ffi::OsString;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

pub use args::Cli;
use report::RunReport;

/// Default seed of the random suites.
pub const DEFAULT_SEED: u64 = 11;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fcl_core::Error),

    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    /// serde_json's message carries the line and column.
    #[error("malformed JSON in {what}: {source}")]
    Json { what: String, source: serde_json::Error },

    #[error("{0}")]
    Usage(String),

    #[error("self-test failed: {0}")]
    SelftestFailed(String),
}

impl CliError {
    /// 1 for input errors, 2 for mathematical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 2,
            CliError::SelftestFailed(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a run printed and how it exited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI, honouring `FCL_SEED`.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env_seed(argv, std::env::var("FCL_SEED").ok())
}

/// Runs the CLI with an explicit value for `FCL_SEED`.
pub fn run_with_env_seed<I, T>(argv: I, env_seed: Option<String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let command: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let json = cli.json;
    let start = Instant::now();
    match execute(&cli, env_seed.as_deref()) {
        Ok(out) => {
            let timing = cli.timing.then(|| start.elapsed().as_millis());
            let failure = out.failure.clone();
            let raw = out.raw.clone();
            let report = RunReport::new(command, out, timing);
            let stdout = match (json, raw) {
                (true, _) => report.to_json(),
                (false, Some(raw)) => raw,
                (false, None) => report.to_human(),
            };
            match failure {
                None => Outcome {
                    code: 0,
                    stdout,
                    stderr: String::new(),
                },
                Some(f) => {
                    let e = CliError::SelftestFailed(f);
                    Outcome {
                        code: e.exit_code(),
                        stdout,
                        stderr: format!("error: {e}\n"),
                    }
                }
            }
        }
        Err(e) => {
            let code = e.exit_code();
            let stdout = if json {
                report::error_json(&command, &e, code)
            } else {
                String::new()
            };
            Outcome {
                code,
                stdout,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn execute(cli: &Cli, env_seed: Option<&str>) -> CliResult<commands::Output> {
    let seed = match env_seed.filter(|s| !s.trim().is_empty()) {
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FCL_SEED must be an unsigned integer, got {s:?}")))?,
        None => cli.seed,
    };
    let tol = fcl_core::exactgeom::parse_q(&cli.tol)?;
    if tol <= fcl_core::exactgeom::q(0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let ctx = commands::Context { seed, tol };
    commands::dispatch(&cli.command, &ctx)
}
