//! `trapwalk` command-line front end.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a computation cannot
//! meet its error guarantee, 1 on I/O failures. Records go to stdout (or
//! `--output`); diagnostics go to stderr.

mod args;
mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;
use trapwalk::env::EnvError;
use trapwalk::limit::LimitError;
use trapwalk::periodic::PeriodicError;
use trapwalk::stats::StatsError;
use trapwalk::survival::SurvivalError;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<SurvivalError> for CliError {
    fn from(e: SurvivalError) -> Self {
        match e {
            SurvivalError::TruncationTooCoarse { .. } => CliError::Numerical(e.to_string()),
            SurvivalError::Env(e) => e.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Io(m) => CliError::Io(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Survival(e) => e.into(),
            StatsError::Env(e) => e.into(),
            StatsError::Serialize(e) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<LimitError> for CliError {
    fn from(e: LimitError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PeriodicError> for CliError {
    fn from(e: PeriodicError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    if cli.format == args::Format::Text && !matches!(cli.command, Command::SampleEnv(_)) {
        return Err(CliError::Validation(
            "text output is only available for sample-env".into(),
        ));
    }
    let outcome = match &cli.command {
        Command::SampleEnv(a) => match commands::sample_env(a, cli.format, &mut out)? {
            Some(o) => o,
            None => {
                out.flush()?;
                return Ok(());
            }
        },
        Command::Survival(a) => commands::survival(a)?,
        Command::Lambda(a) => commands::lambda(a)?,
        Command::Confine(a) => commands::confine(a)?,
        Command::Fkg(a) => commands::fkg(a)?,
        Command::LimitSample(a) => commands::limit_sample(a)?,
        Command::LimitCdf(a) => commands::limit_cdf(a)?,
        Command::Phi(a) => commands::phi(a)?,
        Command::PhiPeriodic(a) => commands::phi_periodic_cmd(a)?,
        Command::Records(a) => commands::records(a)?,
        Command::Converge(a) => commands::converge(a, cli.format)?,
    };
    outcome.report.write(cli.format, &mut out)?;
    out.flush()?;
    match outcome.violation {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trapwalk {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
