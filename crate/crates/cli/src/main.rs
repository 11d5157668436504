//! `windcast`: ingest LCD files, train and compare stacked LSTM/GRU models.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "windcast", version, about = "Stacked LSTM/GRU wind-speed forecasting on NOAA LCD data")]
struct Cli {
    /// JSON run configuration; relative paths inside it resolve against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for weight initialization (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for grid cells and gradient probes; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and clean one LCD CSV file, writing the cleaned CSV and a provenance report.
    Ingest {
        /// LCD CSV export.
        input: PathBuf,
    },
    /// Train one model on the configured dataset or sine benchmark.
    Train,
    /// Train all four variants on every configured dataset and tabulate them.
    Grid,
    /// Finite-difference check of all four variants at a small size.
    Gradcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Data,
    Divergence,
}

impl ErrorKind {
    fn code(self) -> u8 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Data => 2,
            ErrorKind::Divergence => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Data => "data",
            ErrorKind::Divergence => "divergence",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<windcast::Error> for CliError {
    fn from(e: windcast::Error) -> Self {
        use windcast::Error as E;
        let kind = match &e {
            E::Shape { .. } | E::Parameter(_) | E::Config(_) => ErrorKind::Validation,
            E::Format(_) | E::Data(_) | E::Io { .. } => ErrorKind::Data,
            E::Divergence { .. } => ErrorKind::Divergence,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

fn report(e: &CliError) {
    let line = serde_json::json!({
        "error": e.kind.name(),
        "exit_code": e.kind.code(),
        "message": e.message.replace('\n', " "),
    });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            report(&CliError::validation(first.trim_start_matches("error: ")));
            return ExitCode::from(ErrorKind::Validation.code());
        }
    };
    let ov = config::Overrides {
        seed: cli.seed,
        out: cli.out,
        threads: cli.threads,
    };
    let result = match cli.command {
        Command::Ingest { input } => commands::ingest(cli.config.as_deref(), &ov, &input),
        Command::Train => commands::train(cli.config.as_deref(), &ov),
        Command::Grid => commands::grid(cli.config.as_deref(), &ov),
        Command::Gradcheck => commands::gradcheck(cli.config.as_deref(), &ov),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.kind.code())
        }
    }
}
