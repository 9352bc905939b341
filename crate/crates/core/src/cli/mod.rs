//! The `infoflow` command line.
//!
//! Every command loads one system file and writes a single report. JSON
//! reports are wrapped in an [`Envelope`] that records the tool version and
//! the fully resolved [`RunConfig`], so identical inputs and flags give
//! byte-identical output.
//!
//! Exit codes: 0 success, 1 error, 2 undecided (unknown edges, inconclusive
//! invariance), 3 negative finding (graphs differ, well-posedness
//! counterexample).

mod commands;
mod write;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use write::{write_atomic, Envelope};

use crate::flow::DEFAULT_MAX_LEN;
use crate::lie::DEFAULT_DEPTH;
use crate::model::ModelError;
use crate::order::{OrderError, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE};
use crate::sim::{SimError, DEFAULT_DT};

pub const SEED_ENV: &str = "INFOFLOW_SEED";

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_NEGATIVE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "infoflow",
    version,
    about = "Information flow analysis of decentralized control systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information flow graph, loops and classification.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Report the coordinate-dependent naive graph instead.
        #[arg(long)]
        naive: bool,
    },
    /// Information flow complex.
    Complex {
        #[command(flatten)]
        common: Common,
    },
    /// Compare flow graphs across a change of coordinates.
    Invariance {
        #[command(flatten)]
        common: Common,
        /// Name of a change declared in the file, or `identity`.
        #[arg(long)]
        change: Option<String>,
        /// Compare naive graphs instead.
        #[arg(long)]
        naive: bool,
        /// Compare against a second description of the same system.
        #[arg(long, conflicts_with = "change")]
        against: Option<PathBuf>,
    },
    /// Compare two functions by their isolevel sets.
    Order {
        #[command(flatten)]
        common: Common,
        /// Function, observation, `deltaN` or objective name.
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Compare the sets where two objectives hold.
        #[arg(long)]
        superlevel: bool,
        /// Sampling interval override, `VAR=LO:HI`; repeatable.
        #[arg(long = "box", value_name = "VAR=LO:HI")]
        boxes: Vec<String>,
        #[arg(long, value_name = "NAME=VALUE")]
        mu: Vec<String>,
        /// CSV sample set with a header row of variable names.
        #[arg(long)]
        samples_file: Option<PathBuf>,
    },
    /// Integrate the closed loop.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// CSV with a header of state variables and one row.
        #[arg(long)]
        x0_file: Option<PathBuf>,
        #[arg(long, value_name = "NAME=VALUE")]
        mu: Vec<String>,
        /// Keep every Nth step in the written trajectory.
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Check that local objectives imply the global one.
    Wellposed {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NAME=VALUE")]
        mu: Vec<String>,
        #[arg(long)]
        samples_file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// System file (`.sys` or `.json`).
    pub file: PathBuf,
    /// Bracket depth for the Lie closure.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Longest information loop searched.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    /// Sampling seed; `INFOFLOW_SEED` takes precedence.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Relative tolerance for level-set equality, absolute for objectives.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Dot,
    Json,
    Csv,
}

/// Resolved settings embedded in every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: String,
    pub depth: usize,
    pub max_len: usize,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superlevel: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<BTreeMap<String, [f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
}

impl RunConfig {
    fn new(command: &str, c: &Common, seed: u64) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            input: c.file.display().to_string(),
            depth: c.depth,
            max_len: c.max_len,
            seed,
            samples: c.samples,
            tolerance: c.tol,
            format: c.format,
            naive: None,
            change: None,
            against: None,
            lhs: None,
            rhs: None,
            superlevel: None,
            domain: None,
            mu: None,
            samples_file: None,
            x0_file: None,
            dt: None,
            t_end: None,
            stride: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Seed from `INFOFLOW_SEED` if set, otherwise the flag value.
fn resolve_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(flag),
    }
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    commands::dispatch(cli.command)
}

/// Parses `args` (program name first), runs, and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
