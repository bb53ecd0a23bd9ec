//! Command-line frontend for `bergspec`.
//!
//! Exit codes: 0 success, 1 a verification check failed (the report is still
//! written), 2 invalid configuration, 3 quadrature failure.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod profile;
pub mod report;

use config::{ConfigFields, RunConfig};
use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Quadrature(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Quadrature(_) => EXIT_QUADRATURE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Quadrature(m) => write!(f, "quadrature failure: {m}"),
        }
    }
}

impl From<bergspec::Error> for Failure {
    fn from(e: bergspec::Error) -> Self {
        if e.is_quadrature_failure() {
            Failure::Quadrature(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bergspec",
    version,
    about = "Eigenvalue sequences and checks for quasi-radial Toeplitz operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommandArgs {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub fields: ConfigFields,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue sequence of a symbol on every atom up to the cap
    Gamma(CommandArgs),
    /// Brute-force matrix of the Toeplitz operator on the truncated basis
    Matrix(CommandArgs),
    /// Run verification checks selected by --suite
    Verify(CommandArgs),
    /// Joint spectrum atoms and multiplicities, with decay diagnostics for a symbol
    Spectrum(CommandArgs),
    /// Index splitting for a two-factor partition, with checks for a symbol
    Decompose(CommandArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &CommandArgs) {
        match self {
            Command::Gamma(a) => ("gamma", a),
            Command::Matrix(a) => ("matrix", a),
            Command::Verify(a) => ("verify", a),
            Command::Spectrum(a) => ("spectrum", a),
            Command::Decompose(a) => ("decompose", a),
        }
    }
}

pub fn resolve(args: &CommandArgs) -> Result<RunConfig, Failure> {
    let base = match &args.config {
        Some(path) => ConfigFields::load(path)?,
        None => ConfigFields::default(),
    };
    RunConfig::from_fields(base.merged(args.fields.clone()))
}

pub fn execute(name: &str, cfg: &RunConfig) -> Result<Report, Failure> {
    match name {
        "gamma" => commands::cmd_gamma(cfg),
        "matrix" => commands::cmd_matrix(cfg),
        "verify" => commands::cmd_verify(cfg),
        "spectrum" => commands::cmd_spectrum(cfg),
        "decompose" => commands::cmd_decompose(cfg),
        other => Err(Failure::Config(format!("unknown command {other}"))),
    }
}

/// Runs one command and writes its report; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, args) = cli.command.parts();
    let outcome = resolve(args).and_then(|cfg| {
        let report = execute(name, &cfg)?;
        let text = report.render(cfg.format);
        match &cfg.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("bergspec: one or more checks failed");
            EXIT_CHECK_FAILED
        }
        Err(f) => {
            eprintln!("bergspec: {f}");
            f.exit_code()
        }
    }
}

/// Caps the worker pool from `BERGSPEC_THREADS`.
pub fn configure_threads(value: Option<OsString>) -> Result<(), Failure> {
    let Some(v) = value else { return Ok(()) };
    let threads: usize = v
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Failure::Config(format!(
                "BERGSPEC_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}
