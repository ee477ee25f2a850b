//! `ceuler`: runs experiments from JSON configs and writes CSV/SVG/JSON artifacts
//! plus a `manifest.json` into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

const DEFAULT_QUAD_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "ceuler", version, about = "Particle dynamics on singular planar domains")]
struct Cli {
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate m, q_m, Q_m, rho_m and classify the modulus.
    Modulus,
    /// Trace a domain boundary and report its residuals.
    Domain,
    /// Precompute the velocity field, integrate a trajectory and check rate bounds.
    Simulate,
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
}

#[derive(Subcommand)]
enum Verify {
    Lemma31,
    Folding,
}

/// Resolved global flags.
pub struct RunArgs {
    pub config: PathBuf,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub quad_tol: f64,
    pub quad_tol_override: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
    Io(String),
}

impl CliError {
    pub fn from_core(e: conformal_euler::Error) -> Self {
        use conformal_euler::Error as E;
        match e {
            E::Config(_) | E::InvalidModulus(_) | E::Construction(_) | E::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let config = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    if let Some(t) = cli.quad_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Config(format!("--quad-tol {t} must lie in (0, 1)")));
        }
    }
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    let args = RunArgs {
        config,
        seed: cli.seed,
        jobs: cli.jobs,
        quad_tol: cli.quad_tol.unwrap_or(DEFAULT_QUAD_TOL),
        quad_tol_override: cli.quad_tol,
    };
    let mut out = output::OutDir::create(&cli.out)?;
    let (name, outcome) = match cli.command {
        Command::Modulus => ("modulus", commands::modulus(&args, &mut out)?),
        Command::Domain => ("domain", commands::domain(&args, &mut out)?),
        Command::Simulate => ("simulate", commands::simulate(&args, &mut out)?),
        Command::Verify { what: Verify::Lemma31 } => ("verify lemma31", commands::lemma31(&args, &mut out)?),
        Command::Verify { what: Verify::Folding } => ("verify folding", commands::folding(&args, &mut out)?),
    };
    out.finish(name, &outcome.config, &args, outcome.pass)?;
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
