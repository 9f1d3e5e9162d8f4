//! Driver behind the `hyperball` binary.
//!
//! Arguments are parsed into a [`RunConfig`]; [`run`] executes it and returns
//! the exit code together with the rendered output, so tests can drive the
//! tool without spawning a process.

pub mod commands;
pub mod io;
pub mod suite;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hyperball_core::quadrature::QuadratureSpec;
use hyperball_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable input or invalid parameters: exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computation failed after the configuration was accepted: exit code 1.
    #[error("{0}")]
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::BadShape
            | Error::NotInGroup { .. }
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::OutsideBall { .. }
            | Error::NotHyperbolic(_)
            | Error::OddWeightVector(_) => CliError::Config(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hyperball", version, about = "Numerics for complex hyperbolic space in the ball model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Radial quadrature nodes.
    #[arg(long, global = true)]
    pub quad_rad: Option<usize>,
    /// Angular quadrature nodes.
    #[arg(long, global = true)]
    pub quad_ang: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Check that a matrix file lies in U(n,1) or SU(n,1).
    Validate { file: PathBuf },
    /// Spectral class, eigenvectors and normalizer of a matrix.
    Classify { file: PathBuf },
    /// Legendrian residual and Bohr-Sommerfeld values of a torus.
    BsCheck {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Hyperbolic element to use instead of the normal form.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Gram matrix, reproducing property and kernel series at weight k.
    KernelCheck {
        #[arg(long)]
        k: u32,
    },
    /// Partial sums of the relative Poincare series.
    Series {
        /// Lattice config JSON: {generators, max_word_length, dedup_tol}.
        #[arg(long)]
        spec: PathBuf,
        /// Base point as "re,im,re,im".
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Word length to enumerate; overrides the config.
        #[arg(long)]
        shells: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Index of gamma_0 among the listed generators.
        #[arg(long, default_value_t = 0)]
        gamma0: usize,
        /// Emit CSV rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Residue coefficients and the constant of the torus integral.
    Constants {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
    },
    /// Run every invariant and print a pass/fail table.
    Suite {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Pass/fail thresholds of the single-run commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub group: f64,
    pub legendrian: f64,
    pub bs_value: f64,
    pub gram: f64,
    pub reproducing: f64,
    pub kernel_series: f64,
    pub constant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            group: hyperball_core::hermitian::EPS_GRP,
            legendrian: 1e-8,
            bs_value: 1e-6,
            gram: 1e-4,
            reproducing: 1e-3,
            kernel_series: 1e-8,
            constant: 1e-3,
        }
    }
}

impl Tolerances {
    fn all_positive(&self) -> bool {
        [
            self.group,
            self.legendrian,
            self.bs_value,
            self.gram,
            self.reproducing,
            self.kernel_series,
            self.constant,
        ]
        .iter()
        .all(|t| *t > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Node counts given on the command line; each command has its own default.
    pub quad_rad: Option<usize>,
    pub quad_ang: Option<usize>,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        RunConfig {
            command: cli.command,
            quad_rad: cli.quad_rad,
            quad_ang: cli.quad_ang,
            tolerances: Tolerances::default(),
            output: cli.out,
        }
    }

    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            quad_rad: None,
            quad_ang: None,
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    /// Quadrature from the flags, falling back to `default`.
    pub fn quadrature(&self, default: QuadratureSpec) -> Result<QuadratureSpec, CliError> {
        let spec = QuadratureSpec {
            n_rad: self.quad_rad.unwrap_or(default.n_rad),
            n_ang: self.quad_ang.unwrap_or(default.n_ang),
            tol: default.tol,
        };
        if spec.n_rad < 2 || spec.n_ang < 2 {
            return Err(CliError::Config("quadrature needs at least 2 nodes per axis".into()));
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !self.tolerances.all_positive() {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Rendered output and pass/fail verdict of a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Text for standard output (empty when written to `--out`).
    pub stdout: String,
    pub stderr: String,
}

pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    match &config.command {
        Command::Validate { file } => commands::validate(config, file),
        Command::Classify { file } => commands::classify(config, file),
        Command::BsCheck { k, l, lambda, matrix } => commands::bs_check(config, *k, *l, *lambda, matrix.as_deref()),
        Command::KernelCheck { k } => commands::kernel_check(config, *k),
        Command::Series {
            spec,
            z,
            shells,
            k,
            l,
            gamma0,
            csv,
        } => commands::series(config, spec, z, *shells, *k, *l, *gamma0, *csv),
        Command::Constants { k, l, lambda } => commands::constants(config, *k, *l, *lambda),
        Command::Suite { seed, json } => commands::suite(*seed, *json),
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    match execute(config) {
        Ok(report) => {
            let code = if report.passed { 0 } else { 1 };
            match &config.output {
                Some(path) => match std::fs::write(path, &report.text) {
                    Ok(()) => Outcome {
                        code,
                        stdout: String::new(),
                        stderr: String::new(),
                    },
                    Err(e) => Outcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("cannot write {}: {e}\n", path.display()),
                    },
                },
                None => Outcome {
                    code,
                    stdout: report.text,
                    stderr: String::new(),
                },
            }
        }
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Size the global pool from `HYPERBALL_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HYPERBALL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("HYPERBALL_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
