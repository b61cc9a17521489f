//! Front end for the `orlicz` binary: argument types, subcommands and
//! report output.
//!
//! Every run emits JSON lines. The first line records the configuration and
//! tool version; each following line is a [`Record`]. Nothing time-dependent
//! is written, so identical configurations give identical bytes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use orlicz_core::{Error, Record};
use serde::Serialize;

pub const TOOL: &str = "orlicz";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the default report directory.
pub const OUT_DIR_ENV: &str = "ORLICZ_OUT_DIR";

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "orlicz",
    version,
    about = "Orlicz sequence space embedding experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report file (JSON lines). Defaults to `$ORLICZ_OUT_DIR/<subcommand>.jsonl`,
    /// or standard output when the variable is unset.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Plot-ready CSV for commands that produce tables.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Seed for random samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Residual tolerance; a larger residual is a numeric failure.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Tables of M, M*, N and the levels t_n.
    Conjugate(ConjugateArgs),
    /// Luxemburg norm of a vector.
    Norm(NormArgs),
    /// Extremal values f*(n) with multipliers and KKT residuals.
    ExtremalScan(ScanArgs),
    /// Convex decomposition of a normalised non-increasing vector.
    Decompose(DecomposeArgs),
    /// Norm equivalence on random samples and the truncated-K check.
    EmbedVerify(EmbedArgs),
    /// Symbolic and definition-based derived sets, ranks, the ω check.
    Derive(DeriveArgs),
    /// Non-embedding witness and divergence report.
    Nonembed(NonembedArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Conjugate(_) => "conjugate",
            Command::Norm(_) => "norm",
            Command::ExtremalScan(_) => "extremal-scan",
            Command::Decompose(_) => "decompose",
            Command::EmbedVerify(_) => "embed-verify",
            Command::Derive(_) => "derive",
            Command::Nonembed(_) => "nonembed",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConjugateArgs {
    /// Function spec, e.g. `power:p=2`, `lt`, `linear`, `smooth(linear)`.
    pub spec: String,
    /// Number of levels t_1..t_n.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Rows in the function table.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NormArgs {
    pub spec: String,
    /// Comma-separated coordinates b_1, b_2, …
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub values: Vec<f64>,
    /// Rescale the argument so that M(1) = 1 first.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    pub spec: String,
    /// Comma-separated increasing list; defaults to 1, 2, 4, …, 4096.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Also run the grid oracle at this resolution for n <= 4.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    pub spec: String,
    /// Non-negative, non-increasing coordinates; rescaled to unit modular.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    pub spec: String,
    /// Number of random samples.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Largest support of a random sample.
    #[arg(long, default_value_t = 20)]
    pub support: usize,
    /// Index bound of the truncated K check.
    #[arg(short = 'I', long = "I", default_value_t = 6)]
    #[serde(rename = "I")]
    pub index_bound: usize,
    /// Level bound of the truncated K check.
    #[arg(short = 'N', long = "N", default_value_t = 6)]
    #[serde(rename = "N")]
    pub level_bound: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeriveArgs {
    /// Derivation steps applied to the family.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Cap κ(n) = min(n, cap); the full K when absent.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Index bound of the oracle universe.
    #[arg(short = 'I', long = "I", default_value_t = 4)]
    #[serde(rename = "I")]
    pub index_bound: usize,
    /// Level bound of the oracle universe.
    #[arg(short = 'N', long = "N", default_value_t = 4)]
    #[serde(rename = "N")]
    pub level_bound: usize,
    /// Stages checked by the ω verification.
    #[arg(long, default_value_t = 50)]
    pub m_max: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NonembedArgs {
    pub spec: String,
    /// Truncation horizon.
    #[arg(short = 'J', long = "J", default_value_t = orlicz_core::nonembed::DEFAULT_HORIZON)]
    #[serde(rename = "J")]
    pub horizon: usize,
    /// Step of the uniform block partition i_k = step · k used for the
    /// materialised witness.
    #[arg(long, default_value_t = 1)]
    pub step: usize,
}

/// Result of a subcommand before it is written out.
#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub csv: Option<String>,
    /// Residual checks that exceeded their tolerance.
    pub failures: Vec<String>,
}

/// A failed run, mapped to an exit status.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            message: message.into(),
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn numeric(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            message: message.into(),
            exit_code: EXIT_NUMERIC,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind,
            "message": self.message,
            "exit_code": self.exit_code,
        })
        .to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            kind: e.kind().into(),
            message: e.to_string(),
            exit_code: if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_VALIDATION
            },
        }
    }
}

/// Runs the parsed command and writes its reports.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let outcome = commands::execute(cli)?;
    output::write_reports(cli, &outcome)?;
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::numeric("residual", outcome.failures.join("; ")))
    }
}
