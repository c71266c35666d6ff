//! The `dioph` command line: config ingestion, subcommand dispatch and
//! deterministic artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dioph_core::goodfn::VolumeConvention;

use crate::error::CliError;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "dioph", version, about = "Inhomogeneous dual Diophantine approximation on affine subspaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Validate inputs and print the enumeration budget without running.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random stream; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Enumeration budget; overrides DIOPH_BUDGET.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Plain-text columns for external plotters.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Volume {
    Euclidean,
    Sup,
}

impl From<Volume> for VolumeConvention {
    fn from(v: Volume) -> Self {
        match v {
            Volume::Euclidean => VolumeConvention::Euclidean,
            Volume::Sup => VolumeConvention::SupNorm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dual records and the estimated exponent ω(A; θ).
    Exponent {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        hmax: u64,
        /// Fraction of the record tail the median is taken over.
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        /// Records file (default records.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// The full dual record table, including a″.
    Records {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        hmax: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Wedge records and the estimated exponent ω_j(A).
    HigherExponent {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        height: u64,
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        /// Allow n > 4 or height > 30 for j ≥ 2.
        #[arg(long)]
        allow_large: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical (C, α)-good check of a polynomial on a ball.
    GoodCheck {
        #[arg(long)]
        poly: String,
        /// Centre coordinates then radius, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        ball: String,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Degree used for the constants; the polynomial's degree by default.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// ε runs over sup|f|·2^{-k} for k = 1..=levels.
        #[arg(long, default_value_t = 10)]
        levels: u32,
        #[arg(long)]
        lipschitz: Option<f64>,
        #[arg(long, value_enum, default_value_t = Volume::Euclidean)]
        volume: Volume,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quantitative nondivergence table for the flow at time t.
    Nondiv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: u32,
        /// `auto` or a value in the admissible interval.
        #[arg(long, default_value = "auto")]
        beta: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 2048)]
        grid: usize,
        /// Lipschitz bound L for the shift gradient; estimated when absent.
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 9)]
        coarse: usize,
        /// Besicovitch constant N_d.
        #[arg(long, default_value_t = 1.0)]
        besicovitch: f64,
        #[arg(long, value_enum, default_value_t = Volume::Euclidean)]
        volume: Volume,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Truncated limsup tail measures against the Borel–Cantelli cap.
    Measure {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's psi.
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        t0: u32,
        #[arg(long)]
        t1: u32,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// The dimension lower bound d − 1 + (n+1)/(nτ+1).
    DimBound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        tau: f64,
    },
    /// Cross-module invariant suite; exits 1 on any violation.
    Verify {
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::Violations(_)) {
                eprintln!("dioph: {e}");
            }
            e.exit_code()
        }
    }
}
