//! Command-line front end for gcnlab.
//!
//! Every subcommand reads a measure (a CSV/JSON file or a built-in fixture),
//! runs one operation of `gcnlab-core` and writes a JSON report. Exit codes:
//! 0 on success, 2 when a verified bound fails, 1 on any error.

pub mod commands;
pub mod ingest;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcnlab_core::estimators::{Anchor, Theorem, DEFAULT_CAP, DEFAULT_SEARCH_BUDGET};
use gcnlab_core::GcnKind;
use serde::Serialize;

pub use commands::{run, Outcome};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "GCNLAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BOUND_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gcnlab",
    version,
    about = "Geometric condition numbers and least-squares flats"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Point cloud: CSV (`x1,..,xD[,weight]`) or JSON (`{"points", "weights"}`).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Built-in measure used when no input is given (t3, sq4, collinear3).
    #[arg(long, global = true, default_value = "t3")]
    pub fixture: String,
    /// Treat the last CSV column as weights when there is no header.
    #[arg(long, global = true)]
    pub weighted: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Maximal number of tuple evaluations for exact enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorArg {
    None,
    /// `(x_cm, x_1, .., x_{d+1})`
    XcmD1,
    /// Deshpande-type GCN on `(x_cm, x_1, .., x_d)`; volume family only.
    XcmD,
}

impl From<AnchorArg> for Anchor {
    fn from(a: AnchorArg) -> Anchor {
        match a {
            AnchorArg::None => Anchor::None,
            AnchorArg::XcmD1 => Anchor::XcmPlusD1,
            AnchorArg::XcmD => Anchor::XcmPlusD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlavorArg {
    Plain,
    Central,
    /// `(d+1)`-simplex separation; needs `--tau`.
    Simplex,
    Robust,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplingArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LsErrorArgs {
    #[arg(long)]
    pub dim: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GcnEvalArgs {
    /// Report a single GCN instead of all of them.
    #[arg(long)]
    pub gcn: Option<GcnKind>,
    /// `diam(mu)` for the `vol_mu` GCN; defaults to the simplex diameter.
    #[arg(long)]
    pub diam_mu: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntegralArgs {
    #[arg(long)]
    pub gcn: GcnKind,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub anchor: AnchorArg,
    /// Only integrate over simplices with every edge at least `tau diam(mu)`.
    #[arg(long)]
    pub tau: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    /// Moment order m.
    #[arg(long)]
    pub dim: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "plain")]
    pub flavor: FlavorArg,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Greedy growth steps.
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub theorem: Theorem,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Constant for the polar upper bound; without it that check is not applicable.
    #[arg(long)]
    pub pol_constant: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub dim: usize,
    /// Sample size per trial.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SccArgs {
    #[arg(long)]
    pub dim: usize,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// Affinity scale; defaults to the median sampled polar GCN.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub tuples_per_point: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Without `--input`, cluster two noisy orthogonal lines with this many
    /// points each and report accuracy against the generating labels.
    #[arg(long, default_value_t = 50)]
    pub per_line: usize,
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VolsampleArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Least-squares d-flat and its error.
    LsError(LsErrorArgs),
    /// GCNs of the simplex whose vertices are the input rows.
    GcnEval(GcnEvalArgs),
    /// Integral of a GCN to the power p over the product measure.
    Integral(IntegralArgs),
    /// Volume moment against the elementary symmetric polynomial.
    Moments(MomentsArgs),
    /// Search for a separation certificate.
    Certify(CertifyArgs),
    /// Check a comparison inequality (exit code 2 when it fails).
    Verify(VerifyArgs),
    /// Repeated-sampling concentration experiment.
    Concentration(ConcentrationArgs),
    /// Polar-GCN affinities followed by spectral clustering.
    Scc(SccArgs),
    /// Volume-sampling distribution, one sampled flat, and the expected error.
    Volsample(VolsampleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LsError(_) => "ls-error",
            Command::GcnEval(_) => "gcn-eval",
            Command::Integral(_) => "integral",
            Command::Moments(_) => "moments",
            Command::Certify(_) => "certify",
            Command::Verify(_) => "verify",
            Command::Concentration(_) => "concentration",
            Command::Scc(_) => "scc",
            Command::Volsample(_) => "volsample",
        }
    }
}

/// Sizes the global rayon pool from `GCNLAB_THREADS` when it is set.
pub fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got '{raw}'")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}
