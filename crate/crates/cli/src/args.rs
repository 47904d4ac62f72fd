use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bayonet", version, about = "Bayesian elastic net by the stationary-phase approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ML fit, saddle point, posterior expectation and log Z.
    Fit(FitArgs),
    /// Single-coefficient marginal densities, one CSV per coordinate.
    Marginal(MarginalArgs),
    /// Free-energy gap and distance to the ML solution along a τ grid.
    Convergence(ConvergenceArgs),
    /// Reference Gibbs sampler.
    Gibbs(GibbsArgs),
    /// K-fold cross-validation over a (μ, τ) grid.
    Cv(CvArgs),
    /// MAP estimate of τ for given (λ, μ).
    Maptau(MaptauArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV with a header row, or JSON `{"c": [[..]], "w": [..]}`.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column (CSV input).
    #[arg(long)]
    pub response: Option<String>,
    /// Treat the CSV as already standardized.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (directory for `marginal`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauArg {
    Value(f64),
    Map,
}

impl FromStr for TauArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("map") {
            return Ok(TauArg::Map);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(TauArg::Value(v)),
            _ => Err(format!("expected a positive number or \"map\", got {s:?}")),
        }
    }
}

/// `N,r` for the μ grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuGridArg {
    pub n: usize,
    pub r: f64,
}

impl FromStr for MuGridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, r) = s.split_once(',').ok_or_else(|| format!("expected N,r, got {s:?}"))?;
        Ok(Self {
            n: n.trim().parse().map_err(|e| format!("bad N in {s:?}: {e}"))?,
            r: r.trim().parse().map_err(|e| format!("bad r in {s:?}: {e}"))?,
        })
    }
}

/// `M,count` for the τ grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGridArg {
    pub m: usize,
    pub count: usize,
}

impl FromStr for TauGridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, count) = s.split_once(',').ok_or_else(|| format!("expected M,count, got {s:?}"))?;
        Ok(Self {
            m: m.trim().parse().map_err(|e| format!("bad M in {s:?}: {e}"))?,
            count: count.trim().parse().map_err(|e| format!("bad count in {s:?}: {e}"))?,
        })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub mu: f64,
    /// Inverse temperature, or `map` for the MAP estimate.
    #[arg(long, default_value = "map")]
    pub tau: TauArg,
    /// Saddle-point residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 11_000)]
    pub gibbs_sweeps: usize,
    /// Defaults to a tenth of the sweeps.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// `all`, or a comma-separated list of indices or predictor names.
    #[arg(long, default_value = "all")]
    pub coords: String,
    /// Add the minimum-energy approximation as a `density_ml` column.
    #[arg(long)]
    pub ml: bool,
    /// Also run the Gibbs sampler and emit histograms on the curve grid.
    #[arg(long)]
    pub gibbs: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    /// Grid half-width in posterior standard deviations.
    #[arg(long, default_value_t = 6.0)]
    pub half_width: f64,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// One or more ℓ1 weights.
    #[arg(long, value_delimiter = ',', conflicts_with = "mu_grid")]
    pub mu: Vec<f64>,
    #[arg(long)]
    pub mu_grid: Option<MuGridArg>,
    #[arg(long, default_value = "1,17")]
    pub tau_grid: TauGridArg,
    /// Use the exact one-dimensional formulas (p = 1 only).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GibbsArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "10,0.01")]
    pub mu_grid: MuGridArg,
    #[arg(long, default_value = "1,17")]
    pub tau_grid: TauGridArg,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only this many predictors per training fold.
    #[arg(long)]
    pub screen_top: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MaptauArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub mu: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
