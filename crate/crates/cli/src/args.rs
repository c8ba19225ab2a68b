use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "genplasma",
    version,
    about = "Exact correlations, sum rules and oracles for the two-species circular plasma"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// JSON file of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent. The manifest goes to PATH.manifest.json.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_name = "U64", default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override for the command's check.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Exact checks of the Pfaffian/determinant identities.
    #[command(args_override_self = true)]
    Identities(IdentitiesArgs),
    /// Exact block structure of the reordered unit-weight Gram matrix.
    #[command(name = "skew-check", args_override_self = true)]
    SkewCheck(ConfigSet),
    /// Partition function Z[u, v] (unit weights give 1).
    #[command(args_override_self = true)]
    Znorm(ZnormArgs),
    /// Finite-N correlation on the circle.
    #[command(name = "corr-finite", args_override_self = true)]
    CorrFinite(CorrFiniteArgs),
    /// Bulk correlation on the line, optionally with a finite-N sweep.
    #[command(name = "corr-bulk", args_override_self = true)]
    CorrBulk(CorrBulkArgs),
    /// Bulk two-point curve.
    #[command(name = "two-point", args_override_self = true)]
    TwoPoint(TwoPointArgs),
    /// Screening sum rules, kernel convolutions and large-density limits.
    #[command(args_override_self = true)]
    Sumrule(SumruleArgs),
    /// Metropolis histograms of pair correlations against the exact result.
    #[command(args_override_self = true)]
    Mc(McArgs),
    /// Pfaffian correlations against the brute-force quadrature oracle.
    #[command(name = "oracle-compare", args_override_self = true)]
    OracleCompare(OracleArgs),
    /// Large-distance tail of the bulk two-point functions.
    #[command(name = "diag-tail", args_override_self = true)]
    DiagTail(DiagTailArgs),
}

impl Command {
    pub const NAMES: [&'static str; 10] = [
        "identities",
        "skew-check",
        "znorm",
        "corr-finite",
        "corr-bulk",
        "two-point",
        "sumrule",
        "mc",
        "oracle-compare",
        "diag-tail",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities(_) => "identities",
            Command::SkewCheck(_) => "skew-check",
            Command::Znorm(_) => "znorm",
            Command::CorrFinite(_) => "corr-finite",
            Command::CorrBulk(_) => "corr-bulk",
            Command::TwoPoint(_) => "two-point",
            Command::Sumrule(_) => "sumrule",
            Command::Mc(_) => "mc",
            Command::OracleCompare(_) => "oracle-compare",
            Command::DiagTail(_) => "diag-tail",
        }
    }
}

fn even(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n % 2 == 1 {
        return Err(format!("N1 = {n} must be even"));
    }
    Ok(n)
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x.is_finite() && x > 0.0) {
        return Err(format!("{x} must be positive"));
    }
    Ok(x)
}

fn density(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(format!("{x} must be a non-negative density"));
    }
    Ok(x)
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Particles {
    #[arg(long = "N1", value_parser = even, default_value_t = 2)]
    #[serde(rename = "N1")]
    pub n1: usize,
    #[arg(long = "N2", default_value_t = 1)]
    #[serde(rename = "N2")]
    pub n2: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Densities {
    #[arg(long = "rhoR", value_parser = density, default_value_t = 1.0)]
    pub rho_r: f64,
    #[arg(long = "rhoG", value_parser = density, default_value_t = 1.0)]
    pub rho_g: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Tuple {
    /// Roman coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xs: Vec<f64>,
    /// Greek coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub ys: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IdentitiesArgs {
    /// all, theorem1, fg, theorem2, theorem3 or corollary1.
    #[arg(long, default_value = "all")]
    pub thm: String,
    #[arg(long = "N", value_delimiter = ',', default_values_t = [2, 4, 6, 8])]
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[arg(long = "L", value_delimiter = ',', default_values_t = [1, 2, 3])]
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Largest confluent size L N.
    #[arg(long, default_value_t = 12)]
    pub max_size: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConfigSet {
    #[command(flatten)]
    #[serde(flatten)]
    pub particles: Particles,
    /// Check every configuration with N1 + 2 N2 <= D instead.
    #[arg(long, value_name = "D")]
    pub max_dim: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ZnormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub set: ConfigSet,
    /// Roman one-body weight as JSON, e.g. {"kind":"fourier","cos":[1,0.5]}.
    #[arg(long)]
    pub u: Option<String>,
    /// Greek one-body weight as JSON.
    #[arg(long)]
    pub v: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CorrFiniteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub particles: Particles,
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: Tuple,
    /// Also evaluate the ζ-expansion route and require agreement.
    #[arg(long)]
    pub zeta: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CorrBulkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub densities: Densities,
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: Tuple,
    /// Periods for a finite-N convergence sweep.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub lengths: Vec<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Explicit,
    Kernel,
    Both,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TwoPointArgs {
    /// rr, rg or gg.
    #[arg(long, default_value = "rr")]
    pub pair: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub densities: Densities,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Method::Explicit)]
    pub method: Method,
    /// Subtract the product of one-point densities.
    #[arg(long)]
    pub truncated: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SumruleArgs {
    /// rr, rg, gg, general, g-only, r-only, convolution, limit-rr or limit-gg.
    #[arg(long, default_value = "rr")]
    pub rule: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub densities: Densities,
    /// Half-width of the integration window.
    #[arg(long = "X", value_parser = positive, default_value_t = 100.0)]
    #[serde(rename = "X")]
    pub half_width: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: Tuple,
    /// Convolution identity: rr, gg, gr-rg, gr or rg.
    #[arg(long, default_value = "rr")]
    pub identity: String,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, default_value_t = -0.4, allow_negative_numbers = true)]
    pub q: f64,
    /// Separation for the large-density limits.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub x: f64,
    /// Increasing densities of the other species for the limits.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = [10.0, 20.0, 40.0, 80.0])]
    pub sequence: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub particles: Particles,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Single-angle proposals per chain.
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 20_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Batches per chain for the standard errors.
    #[arg(long, default_value_t = 10)]
    pub batches: usize,
    /// Pairs to histogram: rr, rg, gg.
    #[arg(long, value_delimiter = ',', default_values_t = ["rg".to_string(), "gg".to_string()])]
    pub pairs: Vec<String>,
    /// Minimum number of bins within 3σ for each pair (default: 90% of bins).
    #[arg(long)]
    pub min_within: Option<usize>,
    /// Also dump every recorded sample to this CSV.
    #[arg(long)]
    pub samples: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub particles: Particles,
    #[arg(long, default_value_t = 1)]
    pub k1: usize,
    #[arg(long, default_value_t = 1)]
    pub k2: usize,
    #[arg(long, default_value_t = 20)]
    pub tuples: usize,
    /// Also compare the ζ-expansion route.
    #[arg(long)]
    pub zeta: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DiagTailArgs {
    #[arg(long, value_delimiter = ',', default_values_t = ["rr".to_string(), "rg".to_string(), "gg".to_string()])]
    pub pairs: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub densities: Densities,
    #[arg(long, value_parser = positive, default_value_t = 40.0)]
    pub x_min: f64,
    #[arg(long, value_parser = positive, default_value_t = 100.0)]
    pub x_max: f64,
}
