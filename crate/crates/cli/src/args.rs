use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Superconcentrator construction, verification and certification.
#[derive(Debug, Parser, Serialize)]
#[command(name = "supercon", version)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for reports and manifests.
    #[arg(long, global = true, default_value = "supercon-out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Grid-certify the pair-expansion entropy inequality.
    CertifyPair(CertifyPair),
    /// Grid-certify the expansion entropy inequality.
    CertifyExpansion(CertifyExpansion),
    /// Check the profile constants and degree conditions.
    CheckConditions(ConstantsArgs),
    /// Sample G(N, d, δ) and write it out.
    SampleExpander(SampleExpander),
    /// Check a graph against the expansion (and optionally pair) profile.
    CheckExpansion(CheckExpansion),
    /// Build Γ_N.
    BuildSc(BuildSc),
    /// Verify the superconcentrator property of a built graph.
    VerifySc(VerifySc),
    /// Union bound on the failure probability.
    ProbBound(ProbBound),
    /// Exact probability that an ℓ-set has at most r neighbours.
    ExactPlr(Plr),
    /// Monte Carlo estimate of the same probability.
    McPlr(McPlr),
    /// Compare |ln C(n,k)/n − H(k/n)| with 2 ln(n)/n for all k.
    StirlingScan(StirlingScan),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Dot,
    Text,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.0001)]
    pub margin: f64,
    /// Also write every cell's slack as CSV.
    #[arg(long)]
    pub cells_csv: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyPair {
    #[arg(long, default_value_t = 0.325)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.45)]
    pub p: f64,
    #[arg(long, default_value_t = 0.3)]
    pub x_min: f64,
    #[arg(long, default_value_t = 0.3322)]
    pub x_max: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    /// C1 as a decimal string (kept exact).
    #[arg(long, default_value = "0.2301")]
    pub c1: String,
    #[arg(long, default_value = "0.3322")]
    pub c3: String,
    /// Integer degree d.
    #[arg(long, default_value_t = 5)]
    pub degree: u32,
    /// Fractional degree δ.
    #[arg(long = "frac-delta", default_value_t = 0.325)]
    pub frac_delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.3)]
    pub eps1: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyExpansion {
    #[arg(long, default_value_t = 0.325)]
    pub delta: f64,
    /// Δ, the weight of the second left-hand term.
    #[arg(long = "big-delta", default_value_t = 0.18)]
    pub big_delta: f64,
    #[arg(long, default_value = "0.2301")]
    pub c1: String,
    #[arg(long, default_value = "0.3322")]
    pub c3: String,
    /// x-interval as LO:HI; repeatable. Default: the four affine pieces of
    /// e on [0.21, 0.48].
    #[arg(long = "interval", value_parser = parse_interval)]
    pub intervals: Vec<(f64, f64)>,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

#[derive(Debug, Args, Serialize)]
pub struct GraphSpec {
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: u32,
    #[arg(long, default_value_t = 0.325)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleExpander {
    #[command(flatten)]
    pub graph: GraphSpec,
    /// Redraw colliding permutations so every left vertex has full degree.
    #[arg(long)]
    pub simple: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckExpansion {
    /// Graph in the text format written by sample-expander; otherwise one is
    /// sampled from the flags below.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub sample: GraphSpec,
    #[arg(long, default_value = "0.2301")]
    pub c1: String,
    #[arg(long, default_value = "0.3322")]
    pub c3: String,
    /// Largest set size checked (default: N).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Also check pair expansion with γ = `pair_gamma` up to α = C3.
    #[arg(long)]
    pub pair: bool,
    #[arg(long, default_value_t = 1.0)]
    pub pair_gamma: f64,
    #[arg(long, default_value_t = 200_000)]
    pub budget: u128,
    /// Random restarts per size beyond the budget; 0 skips those sizes.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildSc {
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    /// Base size N0; levels of this size are complete bipartite.
    #[arg(long, default_value_t = 20)]
    pub base: usize,
    #[arg(long, default_value_t = 5)]
    pub d: u32,
    #[arg(long, default_value_t = 0.325)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub retry_limit: u32,
    /// Use complete bipartite graphs instead of random expanders.
    #[arg(long)]
    pub complete: bool,
    /// Check every sampled expander against the profiles before use.
    #[arg(long)]
    pub accept: bool,
    #[arg(long, default_value_t = 200_000)]
    pub budget: u128,
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Also write a DOT rendering.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifySc {
    /// Graph JSON from build-sc (default: gamma.json in the output directory).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Sampled)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5_000_000)]
    pub budget: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Pair,
    Expansion,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbBound {
    #[arg(long, value_enum, default_value_t = BoundKind::Expansion)]
    pub kind: BoundKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: u32,
    #[arg(long, default_value_t = 0.325)]
    pub delta: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Plr {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ell: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Use p_k = C(n−k, ℓ)/C(n, ℓ) without the degree exponent.
    #[arg(long)]
    pub complement: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct McPlr {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ell: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct StirlingScan {
    /// Values of n to scan; repeatable.
    #[arg(long = "n", default_values_t = [128u64, 512, 2048])]
    pub ns: Vec<u64>,
}
