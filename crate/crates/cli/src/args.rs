use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use trapwalk::LawKind;

#[derive(Debug, Parser)]
#[command(name = "trapwalk", version, about = "Random walk among soft renewal traps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json, env = "TRAPWALK_FORMAT")]
    pub format: Format,

    /// Write records here instead of stdout.
    #[arg(long, short, global = true, env = "TRAPWALK_OUTPUT")]
    pub output: Option<PathBuf>,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "TRAPWALK_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    /// Line-delimited environment format (sample-env only).
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw an environment of trap gaps.
    SampleEnv(SampleEnvArgs),
    /// ln Z_n and F_n by exact dynamic programming.
    Survival(SurvivalArgs),
    /// Crossing cost λ(β).
    Lambda(LambdaArgs),
    /// Confinement of the free walk in a gap of width t.
    Confine(ConfineArgs),
    /// Conditioned hitting-time laws with and without killing.
    Fkg(FkgArgs),
    /// Exact draws of the limit law.
    LimitSample(LimitSampleArgs),
    /// Tail P(F >= u) of the limit law on a grid.
    LimitCdf(LimitCdfArgs),
    /// Decay rate among traps at every t-th site.
    Phi(PhiArgs),
    /// Decay rate among periodic trap patterns.
    PhiPeriodic(PhiPeriodicArgs),
    /// Record counts of i.i.d. gap sequences.
    Records(RecordsArgs),
    /// Convergence of F_n to the limit law.
    Converge(ConvergeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleEnv(_) => "sample-env",
            Command::Survival(_) => "survival",
            Command::Lambda(_) => "lambda",
            Command::Confine(_) => "confine",
            Command::Fkg(_) => "fkg",
            Command::LimitSample(_) => "limit-sample",
            Command::LimitCdf(_) => "limit-cdf",
            Command::Phi(_) => "phi",
            Command::PhiPeriodic(_) => "phi-periodic",
            Command::Records(_) => "records",
            Command::Converge(_) => "converge",
        }
    }
}

/// Integer that may be written in scientific notation (`1e5`, `2.5e3`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 0.0 && v < 9.2e18 && v.fract() == 0.0) {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_count(s).map(|v| v as usize)
}

fn parse_law(s: &str) -> Result<LawKind, String> {
    s.parse().map_err(|e: trapwalk::env::EnvError| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct LawArgs {
    /// Tail exponent γ of the gap law.
    #[arg(long, env = "TRAPWALK_GAMMA")]
    pub gamma: f64,
    /// Gap law: discrete-pareto or zeta.
    #[arg(long, value_parser = parse_law, default_value = "discrete-pareto", env = "TRAPWALK_LAW")]
    pub law: LawKind,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleEnvArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    /// Number of gaps.
    #[arg(long, value_parser = parse_usize, required_unless_present = "reach")]
    pub count: Option<usize>,
    /// Draw gaps until the last trap reaches this site.
    #[arg(long, value_parser = parse_count, conflicts_with = "count")]
    pub reach: Option<u64>,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
    /// Environment index within the seed's "env" stream.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SurvivalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    #[arg(long, env = "TRAPWALK_BETA")]
    pub beta: f64,
    /// Horizons, comma-separated.
    #[arg(long, value_parser = parse_count, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    /// Number of environments, drawn from the "env" stream.
    #[arg(long, value_parser = parse_usize, default_value = "1")]
    pub envs: usize,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
    /// Read the environment from a text file instead of sampling it.
    #[arg(long, conflicts_with = "envs")]
    pub env_file: Option<PathBuf>,
    /// Pruning threshold relative to the a priori estimate of Z_n; 0 is
    /// exact. Defaults to exact for n <= 10^4 and 1e-30 beyond.
    #[arg(long)]
    pub drop_threshold: Option<f64>,
    /// Largest acceptable error bound on ln Z_n.
    #[arg(long, default_value_t = 1e-10)]
    pub max_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMethod {
    /// Z(0, ℓ)/ℓ along one-sided environments.
    Crossing,
    /// Two-sided representation with an independent left environment.
    TwoSided,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    /// Killing strengths, comma-separated.
    #[arg(long, value_delimiter = ',', required = true, env = "TRAPWALK_BETA")]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = LambdaMethod::Crossing)]
    pub method: LambdaMethod,
    /// Number of traps crossed.
    #[arg(long, value_parser = parse_usize, default_value = "1e4")]
    pub ell: usize,
    /// Environments (crossing) or samples (two-sided).
    #[arg(long, value_parser = parse_usize, default_value = "8")]
    pub envs: usize,
    /// Left traps kept by the two-sided method.
    #[arg(long, value_parser = parse_usize, default_value = "200")]
    pub left_truncation: usize,
    /// Largest acceptable truncation bound of the two-sided method.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConfineArgs {
    /// Half-width of the confining interval.
    #[arg(long, value_parser = parse_count, value_delimiter = ',', required = true)]
    pub t: Vec<u64>,
    #[arg(long, value_parser = parse_count, default_value = "2e4")]
    pub n: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FkgArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    #[arg(long, env = "TRAPWALK_BETA")]
    pub beta: f64,
    /// Target site.
    #[arg(long, value_parser = parse_count)]
    pub x: u64,
    /// Largest time of the CDF.
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub index: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitArgs {
    /// λ(β) used in ψ.
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, env = "TRAPWALK_GAMMA")]
    pub gamma: f64,
    /// Intensity mass of [0,1] x [1,∞).
    #[arg(long, default_value_t = 1.0)]
    pub c_tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMethod {
    /// Reveal the Poisson process where it matters.
    Ppp,
    /// Invert the closed-form tail.
    Inverse,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitSampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub limit: LimitArgs,
    #[arg(long, value_parser = parse_usize, default_value = "1000")]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = LimitMethod::Ppp)]
    pub method: LimitMethod,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitCdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub limit: LimitArgs,
    #[arg(long, default_value_t = 10.0)]
    pub u_max: f64,
    #[arg(long, value_parser = parse_usize, default_value = "101")]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PhiArgs {
    /// Trap spacings, comma-separated.
    #[arg(long, value_parser = parse_count, value_delimiter = ',', required = true)]
    pub t: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true, env = "TRAPWALK_BETA")]
    pub beta: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PhiPeriodicArgs {
    /// Gap pattern such as `2,3,10`; repeat the flag for several patterns.
    #[arg(long, required = true)]
    pub pattern: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, env = "TRAPWALK_BETA")]
    pub beta: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RecordsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    /// Sequence lengths, comma-separated.
    #[arg(long, value_parser = parse_usize, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_parser = parse_usize, default_value = "1e4")]
    pub replicates: usize,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    #[arg(long, env = "TRAPWALK_BETA")]
    pub beta: f64,
    /// Horizons, comma-separated and increasing.
    #[arg(long, value_parser = parse_count, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, value_parser = parse_usize, default_value = "200")]
    pub envs: usize,
    #[arg(long, default_value_t = 0, env = "TRAPWALK_SEED")]
    pub seed: u64,
    /// Use this λ(β) instead of estimating it.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_usize, default_value = "1e4")]
    pub lambda_ell: usize,
    #[arg(long, value_parser = parse_usize, default_value = "8")]
    pub lambda_envs: usize,
}
