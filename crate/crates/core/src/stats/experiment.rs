use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lambda::{estimate_lambda, LambdaEstimate};
use super::ks::{ks_distance, KsResult};
use super::StatsError;
use crate::env::{sample_environment_covering, GapLaw, LawKind};
use crate::limit::{limit_cdf, LimitParams};
use crate::rng::stream;
use crate::survival::{log_survival_probability, scale_for, SurvivalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum LambdaSource {
    /// Mean of `λ(ℓ*, β)` over independent environments.
    Estimated,
    Provided(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub beta: f64,
    pub law: LawKind,
    pub n_grid: Vec<u64>,
    pub env_count: usize,
    pub seed: u64,
    pub lambda_source: LambdaSource,
    /// `ℓ*` for the λ estimate.
    pub lambda_ell: usize,
    pub lambda_envs: usize,
}

impl ExperimentConfig {
    pub fn new(gamma: f64, beta: f64, n_grid: Vec<u64>, env_count: usize, seed: u64) -> Self {
        Self {
            gamma,
            beta,
            law: LawKind::DiscretePareto,
            n_grid,
            env_count,
            seed,
            lambda_source: LambdaSource::Estimated,
            lambda_ell: 10_000,
            lambda_envs: 8,
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |m: String| Err(StatsError::InvalidConfig(m));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return bad("n grid must be non-empty and positive".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n grid must be strictly increasing".into());
        }
        if self.env_count < 2 {
            return bad("need at least 2 environments".into());
        }
        if let LambdaSource::Provided(l) = self.lambda_source {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("provided lambda must be positive, got {l}"));
            }
        } else if self.lambda_ell == 0 || self.lambda_envs < 2 {
            return bad("lambda estimate needs ell >= 1 and at least 2 environments".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonReport {
    pub n: u64,
    pub scale: f64,
    /// `F_n` per environment in stream order; failed environments are skipped.
    pub f_values: Vec<f64>,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub content_hash: String,
    pub lambda: f64,
    pub lambda_estimate: Option<LambdaEstimate>,
    pub c_tau: f64,
    pub streams: Vec<String>,
    pub horizons: Vec<HorizonReport>,
    /// No convergence rate is known, so KS values are descriptive only.
    pub note: String,
}

impl ConvergenceReport {
    pub fn limit_params(&self) -> LimitParams {
        LimitParams::new(self.lambda, self.config.gamma, self.c_tau).expect("validated")
    }

    pub fn to_json(&self) -> Result<String, StatsError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,N,envs,failures,mean_f,median_f,ks,dkw_band\n");
        for h in &self.horizons {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                h.n,
                h.scale,
                h.f_values.len(),
                h.failures,
                h.mean,
                h.median,
                h.ks.statistic,
                h.ks.dkw_band
            );
        }
        out
    }
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// `F_n` over `env_count` environments and every horizon of the grid, with
/// the KS distance to the limit law.
pub fn convergence_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport, StatsError> {
    config.validate()?;
    let law = GapLaw::new(config.law, config.gamma)?;
    let (lambda, lambda_estimate) = match config.lambda_source {
        LambdaSource::Provided(l) => (l, None),
        LambdaSource::Estimated => {
            let est = estimate_lambda(
                &law,
                config.beta,
                config.lambda_ell,
                config.lambda_envs,
                config.seed,
                "lambda",
            )?;
            (est.mean, Some(est))
        }
    };
    let c_tau = law.tail_constant();
    let params = LimitParams::new(lambda, config.gamma, c_tau)?;
    let max_n = *config.n_grid.last().expect("validated");

    let per_env: Vec<Vec<Option<f64>>> = (0..config.env_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, "env", i);
            let env = match sample_environment_covering(&law, max_n + 1, &mut rng) {
                Ok(env) => env,
                Err(_) => return vec![None; config.n_grid.len()],
            };
            config
                .n_grid
                .iter()
                .map(|&n| {
                    let p = SurvivalParams::new(config.beta, n, config.gamma);
                    log_survival_probability(&env, &p).ok().map(|r| r.free_energy)
                })
                .collect()
        })
        .collect();

    let mut horizons = Vec::with_capacity(config.n_grid.len());
    for (k, &n) in config.n_grid.iter().enumerate() {
        let f_values: Vec<f64> = per_env.iter().filter_map(|row| row[k]).collect();
        let failures = config.env_count - f_values.len();
        if f_values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        let mut sorted = f_values.clone();
        sorted.sort_by(f64::total_cmp);
        let ks = ks_distance(&sorted, |u| limit_cdf(&params, u))?;
        horizons.push(HorizonReport {
            n,
            scale: scale_for(n, config.gamma),
            mean: f_values.iter().sum::<f64>() / f_values.len() as f64,
            median: median(&sorted),
            f_values,
            failures,
            ks,
        });
    }

    Ok(ConvergenceReport {
        config: config.clone(),
        content_hash: config.content_hash(),
        lambda,
        lambda_estimate,
        c_tau,
        streams: vec!["env".into(), "lambda".into()],
        horizons,
        note: "no convergence rate is known; KS values are descriptive".into(),
    })
}
