use rayon::prelude::*;
use serde::Serialize;

use super::StatsError;
use crate::env::{sample_environment, GapLaw};
use crate::rng::stream;
use crate::survival::crossing_profile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub beta: f64,
    pub ell: usize,
    /// `λ(ℓ, β)` for each environment, in stream order.
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    pub spread: (f64, f64),
}

impl LambdaEstimate {
    /// `[β, β + E ln T + ln 2]`.
    pub fn within_bounds(&self, law: &GapLaw) -> bool {
        self.mean >= self.beta && self.mean <= self.beta + law.mean_log_gap() + std::f64::consts::LN_2
    }
}

/// `λ(ℓ, β)` averaged over `envs` environments drawn from `stream_name`.
pub fn estimate_lambda(
    law: &GapLaw,
    beta: f64,
    ell: usize,
    envs: usize,
    seed: u64,
    stream_name: &str,
) -> Result<LambdaEstimate, StatsError> {
    if envs < 2 {
        return Err(StatsError::InvalidConfig("need at least 2 environments".into()));
    }
    let values = (0..envs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, stream_name, i);
            let env = sample_environment(law, ell, &mut rng)?;
            let z = crossing_profile(&env, beta, ell)?;
            Ok(z[ell - 1] / ell as f64)
        })
        .collect::<Result<Vec<f64>, StatsError>>()?;
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let spread = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(LambdaEstimate {
        beta,
        ell,
        values,
        mean,
        std_error: (var / m).sqrt(),
        spread,
    })
}
