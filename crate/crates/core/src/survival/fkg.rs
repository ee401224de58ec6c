//! Law of `H_x` conditioned on reaching `x` before returning to 0, with and
//! without killing.

use super::crossing::exit_probability;
use super::{check_beta, Landing, SurvivalError};
use crate::env::Environment;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkgComparison {
    /// `P^β(H_x <= m | σ ∧ H_0 > H_x)` for `m = 0..=n`.
    pub cdf_killed: Vec<f64>,
    /// `P(H_x <= m | H_0 > H_x)` for `m = 0..=n`.
    pub cdf_free: Vec<f64>,
}

pub fn fkg_compare(
    env: &Environment,
    x: u64,
    n: u64,
    beta: f64,
) -> Result<FkgComparison, SurvivalError> {
    check_beta(beta)?;
    if x == 0 {
        return Err(SurvivalError::InvalidParameter("target x must be >= 1".into()));
    }
    if x > env.last_position() {
        return Err(SurvivalError::EnvironmentTooShort {
            needed: x,
            available: env.last_position(),
        });
    }
    let kill = (-beta).exp();
    let weights: Vec<f64> = (0..=x)
        .map(|y| if y > 0 && env.is_trap(y) { kill } else { 1.0 })
        .collect();
    let killed = hitting_cdf(&weights, n, exit_probability(env, 0, 0, x, beta, Landing::Survive)?);
    let free = hitting_cdf(
        &vec![1.0; weights.len()],
        n,
        exit_probability(env, 0, 0, x, 0.0, Landing::Survive)?,
    );
    Ok(FkgComparison {
        cdf_killed: killed,
        cdf_free: free,
    })
}

/// Time-indexed arrivals at `x = weights.len() - 1`, divided by the total
/// arrival probability `exp(log_total)`.
fn hitting_cdf(weights: &[f64], n: u64, log_total: f64) -> Vec<f64> {
    let x = weights.len() - 1;
    // sites 0..=x; 0 and x absorb
    let mut cur = vec![0.0f64; x + 1];
    let mut next = vec![0.0f64; x + 1];
    let mut cdf = Vec::with_capacity(n as usize + 1);
    cdf.push(0.0);
    // `cur` is stored in units of e^{log_scale}
    let mut log_scale = 0.0f64;
    let mut arrived = 0.0f64;
    for m in 1..=n {
        let landing = if m == 1 {
            if x == 1 {
                0.5 * weights[1]
            } else {
                cur[1] = 0.5 * weights[1];
                0.0
            }
        } else {
            let landing = 0.5 * cur[x - 1] * weights[x];
            for y in 1..x {
                let from_left = if y >= 2 { cur[y - 1] } else { 0.0 };
                let from_right = if y + 1 < x { cur[y + 1] } else { 0.0 };
                next[y] = 0.5 * (from_left + from_right) * weights[y];
            }
            std::mem::swap(&mut cur, &mut next);
            landing
        };
        if landing > 0.0 {
            arrived += (landing.ln() + log_scale - log_total).exp();
        }
        let max = cur.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 && max < 1e-100 {
            cur.iter_mut().for_each(|v| *v /= max);
            log_scale += max.ln();
        }
        cdf.push(arrived);
    }
    cdf
}
