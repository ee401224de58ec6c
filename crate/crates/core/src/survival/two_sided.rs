//! Two-sided representation of the crossing cost: the walk may wander to the
//! left, where the traps are an independent copy `-τ̃`, and must reach `τ_1`
//! alive (arrival included).

use super::crossing::log_exit_with_traps;
use super::{check_beta, Landing, SurvivalError};
use crate::env::GapLaw;
use crate::rng::stream;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSidedEstimate {
    /// Mean of `-ln P(H_{τ_1} < σ̃)` over the sampled environment pairs.
    pub lambda: f64,
    pub std_error: f64,
    /// Largest upward bias of a single term caused by the left cut-off.
    pub truncation_bound: f64,
    pub samples: usize,
}

/// `ln P_0(H_{right} < σ̃)` with kill sites `{0} ∪ (-left_positions) ∪ {right}`,
/// cut off (as if killed for sure) at the leftmost trap. Returns the value
/// and the bound on `ln P_true - ln P_cut`.
pub fn two_sided_log_probability(
    right: u64,
    left_positions: &[u64],
    beta: f64,
) -> Result<(f64, f64), SurvivalError> {
    check_beta(beta)?;
    let (&cut, inner) = left_positions
        .split_last()
        .ok_or_else(|| SurvivalError::InvalidParameter("need at least one left trap".into()))?;
    let mut traps: Vec<i64> = inner.iter().rev().map(|&p| -(p as i64)).collect();
    traps.push(0);
    traps.push(right as i64);
    let log_p = log_exit_with_traps(-(cut as i64), 0, right as i64, &traps, beta, Landing::Survive);
    // From the cut-off the walk must pass every kept left trap, the origin
    // and land on `right`: at least K + 1 further visits.
    let k = left_positions.len() as f64;
    let slack = (-beta * (k + 1.0) - log_p).exp();
    Ok((log_p, slack.ln_1p()))
}

pub fn lambda_two_sided(
    law: &GapLaw,
    beta: f64,
    samples: usize,
    left_truncation: usize,
    tolerance: f64,
    seed: u64,
) -> Result<TwoSidedEstimate, SurvivalError> {
    check_beta(beta)?;
    if samples == 0 || left_truncation == 0 {
        return Err(SurvivalError::InvalidParameter(
            "samples and left_truncation must be positive".into(),
        ));
    }
    let terms: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "two-sided", i);
            let right = law.sample(&mut rng).ok_or(crate::env::EnvError::Overflow(1))?;
            let left =
                crate::env::sample_environment(law, left_truncation, &mut rng)?;
            two_sided_log_probability(right, &left.positions()[1..], beta)
        })
        .collect::<Result<_, _>>()?;
    let truncation_bound = terms.iter().map(|t| t.1).fold(0.0, f64::max);
    if truncation_bound > tolerance {
        return Err(SurvivalError::TruncationTooCoarse {
            bound: truncation_bound,
            tolerance,
        });
    }
    let m = terms.len() as f64;
    let mean = terms.iter().map(|t| -t.0).sum::<f64>() / m;
    let var = if terms.len() > 1 {
        terms.iter().map(|t| (-t.0 - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(TwoSidedEstimate {
        lambda: mean,
        std_error: (var / m).sqrt(),
        truncation_bound,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense solve of `u(x) = ½ c(x+1) u(x+1) + ½ c(x-1) u(x-1)` on
    /// `(-cut, right)`, `u(-cut) = 0`, `u(right) = 1`, by Gaussian elimination.
    fn dense_oracle(right: i64, cut: i64, traps: &[i64], beta: f64) -> f64 {
        let c = |x: i64| if traps.contains(&x) { (-beta).exp() } else { 1.0 };
        let sites: Vec<i64> = (-cut + 1..right).collect();
        let m = sites.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (r, &x) in sites.iter().enumerate() {
            a[r][r] = 1.0;
            for y in [x - 1, x + 1] {
                if y == right {
                    a[r][m] += 0.5 * c(y);
                } else if y > -cut {
                    a[r][(y + cut - 1) as usize] -= 0.5 * c(y);
                }
            }
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            for r in 0..m {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for k in col..=m {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
        let origin = (cut - 1) as usize;
        a[origin][m] / a[origin][origin]
    }

    #[test]
    fn matches_dense_solve_on_small_instances() {
        for s in 1..=4u64 {
            for t in 1..=4u64 {
                for &beta in &[0.5, 3.0, 12.0] {
                    let left = [s, s + 2];
                    let (got, _) = two_sided_log_probability(t, &left, beta).unwrap();
                    let traps = [-(s as i64), 0, t as i64];
                    let want = dense_oracle(t as i64, (s + 2) as i64, &traps, beta);
                    assert!((got - want.ln()).abs() < 1e-11, "s {s} t {t} β {beta}");
                }
            }
        }
    }

    #[test]
    fn truncation_bound_shrinks_with_more_left_traps() {
        let short = two_sided_log_probability(5, &[2, 3], 1.0).unwrap();
        let long = two_sided_log_probability(5, &[2, 3, 4, 6, 9, 10, 14], 1.0).unwrap();
        assert!(long.1 < short.1);
        assert!(long.0 >= short.0);
        assert!(long.0 - short.0 <= short.1 + 1e-12);
    }

    #[test]
    fn too_coarse_truncation_is_reported() {
        let law = GapLaw::discrete_pareto(2.0).unwrap();
        assert!(matches!(
            lambda_two_sided(&law, 0.5, 10, 1, 1e-12, 1),
            Err(SurvivalError::TruncationTooCoarse { .. })
        ));
    }
}
