use serde::Serialize;

use super::StatsError;
use crate::env::{compute_records, Environment};
use crate::periodic::g_rate;
use crate::survival::{crossing_profile, scale_for};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapScore {
    /// 1-based gap index of a record.
    pub ell: usize,
    pub score: f64,
    pub is_argmin: bool,
}

/// `G_n(ℓ) = Z(0, ℓ-1)/N + g(T_ℓ) n/N` at every record gap `ℓ` whose left
/// trap lies within distance `n` of the origin.
pub fn gap_score_profile(
    env: &Environment,
    beta: f64,
    n: u64,
    gamma: f64,
) -> Result<Vec<GapScore>, StatsError> {
    let scale = scale_for(n, gamma);
    let records = compute_records(env);
    let reachable: Vec<usize> = records
        .record_indexes
        .iter()
        .zip(&records.record_positions)
        .filter(|&(_, &pos)| pos < n)
        .map(|(&i, _)| i)
        .collect();
    let deepest = reachable.iter().copied().max().unwrap_or(0);
    let costs = if deepest > 0 {
        crossing_profile(env, beta, deepest)?
    } else {
        Vec::new()
    };
    let mut scores: Vec<GapScore> = reachable
        .iter()
        .map(|&i| {
            let cost = if i == 0 { 0.0 } else { costs[i - 1] };
            GapScore {
                ell: i + 1,
                score: cost / scale + g_rate(env.gaps()[i]) * n as f64 / scale,
                is_argmin: false,
            }
        })
        .collect();
    if let Some(best) = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.score.total_cmp(&b.1.score))
        .map(|(k, _)| k)
    {
        scores[best].is_argmin = true;
    }
    Ok(scores)
}
