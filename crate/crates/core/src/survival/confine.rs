//! Confinement of the free walk in `(-t, t) \ {0}`.

use super::SurvivalError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfinedResult {
    /// `ln P(H_t ∧ H_0 ∧ H_{-t} > n)`.
    pub log_p: f64,
    /// `-½ ln(P_n / P_{n-2})`, when both are positive.
    pub rate_estimate: Option<f64>,
}

/// Exact `P(H_t ∧ H_0 ∧ H_{-t} > n)` by propagating the walk on `1..t-1`
/// (the two half-intervals are mirror images).
pub fn confined_survival_probability(t: u64, n: u64) -> Result<ConfinedResult, SurvivalError> {
    if t < 2 || n == 0 {
        return Err(SurvivalError::InvalidParameter(format!(
            "confinement needs t >= 2 and n >= 1, got t = {t}, n = {n}"
        )));
    }
    let width = (t - 1) as usize;
    // index i is site i; the absorbing cells 0 and t stay zero
    let mut cur = vec![0.0f64; width + 2];
    let mut next = vec![0.0f64; width + 2];
    // after step 1 the walk sits at ±1, each side with probability ½; the
    // mirror image doubles the one-sided mass back to 1
    cur[1] = 1.0;
    let mut log_scale = 0.0f64;
    let mut history = [f64::NEG_INFINITY; 3];
    let log_total = |v: &[f64], scale: f64| v.iter().sum::<f64>().ln() + scale;
    history[1 % 3] = log_total(&cur, log_scale);
    for k in 2..=n {
        for i in 1..=width {
            next[i] = 0.5 * (cur[i - 1] + cur[i + 1]);
        }
        std::mem::swap(&mut cur, &mut next);
        let max = cur.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(ConfinedResult {
                log_p: f64::NEG_INFINITY,
                rate_estimate: None,
            });
        }
        if max < 1e-100 {
            cur.iter_mut().for_each(|v| *v /= max);
            log_scale += max.ln();
        }
        history[(k % 3) as usize] = log_total(&cur, log_scale);
    }
    let log_p = history[(n % 3) as usize];
    let rate_estimate = (n >= 3)
        .then(|| history[((n - 2) % 3) as usize])
        .filter(|prev| prev.is_finite() && log_p.is_finite())
        .map(|prev| -0.5 * (log_p - prev));
    Ok(ConfinedResult {
        log_p,
        rate_estimate,
    })
}
