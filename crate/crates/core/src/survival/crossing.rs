//! Crossing probabilities by a forward sweep of the harmonic equation
//!
//! `h(x) = ½ c(x+1) h(x+1) + ½ c(x-1) h(x-1)`, `c(y) = e^{-β 1{y ∈ τ}}`,
//!
//! started from `h(left) = 0`, `h(left+1) = 1`. Writing `g = c·h` turns it
//! into `g(x+1) = 2 g(x) / c(x) - g(x-1)`, which is linear on every trap-free
//! stretch. The sweep therefore jumps from trap to trap with one 2×2 step
//! each, whatever the gap sizes. The wanted solution is the growing one, so
//! the forward recursion is stable; the pair is renormalized at every trap.

use super::{check_beta, CrossingResult, Landing, SurvivalError};
use crate::env::{Environment, GapLaw};
use rand::Rng;
use std::f64::consts::LN_2;

/// State of the sweep at site `pos`: `g(pos)` and `g(pos+1)` up to `e^{log_scale}`.
#[derive(Debug, Clone)]
pub struct HarmonicSweep {
    pos: i64,
    g0: f64,
    g1: f64,
    log_scale: f64,
    inv_kill: f64,
}

impl HarmonicSweep {
    /// Start at the absorbing site `left`.
    pub fn new(left: i64, beta: f64) -> Self {
        Self {
            pos: left,
            g0: 0.0,
            g1: 1.0,
            log_scale: 0.0,
            inv_kill: beta.exp(),
        }
    }

    pub fn position(&self) -> i64 {
        self.pos
    }

    /// Move to site `b > pos`, with no trap strictly between. `trap` tells
    /// whether `b` kills.
    pub fn advance(&mut self, b: i64, trap: bool) {
        debug_assert!(b > self.pos);
        let slope = self.g1 - self.g0;
        let dist = (b - self.pos) as f64;
        let gb = self.g0 + dist * slope;
        let gb_prev = gb - slope;
        let gb_next = if trap {
            2.0 * self.inv_kill * gb - gb_prev
        } else {
            gb + slope
        };
        let norm = gb.abs().max(gb_next.abs());
        self.g0 = gb / norm;
        self.g1 = gb_next / norm;
        self.log_scale += norm.ln();
        self.pos = b;
    }

    /// `ln g(pos)`.
    pub fn log_g(&self) -> f64 {
        self.g0.ln() + self.log_scale
    }

    /// `ln g(x)` for `pos <= x` with no trap in `(pos, x)`.
    pub fn log_g_ahead(&self, x: i64) -> f64 {
        let gx = self.g0 + (x - self.pos) as f64 * (self.g1 - self.g0);
        gx.ln() + self.log_scale
    }
}

/// `ln P_start(H_right < H_left ∧ σ)` on the integer line, with the kill
/// sites `traps` (sorted, all inside `(left, right]`).
///
/// For `start == left` the walk leaves `left` at time 0 and must not come
/// back; otherwise `left < start < right`.
pub(crate) fn log_exit_with_traps(
    left: i64,
    start: i64,
    right: i64,
    traps: &[i64],
    beta: f64,
    landing: Landing,
) -> f64 {
    debug_assert!(left <= start && start < right);
    let kill_log = -beta;
    let is_trap = |x: i64| traps.binary_search(&x).is_ok();
    let mut sweep = HarmonicSweep::new(left, beta);
    let mut log_h_start = if start == left {
        // ½ c(left+1) h(left+1) with g(left+1) = 1
        Some(-LN_2)
    } else {
        None
    };
    for &b in traps.iter().filter(|&&b| b > left && b < right) {
        if log_h_start.is_none() && start < b {
            log_h_start = Some(sweep.log_g_ahead(start));
        }
        sweep.advance(b, true);
        if log_h_start.is_none() && start == b {
            // h = g / c at a trap
            log_h_start = Some(sweep.log_g() - kill_log);
        }
    }
    let log_h_start = log_h_start.unwrap_or_else(|| sweep.log_g_ahead(start));
    let log_g_right = sweep.log_g_ahead(right);
    let log_h_right = match landing {
        Landing::Survive if is_trap(right) => log_g_right - kill_log,
        _ => log_g_right,
    };
    log_h_start - log_h_right
}

fn traps_between(env: &Environment, left: u64, right: u64) -> Vec<i64> {
    let pos = env.positions();
    let from = pos.partition_point(|&p| p <= left);
    let to = pos.partition_point(|&p| p <= right);
    pos[from..to].iter().map(|&p| p as i64).collect()
}

/// `ln P_start(H_right < H_left ∧ σ)` among the traps of `env`.
pub fn exit_probability(
    env: &Environment,
    start: u64,
    left: u64,
    right: u64,
    beta: f64,
    landing: Landing,
) -> Result<f64, SurvivalError> {
    check_beta(beta)?;
    if !(left <= start && start < right) {
        return Err(SurvivalError::InvalidParameter(format!(
            "need left <= start < right, got {left}, {start}, {right}"
        )));
    }
    if right > env.last_position() {
        return Err(SurvivalError::EnvironmentTooShort {
            needed: right,
            available: env.last_position(),
        });
    }
    let traps = traps_between(env, left, right);
    Ok(log_exit_with_traps(
        left as i64,
        start as i64,
        right as i64,
        &traps,
        beta,
        landing,
    ))
}

/// Crossing from trap `i` to trap `j` without returning to `τ_i` and
/// without being killed.
pub fn crossing_probability(
    env: &Environment,
    i: usize,
    j: usize,
    beta: f64,
) -> Result<CrossingResult, SurvivalError> {
    crossing_probability_with(env, i, j, beta, Landing::Survive)
}

pub fn crossing_probability_with(
    env: &Environment,
    i: usize,
    j: usize,
    beta: f64,
    landing: Landing,
) -> Result<CrossingResult, SurvivalError> {
    if i >= j {
        return Err(SurvivalError::IndexOrder { i, j });
    }
    if j > env.len() {
        return Err(SurvivalError::IndexOutOfRange {
            index: j,
            last: env.len(),
        });
    }
    let pos = env.positions();
    let log_p = exit_probability(env, pos[i], pos[i], pos[j], beta, landing)?;
    Ok(CrossingResult {
        log_p,
        per_trap_cost: -log_p / (j - i) as f64,
    })
}

/// `Z(0, ℓ) = -ln P(H_{τ_ℓ} < H_0 ∧ σ)` for `ℓ = 1..=ell_max` in one sweep.
pub fn crossing_profile(
    env: &Environment,
    beta: f64,
    ell_max: usize,
) -> Result<Vec<f64>, SurvivalError> {
    check_beta(beta)?;
    if ell_max == 0 {
        return Err(SurvivalError::InvalidParameter("ell_max must be >= 1".into()));
    }
    if ell_max > env.len() {
        return Err(SurvivalError::IndexOutOfRange {
            index: ell_max,
            last: env.len(),
        });
    }
    let mut sweep = HarmonicSweep::new(0, beta);
    let mut costs = Vec::with_capacity(ell_max);
    for &p in &env.positions()[1..=ell_max] {
        let p = p as i64;
        // landing at τ_ℓ charged: h(τ_ℓ) = g(τ_ℓ) e^{β}
        let log_h_target = sweep.log_g_ahead(p) + beta;
        costs.push(LN_2 + log_h_target);
        sweep.advance(p, true);
    }
    Ok(costs)
}

/// One environment draw and `(ℓ, λ(ℓ, β))` for `ℓ = 1..=ell_max`.
pub fn lambda_sequence<R: Rng + ?Sized>(
    law: &GapLaw,
    beta: f64,
    ell_max: usize,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>, SurvivalError> {
    let env = crate::env::sample_environment(law, ell_max.max(1), rng)?;
    Ok(crossing_profile(&env, beta, ell_max)?
        .into_iter()
        .enumerate()
        .map(|(k, z)| (k + 1, z / (k + 1) as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    /// Site-by-site Thomas solve of the harmonic system on (left, right).
    fn tridiagonal_exit(
        left: i64,
        start: i64,
        right: i64,
        kill_at: impl Fn(i64) -> f64,
        landing_kill: f64,
    ) -> f64 {
        // unknowns h(left+1..right-1); h(left)=0, h(right)=1
        let m = (right - left - 1) as usize;
        if m == 0 {
            return 0.5 * landing_kill;
        }
        let c = |x: i64| if x == right { landing_kill } else { kill_at(x) };
        // h(x) - ½c(x+1)h(x+1) - ½c(x-1)h(x-1) = 0
        let mut diag = vec![1.0; m];
        let mut upper = vec![0.0; m];
        let mut lower = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for k in 0..m {
            let x = left + 1 + k as i64;
            if k + 1 < m {
                upper[k] = -0.5 * c(x + 1);
            } else {
                rhs[k] = 0.5 * c(x + 1);
            }
            if k > 0 {
                lower[k] = -0.5 * c(x - 1);
            }
        }
        for k in 1..m {
            let w = lower[k] / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        let mut h = vec![0.0; m];
        h[m - 1] = rhs[m - 1] / diag[m - 1];
        for k in (0..m - 1).rev() {
            h[k] = (rhs[k] - upper[k] * h[k + 1]) / diag[k];
        }
        if start == left {
            0.5 * c(left + 1) * h[0]
        } else {
            h[(start - left - 1) as usize]
        }
    }

    #[test]
    fn exit_anchor_free_walk() {
        for t in [1u64, 2, 3, 10, 57, 1000] {
            let env = Environment::from_gaps(vec![t]).unwrap();
            if t >= 2 {
                let p = exit_probability(&env, 1, 0, t, 0.0, Landing::Survive).unwrap();
                assert!((p.exp() - 1.0 / t as f64).abs() < 1e-12);
            }
            let c = crossing_probability(&env, 0, 1, 0.0).unwrap();
            assert!((c.log_p.exp() - 0.5 / t as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn single_gap_cost_is_beta_plus_log_two_t() {
        for &beta in &[0.1, 1.0, 3.0] {
            for t in [1u64, 4, 999] {
                let env = Environment::from_gaps(vec![t, 5]).unwrap();
                let c = crossing_probability(&env, 0, 1, beta).unwrap();
                let expected = beta + (2.0 * t as f64).ln();
                assert!((c.per_trap_cost - expected).abs() < 1e-12);
                let free = crossing_probability_with(&env, 0, 1, beta, Landing::Free).unwrap();
                assert!((free.per_trap_cost - (2.0 * t as f64).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweep_matches_tridiagonal_solve() {
        let law = GapLaw::discrete_pareto(1.2).unwrap();
        for seed in 0..20u64 {
            let mut rng = stream(seed, "crossing-test", 0);
            let env = crate::env::sample_environment(&law, 12, &mut rng).unwrap();
            let right = env.positions()[8];
            if right > 3000 {
                continue;
            }
            let beta = 0.3 + seed as f64 * 0.1;
            let kill = |x: i64| {
                if env.is_trap(x as u64) {
                    (-beta).exp()
                } else {
                    1.0
                }
            };
            let left = env.positions()[2];
            for start in [left, left + 1, (left + right) / 2, right - 1] {
                if start >= right {
                    continue;
                }
                let got =
                    exit_probability(&env, start, left, right, beta, Landing::Survive).unwrap();
                let want = tridiagonal_exit(
                    left as i64,
                    start as i64,
                    right as i64,
                    kill,
                    (-beta).exp(),
                );
                assert!(
                    (got - want.ln()).abs() < 1e-10,
                    "seed {seed} start {start}: {got} vs {}",
                    want.ln()
                );
            }
        }
    }

    #[test]
    fn profile_matches_individual_crossings() {
        let law = GapLaw::discrete_pareto(1.0).unwrap();
        let env = crate::env::sample_environment(&law, 40, &mut stream(5, "env", 0)).unwrap();
        let profile = crossing_profile(&env, 0.7, 40).unwrap();
        for ell in [1usize, 2, 17, 40] {
            let c = crossing_probability(&env, 0, ell, 0.7).unwrap();
            assert!((profile[ell - 1] + c.log_p).abs() < 1e-10 * (1.0 + c.log_p.abs()));
        }
    }

    #[test]
    fn index_errors() {
        let env = Environment::from_gaps(vec![2, 3]).unwrap();
        assert_eq!(
            crossing_probability(&env, 1, 1, 1.0),
            Err(SurvivalError::IndexOrder { i: 1, j: 1 })
        );
        assert!(matches!(
            crossing_probability(&env, 0, 3, 1.0),
            Err(SurvivalError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn long_heavy_tailed_sweep_stays_finite() {
        let law = GapLaw::discrete_pareto(0.5).unwrap();
        let env = crate::env::sample_environment(&law, 20_000, &mut stream(9, "env", 0)).unwrap();
        let profile = crossing_profile(&env, 2.0, 20_000).unwrap();
        assert!(profile.iter().all(|z| z.is_finite()));
        assert!(profile.windows(2).all(|w| w[1] >= w[0]));
    }
}
