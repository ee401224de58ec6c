//! Survival probability `Z_n = P^β(σ ∧ H_{Z^-} > n)` by forward propagation
//! of the sub-stochastic kernel
//! `w_{k+1}(x) = ½ (w_k(x-1) + w_k(x+1)) e^{-β 1{x ∈ τ}}`, `x >= 1`.
//!
//! Only sites of the current parity carry mass, so they are stored in two
//! half-size arrays (even and odd sites).
//!
//! The profile routinely spans far more than the range of an `f64`: a walker
//! parked in a small gap near the origin and one that paid to reach a large
//! gap further out differ by `e^{-1000}` early on, and the second one wins
//! later. A single scale factor would flush the far mass to zero for good.
//! Each block of sites therefore carries its own exponent. Blocks are sized
//! so that a profile falling by `2e^β` per site still fits in one `f64`
//! range. A neighbor block only feeds one edge entry, so it is weighed by
//! that entry and not by its own maximum.
//!
//! Pruning is absolute: mass below `drop_threshold` times an a priori
//! estimate of `Z_n` is removed and summed. The kernel is sub-stochastic, so
//! removed mass could have added at most itself to `Z_n`, which gives the
//! rigorous bound reported in [`SurvivalResult::log_error_bound`].

use std::f64::consts::LN_2;

use super::crossing::crossing_profile;
use super::{check_beta, SurvivalError, SurvivalParams, SurvivalResult};
use crate::env::{compute_records, Environment};

/// Default pruning threshold, relative to the a priori estimate of `Z_n`.
pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-30;

/// A run whose error bound exceeds this is repeated with a lower cut.
const RETRY_ABOVE: f64 = 1e-10;
const MAX_TRIES: usize = 4;

/// Largest log-range a block may need to hold.
const BLOCK_LOG_RANGE: f64 = 300.0;

/// Renormalize a block once its maximum drops below this.
const RENORM_BELOW: f64 = 1e-100;

/// Inclusive range of array indices.
#[derive(Clone, Copy)]
struct Span {
    lo: usize,
    hi: usize,
}

pub fn log_survival_probability(
    env: &Environment,
    params: &SurvivalParams,
) -> Result<SurvivalResult, SurvivalError> {
    check_beta(params.beta)?;
    if params.n == 0 {
        return Err(SurvivalError::InvalidParameter("n must be at least 1".into()));
    }
    if !(params.drop_threshold >= 0.0 && params.drop_threshold < 1.0) {
        return Err(SurvivalError::InvalidParameter(format!(
            "drop threshold must lie in [0, 1), got {}",
            params.drop_threshold
        )));
    }
    if env.last_position() < 1 {
        return Err(SurvivalError::EnvironmentTooShort {
            needed: 1,
            available: env.last_position(),
        });
    }
    if params.drop_threshold == 0.0 {
        return Propagator::new(env, params).run(f64::NEG_INFINITY);
    }
    let estimate = a_priori_log_z(env, params.beta, params.n)?;
    let mut cut = estimate + params.drop_threshold.ln();
    let mut tries = 0;
    loop {
        let result = Propagator::new(env, params).run(cut)?;
        tries += 1;
        if result.log_error_bound <= RETRY_ABOVE || tries == MAX_TRIES {
            return Ok(result);
        }
        cut -= 100.0 + cut.abs();
    }
}

/// Rough value of `ln Z_n`: the cheapest "cross to a record gap, then stay
/// inside it" strategy, `max_ℓ -(Z(0, ℓ-1) + n g(T_ℓ))`. Falls back to the
/// weight of a single zig-zag path.
fn a_priori_log_z(env: &Environment, beta: f64, n: u64) -> Result<f64, SurvivalError> {
    let zigzag = -(n as f64) * (beta + LN_2);
    let records = compute_records(env);
    let reachable: Vec<(usize, u64)> = records
        .record_indexes
        .iter()
        .zip(&records.record_gaps)
        .zip(&records.record_positions)
        .filter(|&(_, &pos)| pos < n)
        .map(|((&i, &t), _)| (i, t))
        .collect();
    let deepest = reachable.iter().map(|&(i, _)| i).max().unwrap_or(0);
    let costs = if deepest > 0 {
        crossing_profile(env, beta, deepest)?
    } else {
        Vec::new()
    };
    let best = reachable
        .iter()
        .filter(|&&(_, t)| t >= 3)
        .map(|&(i, t)| {
            let cross = if i == 0 { 0.0 } else { costs[i - 1] };
            let g = -(std::f64::consts::PI / t as f64).cos().ln();
            -(cross + n as f64 * g)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.max(zigzag).min(0.0))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct Propagator<'a> {
    params: &'a SurvivalParams,
    available: u64,
    block: usize,
    kills: [Vec<f64>; 2],
    vals: [Vec<f64>; 2],
    /// Natural-log exponent per block; `-∞` for empty blocks.
    exps: [Vec<f64>; 2],
    written: [Span; 2],
}

impl<'a> Propagator<'a> {
    fn new(env: &Environment, params: &'a SurvivalParams) -> Self {
        let available = env.last_position();
        let limit = params.n.min(available);
        let kill = (-params.beta).exp();
        let block = ((BLOCK_LOG_RANGE / 2.0 / (params.beta + LN_2)) as usize).clamp(1, 256);
        let half = (limit / 2 + 2) as usize;
        let len = half.div_ceil(block) * block + block;
        let mut kills = [vec![1.0f64; len], vec![1.0f64; len]];
        for &p in env.positions().iter().take_while(|&&p| p <= limit) {
            kills[(p % 2) as usize][(p / 2) as usize] = kill;
        }
        let blocks = len / block + 1;
        Self {
            params,
            available,
            block,
            kills,
            vals: [vec![0.0; len], vec![0.0; len]],
            exps: [vec![f64::NEG_INFINITY; blocks], vec![f64::NEG_INFINITY; blocks]],
            written: [Span { lo: 1, hi: 0 }; 2],
        }
    }

    /// Propagate to time `n`, dropping mass whose absolute weight is below
    /// `e^{cut}`.
    fn run(mut self, cut: f64) -> Result<SurvivalResult, SurvivalError> {
        let n = self.params.n;
        // step 1: only 0 -> 1 survives the wall
        self.vals[1][0] = 0.5 * self.kills[1][0];
        self.exps[1][0] = 0.0;
        self.written[1] = Span { lo: 0, hi: 0 };
        let mut span = Span { lo: 0, hi: 0 };
        let mut pruned = f64::NEG_INFINITY;
        let mut max_window = 1usize;

        for k in 1..n {
            let src_parity = (k % 2) as usize;
            let dst_parity = 1 - src_parity;
            let base = src_parity as u64;
            let lo_site = 2 * span.lo as u64 + base;
            let hi_site = 2 * span.hi as u64 + base;
            let new_lo_site = if lo_site <= 1 { lo_site + 1 } else { lo_site - 1 };
            let new_hi_site = hi_site + 1;
            if new_hi_site > self.available {
                return Err(SurvivalError::EnvironmentTooShort {
                    needed: new_hi_site,
                    available: self.available,
                });
            }
            let jlo = (new_lo_site / 2) as usize;
            let jhi = (new_hi_site / 2) as usize;
            pruned = log_add(pruned, self.step(dst_parity, jlo, jhi, cut));

            let dst = &self.vals[dst_parity];
            let (mut lo, mut hi) = (jlo, jhi);
            while lo < hi && dst[lo] == 0.0 {
                lo += 1;
            }
            while hi > lo && dst[hi] == 0.0 {
                hi -= 1;
            }
            if dst[lo] == 0.0 {
                // everything was pruned
                return Ok(self.finish(f64::NEG_INFINITY, pruned, max_window));
            }
            span = Span { lo, hi };
            max_window = max_window.max(hi - lo + 1);
        }

        let parity = (n % 2) as usize;
        let mut log_total = f64::NEG_INFINITY;
        for b in span.lo / self.block..=span.hi / self.block {
            let start = (b * self.block).max(span.lo);
            let end = ((b + 1) * self.block - 1).min(span.hi);
            let s: f64 = self.vals[parity][start..=end].iter().sum();
            if s > 0.0 {
                log_total = log_add(log_total, s.ln() + self.exps[parity][b]);
            }
        }
        Ok(self.finish(log_total, pruned, max_window))
    }

    /// Fill `dst_parity` on `[jlo, jhi]` from the other parity. Returns the
    /// log of the mass dropped.
    fn step(&mut self, dst_parity: usize, jlo: usize, jhi: usize, cut: f64) -> f64 {
        let bsz = self.block;
        let (src_vals, dst_vals) = split_pair(&mut self.vals, dst_parity);
        let (src_exps, dst_exps) = split_pair(&mut self.exps, dst_parity);
        let kill = &self.kills[dst_parity];

        // stale entries and exponents from two steps ago
        let stale = self.written[dst_parity];
        if stale.lo <= stale.hi {
            for j in stale.lo..=stale.hi {
                if j < jlo || j > jhi {
                    dst_vals[j] = 0.0;
                }
            }
            for b in stale.lo / bsz..=stale.hi / bsz {
                if b < jlo / bsz || b > jhi / bsz {
                    dst_exps[b] = f64::NEG_INFINITY;
                }
            }
        }
        self.written[dst_parity] = Span { lo: jlo, hi: jhi };

        // even site 2j reads odd j-1 and j; odd site 2j+1 reads even j and j+1
        let even = dst_parity == 0;
        let mut pruned = f64::NEG_INFINITY;
        for b in jlo / bsz..=jhi / bsz {
            let first = b * bsz;
            let last = first + bsz - 1;
            let s = first.max(jlo);
            let e = last.min(jhi);
            let neighbor = if even {
                (s == first && b > 0).then(|| b - 1)
            } else {
                (e == last).then_some(b + 1)
            };
            // the neighbor only feeds one edge entry, so weigh it by that entry
            let own = src_exps[b];
            let (edge_src, other) = match neighbor {
                Some(nb) => {
                    let idx = if even { s - 1 } else { e + 1 };
                    let v = src_vals[idx];
                    let log = if v > 0.0 { src_exps[nb] + v.ln() } else { f64::NEG_INFINITY };
                    (idx, log)
                }
                None => (usize::MAX, f64::NEG_INFINITY),
            };
            let top = own.max(other);
            if top == f64::NEG_INFINITY {
                dst_vals[s..=e].iter_mut().for_each(|v| *v = 0.0);
                dst_exps[b] = f64::NEG_INFINITY;
                continue;
            }
            let f_own = (own - top).exp();
            let edge_term = (other - top).exp();
            let out = &mut dst_vals[s..=e];
            if even {
                let left = if edge_src == s - 1 { edge_term } else { src_vals[s - 1] * f_own };
                out[0] = 0.5 * (left + src_vals[s] * f_own) * kill[s];
                for (i, v) in out.iter_mut().enumerate().skip(1) {
                    let j = s + i;
                    *v = 0.5 * (src_vals[j - 1] + src_vals[j]) * f_own * kill[j];
                }
            } else {
                let m = e - s;
                for (i, v) in out[..m].iter_mut().enumerate() {
                    let j = s + i;
                    *v = 0.5 * (src_vals[j] + src_vals[j + 1]) * f_own * kill[j];
                }
                let right = if edge_src == e + 1 { edge_term } else { src_vals[e + 1] * f_own };
                out[m] = 0.5 * (src_vals[e] * f_own + right) * kill[e];
            }

            let threshold = (cut - top).exp();
            let mut max = 0.0f64;
            let mut dropped = 0.0f64;
            for v in out.iter_mut() {
                if *v < threshold {
                    dropped += *v;
                    *v = 0.0;
                } else if *v > max {
                    max = *v;
                }
            }
            if dropped > 0.0 {
                pruned = log_add(pruned, dropped.ln() + top);
            }
            if max == 0.0 {
                dst_exps[b] = f64::NEG_INFINITY;
            } else if max < RENORM_BELOW {
                let inv = 1.0 / max;
                out.iter_mut().for_each(|v| *v *= inv);
                dst_exps[b] = top + max.ln();
            } else {
                dst_exps[b] = top;
            }
        }
        pruned
    }

    fn finish(&self, log_z: f64, pruned: f64, max_window: usize) -> SurvivalResult {
        let scale = self.params.scale();
        let log_error_bound = if pruned == f64::NEG_INFINITY {
            0.0
        } else if log_z == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (pruned - log_z).exp().ln_1p()
        };
        SurvivalResult {
            log_z,
            free_energy: -log_z / scale,
            scale,
            log_error_bound,
            max_window,
        }
    }
}

/// `(other parity, dst parity)` borrowed disjointly.
fn split_pair<T>(pair: &mut [T; 2], dst: usize) -> (&T, &mut T) {
    let (a, b) = pair.split_at_mut(1);
    if dst == 0 {
        (&b[0], &mut a[0])
    } else {
        (&a[0], &mut b[0])
    }
}
