//! Decay rates of survival among periodic traps.
//!
//! Traps sit at the partial sums of a repeated gap pattern `(t_1, …, t_p)`.
//! Between two visits to the trap set the walk makes an excursion whose
//! length has Laplace transform `Q_{ij}(φ)`; the decay rate is the `φ` for
//! which the Perron root of `Q(φ)` equals `e^β`.
//!
//! Everything is parametrized by `Δ = arctan √(e^{2φ} − 1)`, i.e.
//! `cos Δ = e^{-φ}`. The singular boundary `φ = g(t_max)` is `Δ = π/t_max`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PeriodicError {
    #[error("gap pattern is empty")]
    EmptyPattern,
    #[error("gap {index} is zero")]
    ZeroGap { index: usize },
    #[error("phi = {phi} is outside [0, g(t_max)) = [0, {limit})")]
    PhiOutOfRange { phi: f64, limit: f64 },
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("gap {0} is too small for this operation")]
    GapTooSmall(u64),
    #[error("horizon {n} is below the minimum {min}")]
    HorizonTooShort { n: u64, min: u64 },
    #[error("pattern must be given as comma-separated positive integers: {0}")]
    Parse(String),
}

/// `g(t) = -ln cos(π/t)`; infinite for `t <= 2`.
pub fn g_rate(t: u64) -> f64 {
    if t <= 2 {
        f64::INFINITY
    } else {
        -(PI / t as f64).cos().ln()
    }
}

/// `Δ(φ) = arctan √(e^{2φ} − 1)`.
pub fn delta_of_phi(phi: f64) -> f64 {
    (2.0 * phi).exp_m1().sqrt().atan()
}

/// Inverse of [`delta_of_phi`].
pub fn phi_of_delta(delta: f64) -> f64 {
    -delta.cos().ln()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicSpec {
    gaps: Vec<u64>,
    period: u64,
    t_max: u64,
}

impl PeriodicSpec {
    pub fn new(gaps: Vec<u64>) -> Result<Self, PeriodicError> {
        if gaps.is_empty() {
            return Err(PeriodicError::EmptyPattern);
        }
        if let Some(index) = gaps.iter().position(|&t| t == 0) {
            return Err(PeriodicError::ZeroGap { index });
        }
        let period = gaps.iter().sum();
        let t_max = *gaps.iter().max().expect("non-empty");
        Ok(Self {
            gaps,
            period,
            t_max,
        })
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn t_max(&self) -> u64 {
        self.t_max
    }

    /// The same trap set read from the next trap.
    pub fn rotated(&self, k: usize) -> Self {
        let mut gaps = self.gaps.clone();
        let len = gaps.len();
        gaps.rotate_left(k % len);
        Self::new(gaps).expect("rotation keeps validity")
    }
}

impl std::str::FromStr for PeriodicSpec {
    type Err = PeriodicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let gaps = s
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PeriodicError::Parse(s.to_owned()))?;
        Self::new(gaps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceMatrix {
    pub phi: f64,
    pub delta: f64,
    pub entries: Vec<Vec<f64>>,
}

impl LaplaceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Transform of "leave a trap and first hit the other end of a gap of `t`".
fn cross(t: u64, delta: f64) -> f64 {
    if delta == 0.0 {
        0.5 / t as f64
    } else {
        delta.tan() / (2.0 * (t as f64 * delta).sin())
    }
}

/// Transform of "step into a gap of `t` and come back to the same trap".
fn back(t: u64, delta: f64) -> f64 {
    if delta == 0.0 {
        0.5 - 0.5 / t as f64
    } else {
        let td = t as f64 * delta;
        0.5 - 0.5 * delta.tan() * td.cos() / td.sin()
    }
}

fn matrix_at_delta(spec: &PeriodicSpec, delta: f64) -> Vec<Vec<f64>> {
    let p = spec.gaps.len();
    let mut q = vec![vec![0.0; p]; p];
    for i in 0..p {
        let right = spec.gaps[i];
        let left = spec.gaps[(i + p - 1) % p];
        q[i][(i + 1) % p] += cross(right, delta);
        q[i][(i + p - 1) % p] += cross(left, delta);
        q[i][i] += back(right, delta) + back(left, delta);
    }
    q
}

/// `Q(φ)` for the periodic trap set.
pub fn laplace_matrix(spec: &PeriodicSpec, phi: f64) -> Result<LaplaceMatrix, PeriodicError> {
    let limit = g_rate(spec.t_max);
    if !(phi >= 0.0 && phi < limit) {
        return Err(PeriodicError::PhiOutOfRange { phi, limit });
    }
    let delta = delta_of_phi(phi);
    if spec.t_max as f64 * delta >= PI {
        // rounding at the very edge of the domain
        return Err(PeriodicError::PhiOutOfRange { phi, limit });
    }
    Ok(LaplaceMatrix {
        phi,
        delta,
        entries: matrix_at_delta(spec, delta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronRoot {
    pub value: f64,
    /// `‖A v − ρ v‖ / ‖v‖` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

/// Perron root of a non-negative square matrix by power iteration.
///
/// Iterates on `A + I`, which has the same Perron vector and no eigenvalue
/// of equal modulus on the negative axis, so bipartite patterns converge.
pub fn perron_root(a: &[Vec<f64>]) -> PerronRoot {
    const MAX_ITER: usize = 1_000_000;
    let p = a.len();
    let apply = |v: &[f64], out: &mut [f64]| {
        for (i, row) in a.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(x, y)| x * y).sum();
        }
    };
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut av = vec![0.0; p];
    let mut last = f64::NAN;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        apply(&v, &mut av);
        let rho = v.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
        let next: Vec<f64> = v.iter().zip(&av).map(|(x, y)| x + y).collect();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        v = next.into_iter().map(|x| x / norm).collect();
        if (rho - last).abs() < 1e-14 * rho.abs().max(1.0) {
            break;
        }
        last = rho;
    }
    apply(&v, &mut av);
    let rho_final = v.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
    let residual = av
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - rho_final * y).powi(2))
        .sum::<f64>()
        .sqrt();
    PerronRoot {
        value: rho_final,
        residual,
        iterations,
    }
}

/// `Λ(φ)`, the Perron root of `Q(φ)`.
pub fn perron_of_phi(spec: &PeriodicSpec, phi: f64) -> Result<f64, PeriodicError> {
    Ok(perron_root(&laplace_matrix(spec, phi)?.entries).value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiResult {
    pub phi: f64,
    pub bracket: (f64, f64),
    pub perron_residual: f64,
}

fn check_beta(beta: f64) -> Result<(), PeriodicError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(PeriodicError::InvalidBeta(beta))
    }
}

/// Bisection in `Δ` on `[0, π/t_max)` for an increasing `f` with
/// `f(0) < target` and `f → ∞` at the right end. The right end itself is
/// never evaluated.
fn bisect_delta(t_max: u64, target: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = PI / t_max as f64;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || phi_of_delta(hi) - phi_of_delta(lo) <= 1e-13 {
            return (lo, hi);
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Solve `Λ(φ) = e^β` for the periodic pattern.
pub fn phi_periodic(spec: &PeriodicSpec, beta: f64) -> Result<PhiResult, PeriodicError> {
    check_beta(beta)?;
    if spec.t_max < 2 {
        return Err(PeriodicError::GapTooSmall(spec.t_max));
    }
    let target = beta.exp();
    let (lo, hi) = bisect_delta(spec.t_max, target, |d| {
        perron_root(&matrix_at_delta(spec, d)).value
    });
    let delta = 0.5 * (lo + hi);
    let root = perron_root(&matrix_at_delta(spec, delta));
    Ok(PhiResult {
        phi: phi_of_delta(delta),
        bracket: (phi_of_delta(lo), phi_of_delta(hi)),
        perron_residual: root.residual,
    })
}

/// Decay rate among traps at every `t`-th site: the root of
/// `1 + tan Δ · tan(tΔ/2) = e^β`.
pub fn phi_homogeneous(t: u64, beta: f64) -> Result<f64, PeriodicError> {
    check_beta(beta)?;
    if t < 2 {
        return Err(PeriodicError::GapTooSmall(t));
    }
    let (lo, hi) = bisect_delta(t, beta.exp(), |d| {
        1.0 + d.tan() * (0.5 * t as f64 * d).tan()
    });
    Ok(phi_of_delta(0.5 * (lo + hi)))
}

/// First-order prediction `π²/(2t²) (1 − 4/((e^β − 1) t))`.
pub fn phi_first_order(t: u64, beta: f64) -> f64 {
    let t = t as f64;
    PI * PI / (2.0 * t * t) * (1.0 - 4.0 / (beta.exp_m1() * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub rate: f64,
    /// Change of the estimator over its last two iterates.
    pub error_estimate: f64,
}

/// Decay rate read off the killed walk on the cycle of residues modulo the
/// period, started on a trap. Uses `-½ ln(Z_n / Z_{n-2})`.
pub fn periodic_decay_rate(
    spec: &PeriodicSpec,
    beta: f64,
    n: u64,
) -> Result<DecayEstimate, PeriodicError> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(PeriodicError::InvalidBeta(beta));
    }
    if spec.period == 1 {
        return Err(PeriodicError::GapTooSmall(1));
    }
    let min = (2 * spec.period * spec.period).max(4);
    if n < min {
        return Err(PeriodicError::HorizonTooShort { n, min });
    }
    let len = spec.period as usize;
    let mut kill = vec![1.0; len];
    let mut pos = 0usize;
    let c = (-beta).exp();
    for &t in &spec.gaps {
        kill[pos] = c;
        pos += t as usize;
    }
    let mut cur = vec![0.0; len];
    let mut next = vec![0.0; len];
    cur[0] = 1.0;
    let mut log_scale = 0.0;
    // log Z at times k, k-1, k-2, k-3, k-4
    let mut hist = [f64::NAN; 5];
    for k in 1..=n {
        for x in 0..len {
            let l = cur[(x + len - 1) % len];
            let r = cur[(x + 1) % len];
            next[x] = 0.5 * (l + r) * kill[x];
        }
        std::mem::swap(&mut cur, &mut next);
        let total: f64 = cur.iter().sum();
        if k + 4 >= n {
            hist.rotate_right(1);
            hist[0] = log_scale + total.ln();
        }
        if total < 1e-200 {
            cur.iter_mut().for_each(|v| *v /= total);
            log_scale += total.ln();
        }
    }
    let rate = -0.5 * (hist[0] - hist[2]);
    let previous = -0.5 * (hist[2] - hist[4]);
    Ok(DecayEstimate {
        rate,
        error_estimate: (rate - previous).abs(),
    })
}
