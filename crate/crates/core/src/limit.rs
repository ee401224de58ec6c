//! The limiting variational law `F = inf_{(x,y) ∈ Π} { λx + π²/(2y²) }`,
//! where `Π` is a Poisson process on `[0, ∞) × (0, ∞)` with intensity
//! `dx ⊗ c γ y^{-(γ+1)} dy` (so `[0, 1] × [y, ∞)` has mass `c y^{-γ}`).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use thiserror::Error;

use crate::env::PointMeasure;

#[derive(Debug, Error, PartialEq)]
pub enum LimitError {
    #[error("limit parameters must be positive and finite: {0}")]
    InvalidParams(String),
    #[error("ψ needs y > 0, got {0}")]
    NonPositiveY(f64),
    #[error("point measure has no point in the requested window")]
    EmptyMeasure,
    #[error("tail is defined for u >= 0, got {0}")]
    NegativeArgument(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitParams {
    pub lambda: f64,
    pub gamma: f64,
    /// Tail constant of the gap law: the intensity mass of `[0,1] × [1,∞)`.
    pub c_tau: f64,
}

impl LimitParams {
    pub fn new(lambda: f64, gamma: f64, c_tau: f64) -> Result<Self, LimitError> {
        for (name, v) in [("lambda", lambda), ("gamma", gamma), ("c_tau", c_tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LimitError::InvalidParams(format!("{name} = {v}")));
            }
        }
        Ok(Self {
            lambda,
            gamma,
            c_tau,
        })
    }

    fn psi(&self, x: f64, y: f64) -> f64 {
        self.lambda * x + PI * PI / (2.0 * y * y)
    }

    /// `p([x_a, x_b) × [y_a, y_b))`.
    pub fn intensity_mass(&self, x_a: f64, x_b: f64, y_a: f64, y_b: f64) -> f64 {
        let upper = if y_b.is_finite() {
            y_b.powf(-self.gamma)
        } else {
            0.0
        };
        (x_b - x_a).max(0.0) * self.c_tau * (y_a.powf(-self.gamma) - upper).max(0.0)
    }
}

/// `ψ^λ(x, y) = λx + π²/(2y²)`.
pub fn psi_value(params: &LimitParams, x: f64, y: f64) -> Result<f64, LimitError> {
    if !(y > 0.0) {
        return Err(LimitError::NonPositiveY(y));
    }
    Ok(params.psi(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Infimum {
    pub value: f64,
    pub argmin: (f64, f64),
    /// Other points reaching exactly the same value.
    pub ties: usize,
}

/// Optional compact restriction `[0, x_max] × [y_min, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_max: f64,
    pub y_min: f64,
}

/// Exact minimum of ψ over the points of `mu` (inside `window`, if given).
/// Ties are broken by smallest `x`, then smallest `y`.
pub fn infimum_over_measure(
    params: &LimitParams,
    mu: &PointMeasure,
    window: Option<Window>,
) -> Result<Infimum, LimitError> {
    infimum_over_points(params, mu.points.iter().copied(), window)
}

fn infimum_over_points(
    params: &LimitParams,
    points: impl Iterator<Item = (f64, f64)>,
    window: Option<Window>,
) -> Result<Infimum, LimitError> {
    let mut best: Option<Infimum> = None;
    for (x, y) in points {
        if let Some(w) = window {
            if x > w.x_max || y < w.y_min {
                continue;
            }
        }
        let v = psi_value(params, x, y)?;
        match &mut best {
            None => {
                best = Some(Infimum {
                    value: v,
                    argmin: (x, y),
                    ties: 0,
                })
            }
            Some(b) => {
                if v < b.value {
                    *b = Infimum {
                        value: v,
                        argmin: (x, y),
                        ties: 0,
                    };
                } else if v == b.value {
                    b.ties += 1;
                    if (x, y) < b.argmin {
                        b.argmin = (x, y);
                    }
                }
            }
        }
    }
    best.ok_or(LimitError::EmptyMeasure)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSample {
    pub f_value: f64,
    pub minimizer: (f64, f64),
    pub points_examined: usize,
    pub ties: usize,
}

/// Points of `Π` in `[x_a, x_b) × [y_a, y_b)` (`y_b` may be infinite).
pub fn sample_rectangle<R: Rng + ?Sized>(
    params: &LimitParams,
    x_a: f64,
    x_b: f64,
    y_a: f64,
    y_b: f64,
    rng: &mut R,
    out: &mut Vec<(f64, f64)>,
) {
    let mass = params.intensity_mass(x_a, x_b, y_a, y_b);
    if !(mass > 0.0) {
        return;
    }
    let count = Poisson::new(mass).expect("positive finite mass").sample(rng) as usize;
    let low = y_a.powf(-params.gamma);
    let high = if y_b.is_finite() {
        y_b.powf(-params.gamma)
    } else {
        0.0
    };
    for _ in 0..count {
        let x = x_a + rng.random::<f64>() * (x_b - x_a);
        // truncated Pareto by inversion of y^{-γ}
        let y = (low - rng.random::<f64>() * (low - high)).powf(-1.0 / params.gamma);
        out.push((x, y));
    }
}

/// All points of `Π` in `[0, x_max) × [y_min, ∞)`.
pub fn sample_region<R: Rng + ?Sized>(
    params: &LimitParams,
    x_max: f64,
    y_min: f64,
    rng: &mut R,
) -> PointMeasure {
    let mut points = Vec::new();
    sample_rectangle(params, 0.0, x_max, y_min, f64::INFINITY, rng, &mut points);
    PointMeasure::new(points)
}

/// Exact draw of `F` by revealing `Π` only where it can matter.
///
/// 1. The leftmost point with `y >= 1` has `x ~ Exp(c)` and `y ~ Pareto(γ)`
///    on `[1, ∞)`; let `u0` be its ψ-value.
/// 2. Any point with `ψ <= u0` lies in `B = [0, u0/λ] × [π/√(2 u0), ∞)`.
///    The strip `[0, x0) × [1, ∞)` is known to be empty, so the unknown part
///    of `B` is `(x0, u0/λ] × [max(y_lo, 1), ∞)` plus, when `y_lo < 1`,
///    `[0, u0/λ] × [y_lo, 1)`. These two rectangles are disjoint.
/// 3. `F` is the smallest ψ among the revealed points; every unrevealed
///    point has ψ > u0.
pub fn sample_limit_f<R: Rng + ?Sized>(params: &LimitParams, rng: &mut R) -> LimitSample {
    let x0 = -(1.0 - rng.random::<f64>()).ln() / params.c_tau;
    let y0 = (1.0 - rng.random::<f64>()).powf(-1.0 / params.gamma);
    let u0 = params.psi(x0, y0);
    let x_hi = u0 / params.lambda;
    let y_lo = PI / (2.0 * u0).sqrt();

    let mut points = vec![(x0, y0)];
    sample_rectangle(params, x0, x_hi, y_lo.max(1.0), f64::INFINITY, rng, &mut points);
    if y_lo < 1.0 {
        sample_rectangle(params, 0.0, x_hi, y_lo, 1.0, rng, &mut points);
    }
    let best = infimum_over_points(params, points.iter().copied(), None)
        .expect("the first point is always present");
    LimitSample {
        f_value: best.value,
        minimizer: best.argmin,
        points_examined: points.len(),
        ties: best.ties,
    }
}

/// `P(F >= u) = exp(-c (2u)^{γ/2+1} / (λ π^γ (γ+2)))`.
pub fn limit_tail_cdf(params: &LimitParams, u: f64) -> Result<f64, LimitError> {
    if !(u >= 0.0) {
        return Err(LimitError::NegativeArgument(u));
    }
    let g = params.gamma;
    Ok((-params.c_tau * (2.0 * u).powf(g / 2.0 + 1.0) / (params.lambda * PI.powf(g) * (g + 2.0)))
        .exp())
}

/// `P(F <= u)`.
pub fn limit_cdf(params: &LimitParams, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        1.0 - limit_tail_cdf(params, u).expect("u > 0")
    }
}

/// Inverse of the tail: the `u` with `P(F >= u) = tail`.
pub fn limit_tail_inverse(params: &LimitParams, tail: f64) -> f64 {
    let g = params.gamma;
    0.5 * (-tail.ln() * params.lambda * PI.powf(g) * (g + 2.0) / params.c_tau).powf(2.0 / (g + 2.0))
}

/// `p`-quantile of `F`.
pub fn limit_quantile(params: &LimitParams, p: f64) -> f64 {
    limit_tail_inverse(params, 1.0 - p)
}

/// Inverse-transform draw from the closed-form tail.
pub fn sample_limit_inverse<R: Rng + ?Sized>(params: &LimitParams, rng: &mut R) -> f64 {
    limit_tail_inverse(params, 1.0 - rng.random::<f64>())
}
