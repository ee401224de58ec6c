//! Exact transfer-matrix computations for the killed walk.
//!
//! Conventions shared by every kernel here:
//!
//! * a visit to a trap at any time `k >= 1` multiplies the weight by
//!   `e^{-β}`; the starting site is never charged;
//! * arrival at the target of a crossing event is a visit, so it is charged
//!   too ([`Landing::Survive`]). [`Landing::Free`] drops that last factor and
//!   exists for sensitivity checks.

use serde::Serialize;
use thiserror::Error;

mod confine;
mod crossing;
mod dp;
mod fkg;
mod two_sided;

pub use confine::{confined_survival_probability, ConfinedResult};
pub use crossing::{
    crossing_probability, crossing_probability_with, crossing_profile, exit_probability,
    lambda_sequence, HarmonicSweep,
};
pub use dp::{log_survival_probability, DEFAULT_DROP_THRESHOLD};
pub use fkg::{fkg_compare, FkgComparison};
pub use two_sided::{lambda_two_sided, two_sided_log_probability, TwoSidedEstimate};

#[derive(Debug, Error, PartialEq)]
pub enum SurvivalError {
    #[error("environment ends at {available} but the computation needs site {needed}")]
    EnvironmentTooShort { needed: u64, available: u64 },
    #[error("crossing needs i < j, got i = {i}, j = {j}")]
    IndexOrder { i: usize, j: usize },
    #[error("trap index {index} is past the last trap ({last})")]
    IndexOutOfRange { index: usize, last: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncation bound {bound:e} exceeds tolerance {tolerance:e}")]
    TruncationTooCoarse { bound: f64, tolerance: f64 },
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
}

/// Whether the arrival at the target of a crossing must itself be survived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Landing {
    #[default]
    Survive,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalParams {
    /// Killing strength; `0` means no killing.
    pub beta: f64,
    /// Time horizon.
    pub n: u64,
    /// Relative pruning threshold; `0` disables deliberate pruning.
    pub drop_threshold: f64,
    /// Tail exponent of the environment, used for `N = n^{γ/(γ+2)}`.
    pub gamma: f64,
}

impl SurvivalParams {
    pub fn new(beta: f64, n: u64, gamma: f64) -> Self {
        Self {
            beta,
            n,
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            gamma,
        }
    }

    pub fn exact(beta: f64, n: u64, gamma: f64) -> Self {
        Self {
            drop_threshold: 0.0,
            ..Self::new(beta, n, gamma)
        }
    }

    /// `N = n^{γ/(γ+2)}`, kept real.
    pub fn scale(&self) -> f64 {
        scale_for(self.n, self.gamma)
    }
}

/// `N = n^{γ/(γ+2)}`.
pub fn scale_for(n: u64, gamma: f64) -> f64 {
    (n as f64).powf(gamma / (gamma + 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalResult {
    /// `ln Z_n`.
    pub log_z: f64,
    /// `F_n = -ln Z_n / N`.
    pub free_energy: f64,
    /// `N`.
    pub scale: f64,
    /// Bound on `ln Z_true - log_z` (the computed value never exceeds the truth).
    pub log_error_bound: f64,
    /// Largest number of sites held at once.
    pub max_window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingResult {
    /// `ln P_{τ_i}(H_{τ_j} < H_{τ_i} ∧ σ)`.
    pub log_p: f64,
    /// `-log_p / (j - i)`.
    pub per_trap_cost: f64,
}

/// Exponential rate of confinement in a gap of width `t`: `-ln cos(π/t)`.
pub fn small_ball_rate(t: u64) -> Result<f64, SurvivalError> {
    if t < 3 {
        return Err(SurvivalError::InvalidParameter(format!(
            "small-ball rate needs t >= 3, got {t}"
        )));
    }
    Ok(-(std::f64::consts::PI / t as f64).cos().ln())
}

pub(crate) fn check_beta(beta: f64) -> Result<(), SurvivalError> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(SurvivalError::InvalidParameter(format!(
            "beta must be finite and non-negative, got {beta}"
        )))
    }
}
