//! Experiment orchestration and goodness-of-fit checks.

mod experiment;
mod gap_score;
mod ks;
mod lambda;
mod records;

use thiserror::Error;

pub use experiment::{
    convergence_experiment, ConvergenceReport, ExperimentConfig, HorizonReport, LambdaSource,
};
pub use gap_score::{gap_score_profile, GapScore};
pub use ks::{dkw_band, ks_distance, ks_two_sample, two_sample_critical, KsResult};
pub use lambda::{estimate_lambda, LambdaEstimate};
pub use records::{
    product_bound_check, record_ratio_table, records_statistics, records_tail_exponent,
    ProductBoundRow, RecordsReport, TailRow,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample is not sorted at index {0}")]
    Unsorted(usize),
    #[error(transparent)]
    Survival(#[from] crate::survival::SurvivalError),
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error(transparent)]
    Limit(#[from] crate::limit::LimitError),
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}
