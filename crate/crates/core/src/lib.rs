//! Quenched survival of a one-dimensional simple random walk among soft
//! traps placed by a heavy-tailed renewal process.
//!
//! The crate is split along the objects it computes:
//!
//! * [`env`] samples trap environments, records and rescaled point measures.
//! * [`survival`] holds the exact transfer-matrix kernels: survival
//!   probabilities, crossing costs, confinement and the FKG comparison.
//! * [`limit`] realizes the Poisson point process limit law and its tail.
//! * [`periodic`] computes decay rates among periodic traps.
//! * [`stats`] orchestrates experiments and goodness-of-fit checks.

pub mod env;
pub mod limit;
pub mod periodic;
pub mod rng;
pub mod special;
pub mod stats;
pub mod survival;

pub use env::{Environment, GapLaw, LawKind, PointMeasure, RecordSequence};
pub use limit::{LimitParams, LimitSample};
pub use periodic::{LaplaceMatrix, PeriodicSpec, PhiResult};
pub use survival::{CrossingResult, Landing, SurvivalParams, SurvivalResult};
