//! Bounds, consistency conditions, Monte-Carlo error and rate fits.

mod bounds;
mod conditions;
mod mse;
mod rate;
mod trace;

use thiserror::Error;

pub use bounds::{
    basis_deployment_integral, deployment_integrals, mse_bound_from_parts, mse_upper_bound, BoundReport,
    ExtendedReal, DIVERGENCE_PROBES,
};
pub use conditions::{
    check_consistency_conditions, validate_as_schedule, AsScheduleReport, ConsistencyReport, KernelCheckRow,
    KERNEL_CHECK_M,
};
pub use mse::{integrated_squared_error, squared_error_with_norm, LargeN, monte_carlo_mse, MsePoint, TrialPolicy};
pub use rate::{rate_fit, RateFitResult};
pub use trace::{as_error_trace, AsTraceResult, TraceCheckpoint, TraceSetup};

use crate::estimator::EstimatorError;
use crate::field_model::CoefficientError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("∫|φ_j|²/p_X diverges for j in {indices:?}")]
    Divergent { indices: Vec<usize> },
    #[error("rate fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("rate fit needs positive MSE values; entry {index} is {value}")]
    NonPositiveMse { index: usize, value: f64 },
    #[error("worker pool: {0}")]
    Pool(String),
}
