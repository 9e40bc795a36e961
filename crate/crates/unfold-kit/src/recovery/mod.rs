//! Recovery of true samples from folded ones.
//!
//! [`b2r2_recover`] peels the residual support from the outside in, one
//! index pair per pass, solving a support-constrained least-squares problem
//! on the out-of-band spectrum with projected gradient descent. The
//! Vandermonde and higher-order-difference routes are baselines;
//! [`brute_force_residual_oracle`] certifies small instances.

mod b2r2;
mod hod;
mod oracle;
mod pgd;
mod rounding;
mod vandermonde;

pub use b2r2::b2r2_recover;
pub use hod::{auto_order, hod_recover, AnchorPolicy, HodConfig};
pub use oracle::{brute_force_residual_oracle, ORACLE_LIMIT};
pub use pgd::{cost_and_gradient, pgd_residual, PgdConfig, StepRule};
pub use rounding::round_residual;
pub use vandermonde::{vandermonde_recover, CONDITION_LIMIT};

use crate::ops::ResidualStructure;
use crate::signal::SampledSignal;

/// Residual sequence on the window, supported on `{-N, ..., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEstimate {
    pub values: Vec<f64>,
    pub half_width: usize,
    pub structure: ResidualStructure,
    /// Inner iterations spent producing the estimate.
    pub iterations: usize,
    /// Set when the iteration budget ran out before the stopping rule fired.
    pub warning: bool,
    /// Cost after every inner iteration, when requested.
    pub trace: Vec<f64>,
}

/// Output of a recovery routine.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub signal: SampledSignal,
    /// Integer fold counts `k` with `estimate = g^-1(folded + 2 lambda k)`,
    /// for lattice-structured operators.
    pub folds: Option<Vec<i64>>,
    /// Outer passes run.
    pub passes: usize,
    /// Total inner iterations across passes.
    pub iterations: usize,
    /// Passes that stopped on the iteration budget.
    pub warnings: usize,
    /// Cost traces of every pass, when requested.
    pub traces: Vec<Vec<f64>>,
}
