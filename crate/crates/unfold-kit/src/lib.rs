//! Simulation and recovery of bandlimited samples taken through an
//! amplitude-folding front end (clipping, modulo, mu-law modulo).
//!
//! The pipeline is: synthesize a bandlimited window ([`signal`]), fold it
//! through an [`ops::OperatorSpec`], optionally add noise ([`bench`]), and
//! recover the true samples with [`recovery::b2r2_recover`] or one of the
//! baselines.

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod ops;
pub mod recovery;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use ops::{InRangeMap, MuLawParams, OperatorKind, OperatorSpec, OutOfRange, ResidualStructure};
pub use recovery::{
    b2r2_recover, brute_force_residual_oracle, hod_recover, pgd_residual, round_residual,
    vandermonde_recover, AnchorPolicy, HodConfig, PgdConfig, Recovery, ResidualEstimate,
    StepRule,
};
pub use signal::{SampledSignal, SamplingGrid, SynthesisConfig};
pub use spectral::{FrequencyBand, SpectrumSlice, SupportConstraint};
