//! Noise injection, error metrics and the Monte-Carlo sweep runner.

mod experiment;
mod metrics;
mod noise;
mod report;

pub use experiment::{
    run_experiment, run_experiment_detailed, cell_signal, Algorithm, ExperimentConfig, NoiseLevel, PostFilter,
    SignalShape, SignalSpec, TrialFailure,
};
pub use metrics::{compute_mse, compute_snr, MSE_FLOOR_DB};
pub use noise::{add_noise, bounded_sigma_for_snr, draw_noise, NoiseKind, NoiseModel};
pub use report::{read_sweep_csv, sweep_from_str, sweep_to_csv, sweep_to_string, MseReport, MseRow};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a sub-stream identified by `parts`; depends only on its inputs.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}
