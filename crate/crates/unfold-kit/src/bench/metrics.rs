use crate::error::{Error, Result};

/// Reported MSE for recoveries that are exact up to round-off.
pub const MSE_FLOOR_DB: f64 = -300.0;

/// Relative RMS error treated as round-off: 64 machine epsilons.
const ROUNDOFF_RMS: f64 = 64.0 * f64::EPSILON;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `20 log10(||folded|| / ||noise||)`; `+inf` for zero noise.
pub fn compute_snr(folded: &[f64], noise: &[f64]) -> f64 {
    let n = norm_sq(noise);
    if n == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (norm_sq(folded) / n).log10()
}

/// Normalized MSE `10 log10(sum |f - f_hat|^2 / sum |f|^2)` in dB, or
/// [`MSE_FLOOR_DB`] once the relative RMS error is within round-off.
pub fn compute_mse(truth: &[f64], recovered: &[f64]) -> Result<f64> {
    if truth.len() != recovered.len() {
        return Err(Error::Config(format!(
            "length mismatch: {} true samples, {} recovered",
            truth.len(),
            recovered.len()
        )));
    }
    let energy = norm_sq(truth);
    if energy == 0.0 {
        return Err(Error::Degenerate("true signal has zero energy".into()));
    }
    let err: f64 = truth.iter().zip(recovered).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ratio_to_db(err / energy))
}

pub(crate) fn ratio_to_db(ratio: f64) -> f64 {
    if ratio <= ROUNDOFF_RMS * ROUNDOFF_RMS {
        MSE_FLOOR_DB
    } else {
        10.0 * ratio.log10()
    }
}
