use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    /// i.i.d. uniform on `[-sigma, sigma]`.
    BoundedUniform { sigma: f64 },
    /// i.i.d. Gaussian with variance set from the folded energy so the
    /// expected SNR equals `snr_db`.
    GaussianSnr { snr_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
}

/// Half-width of uniform noise whose expected energy gives `snr_db`.
pub fn bounded_sigma_for_snr(folded: &SampledSignal, snr_db: f64) -> f64 {
    let power = folded.energy() / folded.len() as f64;
    (3.0 * power / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// One noise realization for `folded`.
pub fn draw_noise(folded: &SampledSignal, model: &NoiseModel) -> Result<Vec<f64>> {
    let l = folded.len();
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    match model.kind {
        NoiseKind::None => Ok(vec![0.0; l]),
        NoiseKind::BoundedUniform { sigma } => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::Config(format!("noise bound must be non-negative, got {sigma}")));
            }
            Ok((0..l).map(|_| sigma * (2.0 * rng.random::<f64>() - 1.0)).collect())
        }
        NoiseKind::GaussianSnr { snr_db } => {
            let power = folded.energy() / l as f64;
            let std = (power / 10f64.powf(snr_db / 10.0)).sqrt();
            let normal = Normal::new(0.0, std).map_err(|e| Error::Config(e.to_string()))?;
            Ok((0..l).map(|_| normal.sample(&mut rng)).collect())
        }
    }
}

/// `folded + v` for one realization `v`.
pub fn add_noise(folded: &SampledSignal, model: &NoiseModel) -> Result<SampledSignal> {
    let v = draw_noise(folded, model)?;
    Ok(folded.with_values(folded.values.iter().zip(&v).map(|(a, b)| a + b).collect()))
}
