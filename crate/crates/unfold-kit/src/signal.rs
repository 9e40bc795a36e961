//! Sampling grids, bandlimited test signals and support bounds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniform sampling grid over a finite window of `length` samples whose
/// integer indices run `origin ..= origin + length - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    /// Sampling interval in seconds.
    pub sample_interval: f64,
    /// Band edge in rad/s.
    pub band_edge: f64,
    pub length: usize,
    pub origin: i64,
}

impl SamplingGrid {
    /// Grid with the default centered window `-L/2 ..= L/2 - 1`.
    pub fn new(sample_interval: f64, band_edge: f64, length: usize) -> Result<Self> {
        let grid = SamplingGrid {
            sample_interval,
            band_edge,
            length,
            origin: -((length / 2) as i64),
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Unit sampling interval with the band edge placed at `pi / of`.
    pub fn from_oversampling(of: f64, length: usize) -> Result<Self> {
        if !(of.is_finite() && of > 0.0) {
            return Err(Error::Config(format!("oversampling factor must be positive, got {of}")));
        }
        Self::new(1.0, PI / of, length)
    }

    pub fn with_origin(mut self, origin: i64) -> Self {
        self.origin = origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(Error::Config(format!(
                "sample interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if !(self.band_edge.is_finite() && self.band_edge > 0.0) {
            return Err(Error::Config(format!("band edge must be positive, got {}", self.band_edge)));
        }
        if self.length == 0 {
            return Err(Error::Config("grid length must be at least 1".into()));
        }
        Ok(())
    }

    /// `pi / (band_edge * sample_interval)`, i.e. sampling rate over twice the band edge.
    pub fn oversampling_factor(&self) -> f64 {
        PI / (self.band_edge * self.sample_interval)
    }

    /// Normalized band edge `b = band_edge * sample_interval / pi`.
    pub fn band_fraction(&self) -> f64 {
        self.band_edge * self.sample_interval / PI
    }

    pub fn nyquist_interval(&self) -> f64 {
        PI / self.band_edge
    }

    /// Sample index of window position `pos`.
    pub fn index(&self, pos: usize) -> i64 {
        self.origin + pos as i64
    }

    /// Window position of sample index `n`, if inside the window.
    pub fn position(&self, n: i64) -> Option<usize> {
        let p = n - self.origin;
        (p >= 0 && (p as usize) < self.length).then_some(p as usize)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.length).map(move |p| self.index(p))
    }

    /// Half-count of in-band DFT bins for a length-`m` transform: bins with
    /// `|k| <= floor(b m / 2)` are in band.
    pub fn in_band_half_count(&self, m: usize) -> usize {
        in_band_half_count(self.band_fraction(), m)
    }
}

pub(crate) fn in_band_half_count(b: f64, m: usize) -> usize {
    let raw = (b * m as f64 / 2.0 + 1e-9).floor();
    if raw < 0.0 {
        0
    } else {
        (raw as usize).min(m / 2)
    }
}

/// A finite window of real samples on a [`SamplingGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(grid: SamplingGrid, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.length {
            return Err(Error::Config(format!(
                "grid length {} does not match {} values",
                grid.length,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite sample {bad}")));
        }
        Ok(SampledSignal { grid, values })
    }

    pub fn zeros(grid: SamplingGrid) -> Self {
        SampledSignal {
            grid,
            values: vec![0.0; grid.length],
        }
    }

    /// Same grid, new values. Length must match.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        SampledSignal {
            grid: self.grid,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample at index `n`, if inside the window.
    pub fn at(&self, n: i64) -> Option<f64> {
        self.grid.position(n).map(|p| self.values[p])
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Interpolation kernel used to synthesize test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Dirichlet kernel: exactly bandlimited on the length-L DFT grid.
    #[default]
    Periodic,
    /// Literal `sinc`, truncated to the window.
    Sinc,
}

/// One term `coefficient * kernel((t - center) / T_nyq)` of a sum of sincs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincTerm {
    pub coefficient: f64,
    /// Center in seconds.
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub num_sincs: usize,
    pub coefficient_seed: u64,
    pub coefficient_range: (f64, f64),
    /// Jitter of each center as a fraction of the Nyquist interval.
    pub center_jitter: f64,
    /// Fraction of the window, around its middle, that may hold centers.
    pub center_span: f64,
    pub kernel: Kernel,
    pub grid: SamplingGrid,
}

impl SynthesisConfig {
    pub fn new(grid: SamplingGrid, num_sincs: usize, seed: u64) -> Self {
        SynthesisConfig {
            num_sincs,
            coefficient_seed: seed,
            coefficient_range: (-1.0, 1.0),
            center_jitter: 0.25,
            center_span: 0.4,
            kernel: Kernel::Periodic,
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.num_sincs == 0 {
            return Err(Error::Config("num_sincs must be at least 1".into()));
        }
        let (lo, hi) = self.coefficient_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("invalid coefficient range [{lo}, {hi}]")));
        }
        if !(0.0..=1.0).contains(&self.center_jitter) {
            return Err(Error::Config(format!(
                "center_jitter must lie in [0, 1], got {}",
                self.center_jitter
            )));
        }
        if !(self.center_span > 0.0 && self.center_span < 1.0) {
            return Err(Error::Config(format!(
                "center_span must lie in (0, 1), got {}",
                self.center_span
            )));
        }
        Ok(())
    }
}

/// Draws coefficients and centers. Centers sit on the Nyquist grid around
/// the window middle, then are jittered by at most half of `center_jitter`
/// Nyquist intervals.
pub fn draw_terms(config: &SynthesisConfig) -> Result<Vec<SincTerm>> {
    config.validate()?;
    let grid = &config.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(config.coefficient_seed);
    let ts = grid.sample_interval;
    let t_nyq = grid.nyquist_interval();
    let middle = (grid.origin as f64 + grid.length as f64 / 2.0) * ts;
    let half_span = config.center_span * grid.length as f64 * ts / 2.0;
    let slots = (half_span / t_nyq).floor() as i64;
    let (lo, hi) = config.coefficient_range;
    let terms = (0..config.num_sincs)
        .map(|_| {
            let coefficient = rng.random_range(lo..hi);
            let slot = rng.random_range(-slots..=slots);
            let jitter = config.center_jitter * (rng.random::<f64>() - 0.5);
            SincTerm {
                coefficient,
                center: middle + (slot as f64 + jitter) * t_nyq,
            }
        })
        .collect();
    Ok(terms)
}

/// Sums the given terms on the grid without normalization.
pub fn synthesize_terms(grid: &SamplingGrid, terms: &[SincTerm], kernel: Kernel) -> Result<SampledSignal> {
    grid.validate()?;
    let ts = grid.sample_interval;
    let b = grid.band_fraction();
    let half = grid.in_band_half_count(grid.length);
    let values = grid
        .indices()
        .map(|n| {
            terms
                .iter()
                .map(|term| {
                    let x = n as f64 - term.center / ts;
                    let k = match kernel {
                        Kernel::Periodic => periodic_sinc(x, grid.length, half),
                        Kernel::Sinc => sinc(x * b),
                    };
                    term.coefficient * k
                })
                .sum()
        })
        .collect();
    SampledSignal::new(*grid, values)
}

/// Peak-normalized sum of randomly drawn sincs.
pub fn synthesize_sum_of_sincs(config: &SynthesisConfig) -> Result<SampledSignal> {
    let terms = draw_terms(config)?;
    normalize_peak(&synthesize_terms(&config.grid, &terms, config.kernel)?)
}

/// Divides by the peak magnitude.
pub fn normalize_peak(signal: &SampledSignal) -> Result<SampledSignal> {
    let peak = signal.peak();
    if peak == 0.0 {
        return Err(Error::Degenerate("cannot normalize an all-zero signal".into()));
    }
    Ok(signal.with_values(signal.values.iter().map(|v| v / peak).collect()))
}

/// Smallest `N >= 0` with `|f[n]| < lambda` for every `|n| > N`.
pub fn compute_support_bound(signal: &SampledSignal, lambda: f64) -> usize {
    signal
        .grid
        .indices()
        .zip(&signal.values)
        .filter(|(_, v)| v.abs() >= lambda)
        .map(|(n, _)| n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

/// Shannon reconstruction `sum_n f[n] sinc((t - n T_s) / T_s)` at time `t`.
pub fn sinc_interpolate(signal: &SampledSignal, t: f64) -> f64 {
    let ts = signal.grid.sample_interval;
    signal
        .grid
        .indices()
        .zip(&signal.values)
        .map(|(n, v)| v * sinc(t / ts - n as f64))
        .sum()
}

/// Requires `|f| < lambda / 2` on the outer 10% of the window (5% per side).
pub fn check_edge_decay(signal: &SampledSignal, lambda: f64) -> Result<()> {
    let l = signal.len();
    let edge = ((l as f64) * 0.05).ceil() as usize;
    let limit = lambda / 2.0;
    let offending = signal.values[..edge.min(l)]
        .iter()
        .chain(&signal.values[l.saturating_sub(edge)..])
        .find(|v| v.abs() >= limit);
    match offending {
        Some(v) => Err(Error::Config(format!(
            "signal does not decay near the window edges: |{v}| >= {limit}"
        ))),
        None => Ok(()),
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Length-`l` periodic sinc with `2 * half + 1` in-band bins (plus the
/// Nyquist bin when `half` reaches `l / 2` for even `l`), unit value at 0.
/// `x` is measured in samples.
pub fn periodic_sinc(x: f64, l: usize, half: usize) -> f64 {
    let lf = l as f64;
    let with_nyquist = l % 2 == 0 && half >= l / 2;
    let half = if with_nyquist { l / 2 - 1 } else { half.min((l - 1) / 2) };
    let k = (2 * half + 1) as f64;
    let s = (PI * x / lf).sin();
    let ratio = if s.abs() < 1e-12 {
        k * (PI * k * x / lf).cos() / (PI * x / lf).cos()
    } else {
        (PI * k * x / lf).sin() / s
    };
    if with_nyquist {
        (ratio + (PI * x).cos()) / lf
    } else {
        ratio / k
    }
}
