//! Partial DTFT over the out-of-band region, its adjoint, the highpass Gram
//! operator, support projection and the Vandermonde system.
//!
//! Sequences live on a window of sample indices `origin .. origin + L`. A
//! length-`M` transform (`M >= L`) places index `n` at bin position
//! `n mod M`; band bins are the DFT indices `k` with
//! `floor(b M / 2) < |k| <= M / 2`. Spectral inner products carry weight
//! `1 / M` so the adjoint below is exact on that grid.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::{in_band_half_count, SampledSignal, SamplingGrid};

/// Out-of-band region on a length-`M` DFT grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    band_fraction: f64,
    transform_len: usize,
    sample_interval: f64,
    cutoff: usize,
}

impl FrequencyBand {
    pub fn new(band_fraction: f64, transform_len: usize, sample_interval: f64) -> Result<Self> {
        if !(band_fraction.is_finite() && band_fraction > 0.0) {
            return Err(Error::Config(format!("band fraction must be positive, got {band_fraction}")));
        }
        if transform_len == 0 {
            return Err(Error::Config("transform length must be positive".into()));
        }
        Ok(FrequencyBand {
            band_fraction,
            transform_len,
            sample_interval,
            cutoff: in_band_half_count(band_fraction, transform_len),
        })
    }

    /// Band of `grid` on a transform of `density * L` bins.
    pub fn for_grid(grid: &SamplingGrid, density: usize) -> Result<Self> {
        if density == 0 {
            return Err(Error::Config("bin density must be at least 1".into()));
        }
        Self::new(grid.band_fraction(), density * grid.length, grid.sample_interval)
    }

    pub fn band_fraction(&self) -> f64 {
        self.band_fraction
    }

    pub fn transform_len(&self) -> usize {
        self.transform_len
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Largest in-band `|k|`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn positive_range(&self) -> std::ops::RangeInclusive<usize> {
        self.cutoff + 1..=self.transform_len / 2
    }

    fn negative_range(&self) -> std::ops::RangeInclusive<usize> {
        self.cutoff + 1..=(self.transform_len - 1) / 2
    }

    /// Signed band bins, most negative first. The Nyquist bin of an even
    /// transform appears once, as `+M/2`.
    pub fn bins(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.negative_range().rev().map(|k| -(k as i64)).collect();
        out.extend(self.positive_range().map(|k| k as i64));
        out
    }

    pub fn bin_count(&self) -> usize {
        self.positive_range().count() + self.negative_range().count()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_count() == 0
    }

    /// Frequency of bin `k` in rad/s.
    pub fn omega(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / (self.transform_len as f64 * self.sample_interval)
    }

    /// `true` at FFT positions that belong to the band.
    pub fn mask(&self) -> Vec<bool> {
        let m = self.transform_len;
        (0..m)
            .map(|i| {
                let k = if i <= m / 2 { i } else { m - i };
                k > self.cutoff
            })
            .collect()
    }

    fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyBand {
                of: 1.0 / self.band_fraction,
            })
        } else {
            Ok(())
        }
    }
}

/// Spectrum values on the band bins of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub bins: Vec<i64>,
    /// Bin frequencies in rad/s.
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub transform_len: usize,
    pub origin: i64,
    pub length: usize,
}

fn slot(n: i64, m: usize) -> usize {
    n.rem_euclid(m as i64) as usize
}

/// Length-`M` FFT plans plus the window embedding.
#[derive(Clone)]
pub struct GramOperator {
    band: FrequencyBand,
    origin: i64,
    length: usize,
    mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GramOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GramOperator")
            .field("band", &self.band)
            .field("origin", &self.origin)
            .field("length", &self.length)
            .finish()
    }
}

impl GramOperator {
    pub fn new(band: FrequencyBand, origin: i64, length: usize, planner: &mut FftPlanner<f64>) -> Result<Self> {
        let m = band.transform_len();
        if m < length {
            return Err(Error::Config(format!(
                "transform length {m} is shorter than the window length {length}"
            )));
        }
        Ok(GramOperator {
            band,
            origin,
            length,
            mask: band.mask(),
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn for_grid(grid: &SamplingGrid, band: FrequencyBand) -> Result<Self> {
        Self::new(band, grid.origin, grid.length, &mut FftPlanner::new())
    }

    pub fn band(&self) -> &FrequencyBand {
        &self.band
    }

    fn embed(&self, seq: &[f64]) -> Vec<Complex64> {
        let m = self.band.transform_len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (p, v) in seq.iter().enumerate() {
            buf[slot(self.origin + p as i64, m)] = Complex64::new(*v, 0.0);
        }
        buf
    }

    fn spectrum(&self, seq: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(seq.len(), self.length);
        let mut buf = self.embed(seq);
        self.forward.process(&mut buf);
        buf
    }

    /// `F*F seq`: zero in-band bins, inverse transform, read the window back.
    pub fn apply(&self, seq: &[f64]) -> Vec<f64> {
        let m = self.band.transform_len();
        let mut buf = self.spectrum(seq);
        for (b, keep) in buf.iter_mut().zip(&self.mask) {
            if !keep {
                *b = Complex64::new(0.0, 0.0);
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / m as f64;
        (0..self.length)
            .map(|p| buf[slot(self.origin + p as i64, m)].re * scale)
            .collect()
    }

    /// `0.5 * ||F seq||^2` with the `1/M` spectral weight.
    pub fn half_energy(&self, seq: &[f64]) -> f64 {
        let buf = self.spectrum(seq);
        let e: f64 = buf
            .iter()
            .zip(&self.mask)
            .filter(|(_, keep)| **keep)
            .map(|(c, _)| c.norm_sqr())
            .sum();
        0.5 * e / self.band.transform_len() as f64
    }

    /// Impulse response `h[d]` of the Gram operator on the length-`M` circle,
    /// indexed by `d mod M`.
    pub fn impulse_response(&self) -> Vec<f64> {
        let m = self.band.transform_len();
        let mut buf: Vec<Complex64> = self
            .mask
            .iter()
            .map(|&keep| Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0))
            .collect();
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re / m as f64).collect()
    }
}

/// `sum_n seq[n] e^{-j w_k n T_s}` on the band bins of a length-`M` grid.
pub fn partial_dtft(seq: &SampledSignal, band: &FrequencyBand) -> Result<SpectrumSlice> {
    band.ensure_nonempty()?;
    let op = GramOperator::for_grid(&seq.grid, *band)?;
    let spec = op.spectrum(&seq.values);
    let m = band.transform_len();
    let bins = band.bins();
    Ok(SpectrumSlice {
        omegas: bins.iter().map(|&k| band.omega(k)).collect(),
        values: bins.iter().map(|&k| spec[slot(k, m)]).collect(),
        bins,
        transform_len: m,
        origin: seq.grid.origin,
        length: seq.grid.length,
    })
}

/// Riemann-sum adjoint `(1/M) Re sum_k y_k e^{j w_k n T_s}` on the window.
pub fn partial_dtft_adjoint(slice: &SpectrumSlice) -> Vec<f64> {
    let m = slice.transform_len;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (&k, v) in slice.bins.iter().zip(&slice.values) {
        buf[slot(k, m)] = *v;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    (0..slice.length)
        .map(|p| buf[slot(slice.origin + p as i64, m)].re / m as f64)
        .collect()
}

/// Weighted spectral inner product `(1/M) Re sum_k a_k conj(b_k)`.
pub fn spectrum_inner(a: &SpectrumSlice, b: &SpectrumSlice) -> f64 {
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x * y.conj()).re).sum();
    s / a.transform_len as f64
}

/// Ideal highpass `F*F` applied to `seq`.
pub fn highpass_gram(seq: &SampledSignal, band: &FrequencyBand) -> Result<SampledSignal> {
    let op = GramOperator::for_grid(&seq.grid, *band)?;
    Ok(seq.with_values(op.apply(&seq.values)))
}

/// Projection onto the in-band bins of the length-L DFT.
pub fn bandlimit(seq: &SampledSignal) -> Result<SampledSignal> {
    let band = FrequencyBand::for_grid(&seq.grid, 1)?;
    let high = GramOperator::for_grid(&seq.grid, band)?.apply(&seq.values);
    Ok(seq.with_values(seq.values.iter().zip(&high).map(|(x, h)| x - h).collect()))
}

/// Support `{-N, ..., N}`, optionally thinned by a per-position pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportConstraint {
    pub half_width: usize,
    /// Window positions allowed inside the support; `None` allows all.
    pub pattern: Option<Vec<bool>>,
}

impl SupportConstraint {
    pub fn new(half_width: usize) -> Self {
        SupportConstraint {
            half_width,
            pattern: None,
        }
    }

    pub fn with_pattern(mut self, pattern: Vec<bool>) -> Self {
        self.pattern = Some(pattern);
        self
    }

    pub fn contains(&self, grid: &SamplingGrid, pos: usize) -> bool {
        grid.index(pos).unsigned_abs() as usize <= self.half_width
            && self.pattern.as_ref().is_none_or(|p| p[pos])
    }
}

/// Zeroes every sample outside the constraint.
pub fn project_support(seq: &SampledSignal, constraint: &SupportConstraint) -> SampledSignal {
    seq.with_values(
        seq.values
            .iter()
            .enumerate()
            .map(|(p, v)| if constraint.contains(&seq.grid, p) { *v } else { 0.0 })
            .collect(),
    )
}

/// Vandermonde matrix on band nodes together with the chosen bins.
#[derive(Debug, Clone)]
pub struct VandermondeSystem {
    pub matrix: DMatrix<Complex64>,
    pub bins: Vec<i64>,
    /// Node frequencies in rad/s.
    pub omegas: Vec<f64>,
    pub half_width: usize,
}

impl VandermondeSystem {
    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.matrix.rank(tol)
    }
}

fn spread(start: usize, count: usize, picks: usize) -> impl Iterator<Item = usize> {
    (0..picks).map(move |i| start + (((i as f64 + 0.5) * count as f64) / picks as f64).floor() as usize)
}

/// `2N + 1` nodes spread uniformly over the band (`N + 1` positive, `N`
/// negative, half-bin offsets from the edges); entry `(i, j)` is
/// `exp(-j w_i n_j T_s)` with `n_j = -N ..= N`.
pub fn build_vandermonde(band: &FrequencyBand, constraint: &SupportConstraint) -> Result<VandermondeSystem> {
    band.ensure_nonempty()?;
    let n = constraint.half_width;
    let needed = 2 * n + 1;
    let pos = band.positive_range();
    let neg = band.negative_range();
    let (pos_count, neg_count) = (pos.clone().count(), neg.clone().count());
    if needed > pos_count + neg_count || n + 1 > pos_count || n > neg_count {
        return Err(Error::InsufficientBandwidth {
            half_width: n,
            needed,
            available: band.bin_count(),
        });
    }
    let mut bins: Vec<i64> = spread(*neg.start(), neg_count, n).map(|k| -(k as i64)).collect();
    bins.reverse();
    bins.extend(spread(*pos.start(), pos_count, n + 1).map(|k| k as i64));
    let m = band.transform_len() as f64;
    let matrix = DMatrix::from_fn(needed, needed, |i, j| {
        let w = 2.0 * PI * bins[i] as f64 / m;
        let idx = j as f64 - n as f64;
        Complex64::from_polar(1.0, -w * idx)
    });
    Ok(VandermondeSystem {
        omegas: bins.iter().map(|&k| band.omega(k)).collect(),
        matrix,
        bins,
        half_width: n,
    })
}

/// Smallest `2^a 3^b 5^c` that is at least `n`.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

enum SupportGramImpl {
    /// Toeplitz convolution of length-`2N+1` vectors by FFT.
    Toeplitz {
        kernel_hat: Vec<Complex64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    /// Full window embedding on the length-`M` circle.
    Window { gram: GramOperator },
}

/// The Gram operator compressed to `S_N`: `P_S F*F P_S`, acting on the
/// `2N + 1` coefficients of `n = -N ..= N`.
pub struct SupportGram {
    half_width: usize,
    window_offset: usize,
    inner: SupportGramImpl,
}

impl SupportGram {
    /// `impulse` is [`GramOperator::impulse_response`] of `gram`.
    pub fn new(gram: &GramOperator, impulse: &[f64], half_width: usize, planner: &mut FftPlanner<f64>) -> Self {
        let m = gram.band.transform_len();
        let size = 2 * half_width + 1;
        let p = fast_len(2 * size - 1);
        let window_offset = (-(half_width as i64) - gram.origin) as usize;
        let inner = if p < m {
            let mut kernel = vec![Complex64::new(0.0, 0.0); p];
            for d in -(2 * half_width as i64)..=(2 * half_width as i64) {
                kernel[slot(d, p)] = Complex64::new(impulse[slot(d, m)], 0.0);
            }
            let forward = planner.plan_fft_forward(p);
            forward.process(&mut kernel);
            let scale = 1.0 / p as f64;
            kernel.iter_mut().for_each(|c| *c *= scale);
            SupportGramImpl::Toeplitz {
                kernel_hat: kernel,
                forward,
                inverse: planner.plan_fft_inverse(p),
            }
        } else {
            SupportGramImpl::Window { gram: gram.clone() }
        };
        SupportGram {
            half_width,
            window_offset,
            inner,
        }
    }

    pub fn size(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Window position of support coefficient 0 (index `-N`).
    pub fn window_offset(&self) -> usize {
        self.window_offset
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64], buf: &mut Vec<Complex64>) {
        let size = self.size();
        debug_assert_eq!(v.len(), size);
        match &self.inner {
            SupportGramImpl::Toeplitz {
                kernel_hat,
                forward,
                inverse,
            } => {
                buf.clear();
                buf.extend(v.iter().map(|x| Complex64::new(*x, 0.0)));
                buf.resize(kernel_hat.len(), Complex64::new(0.0, 0.0));
                forward.process(buf);
                buf.iter_mut().zip(kernel_hat).for_each(|(b, k)| *b *= k);
                inverse.process(buf);
                out.iter_mut().zip(buf.iter()).for_each(|(o, b)| *o = b.re);
            }
            SupportGramImpl::Window { gram } => {
                let mut full = vec![0.0; gram.length];
                full[self.window_offset..self.window_offset + size].copy_from_slice(v);
                let h = gram.apply(&full);
                out.copy_from_slice(&h[self.window_offset..self.window_offset + size]);
            }
        }
    }
}
