//! Higher-order-difference unwrapping: the modulo of the `N`-th difference of
//! folded samples equals the `N`-th difference of the true samples whenever
//! that difference stays below the threshold.

use std::f64::consts::E;

use super::Recovery;
use crate::error::{Error, Result};
use crate::ops::fold_count;
use crate::signal::{SampledSignal, SamplingGrid};

/// How the `N` integration constants are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorPolicy {
    /// The first `N` window samples are known to be unfolded because their
    /// indices lie outside `{-n_lambda, ..., n_lambda}`.
    Tail { n_lambda: usize },
    /// Trust the first `N` window samples without checking.
    Leading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HodConfig {
    pub order: usize,
    pub anchor: AnchorPolicy,
}

/// Largest order picked by [`auto_order`].
pub const MAX_AUTO_ORDER: usize = 16;

/// Smallest `N` with `(T Omega e)^N beta <= lambda`, where `beta` is the
/// peak rounded up to a multiple of `2 lambda`. Falls back to 1 when
/// `T Omega e >= 1`, where that bound is minimized at `N = 1`.
pub fn auto_order(grid: &SamplingGrid, lambda: f64, peak: f64) -> usize {
    let rate = grid.sample_interval * grid.band_edge * E;
    if rate >= 1.0 {
        return 1;
    }
    let beta = 2.0 * lambda * (peak / (2.0 * lambda)).ceil().max(1.0);
    let n = ((lambda.ln() - beta.ln()) / rate.ln()).ceil();
    (n.max(1.0) as usize).min(MAX_AUTO_ORDER)
}

/// Unwraps modulo samples by integrating the wrapped `N`-th difference.
///
/// Works on integer fold counts: the wrapped difference minus the raw
/// difference is `2 lambda` times the `N`-th difference of the unknown fold
/// counts, which is summed `N` times from zero anchors.
pub fn hod_recover(folded: &SampledSignal, lambda: f64, cfg: &HodConfig) -> Result<Recovery> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {lambda}")));
    }
    let order = cfg.order;
    if order == 0 {
        return Err(Error::Config("difference order must be at least 1".into()));
    }
    let l = folded.len();
    if l <= order {
        return Err(Error::Anchoring(format!(
            "window of {l} samples cannot anchor order {order}"
        )));
    }
    if let AnchorPolicy::Tail { n_lambda } = cfg.anchor {
        let grid = &folded.grid;
        if let Some(p) = (0..order).find(|&p| grid.index(p).unsigned_abs() as usize <= n_lambda) {
            return Err(Error::Anchoring(format!(
                "anchor sample {} lies inside the folding support of half-width {n_lambda}",
                grid.index(p)
            )));
        }
    }

    let mut diff = folded.values.clone();
    for _ in 0..order {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut level: Vec<i64> = diff.iter().map(|&d| -fold_count(d, lambda)).collect();
    for j in (0..order).rev() {
        let mut next = Vec::with_capacity(l - j);
        let mut acc: i64 = 0;
        next.push(acc);
        for d in &level {
            acc = acc.saturating_add(*d);
            next.push(acc);
        }
        level = next;
    }
    let two = 2.0 * lambda;
    let values = folded
        .values
        .iter()
        .zip(&level)
        .map(|(y, k)| y + two * *k as f64)
        .collect();
    Ok(Recovery {
        signal: folded.with_values(values),
        folds: Some(level),
        passes: order,
        iterations: 0,
        warnings: 0,
        traces: Vec::new(),
    })
}
