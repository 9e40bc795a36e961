//! Structure-aware rounding of residual estimates.

use super::ResidualEstimate;
use crate::ops::{OperatorSpec, ResidualStructure};
use crate::signal::SampledSignal;

/// Nearest integer, ties toward zero.
pub(crate) fn round_half_toward_zero(x: f64) -> f64 {
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 {
        x.trunc()
    } else {
        r
    }
}

/// Fraction of `lambda` below which a folded sample no longer counts as
/// saturated.
pub(crate) const SATURATION_SLACK: f64 = 1e-12;

pub(crate) fn saturation(op: &OperatorSpec, y: f64) -> i8 {
    let rail = op.lambda * (1.0 - SATURATION_SLACK);
    if y >= rail {
        1
    } else if y <= -rail {
        -1
    } else {
        0
    }
}

/// Integer lattice step `q` such that the rounded residual moves the current
/// estimate by `q` folds in the companded domain.
///
/// For a compander the candidates `expand(compand(current) - 2 lambda q)` are
/// unevenly spaced, so the one nearest `current - est` is picked in the
/// signal domain. Rounding in the companded domain instead would amplify
/// estimation errors by the compander's slope near zero.
pub(crate) fn lattice_quotient(op: &OperatorSpec, current: f64, est: f64) -> i64 {
    let two = 2.0 * op.lambda;
    if op.is_identity() {
        return round_half_toward_zero(est / two) as i64;
    }
    let level = op.compand(current);
    let target = current - est;
    let delta = (level - op.compand(target)) / two;
    let (lo, hi) = (delta.floor(), delta.ceil());
    let miss = |q: f64| (op.expand(level - two * q) - target).abs();
    let (m_lo, m_hi) = (miss(lo), miss(hi));
    let q = if m_lo < m_hi || (m_lo == m_hi && lo.abs() <= hi.abs()) { lo } else { hi };
    q as i64
}

/// Three-case sign rule on a total residual `g^-1(folded) - f`.
pub(crate) fn sign_rule(op: &OperatorSpec, y: f64, total: f64) -> f64 {
    match saturation(op, y) {
        1 => total.min(0.0),
        -1 => total.max(0.0),
        _ => 0.0,
    }
}

/// Projects a residual estimate onto the operator's residual structure.
///
/// `current` is the signal estimate the residual was computed from; lattice
/// rounding for companded operators and the sign rule act on the total
/// residual relative to `g^-1(folded)`, which depends on it.
pub fn round_residual(
    est: &ResidualEstimate,
    op: &OperatorSpec,
    folded: &SampledSignal,
    current: &SampledSignal,
) -> ResidualEstimate {
    let n = est.half_width as i64;
    let grid = &folded.grid;
    let values = est
        .values
        .iter()
        .enumerate()
        .map(|(p, &v)| {
            if grid.index(p).abs() > n {
                return v;
            }
            let cur = current.values[p];
            let y = folded.values[p];
            match op.structure {
                ResidualStructure::Lattice => {
                    let q = lattice_quotient(op, cur, v);
                    if op.is_identity() {
                        2.0 * op.lambda * q as f64
                    } else {
                        cur - op.expand(op.compand(cur) - 2.0 * op.lambda * q as f64)
                    }
                }
                ResidualStructure::SignFromSaturation => {
                    let u = op.expand(y.clamp(-op.lambda, op.lambda));
                    let so_far = u - cur;
                    sign_rule(op, y, so_far + v) - so_far
                }
                ResidualStructure::None => v,
            }
        })
        .collect();
    ResidualEstimate {
        values,
        structure: op.structure,
        ..est.clone()
    }
}
