use super::pgd::{PgdConfig, PgdContext};
use super::rounding::{lattice_quotient, saturation, sign_rule};
use super::Recovery;
use crate::error::{Error, Result};
use crate::ops::{OperatorSpec, ResidualStructure};
use crate::signal::SampledSignal;
use crate::spectral::{FrequencyBand, SupportConstraint};

/// Per-structure bookkeeping of the running estimate.
enum State {
    /// Fold counts; the estimate is `expand(y + 2 lambda k)`.
    Lattice { folds: Vec<i64> },
    /// Accumulated residual `g^-1(folded) - estimate`.
    Continuous { residual: Vec<f64> },
}

/// Recovers the true samples from `folded` given the residual support bound.
///
/// Each pass `N = N_lambda, ..., 1` estimates the residual of the current
/// estimate on `S_N` by PGD, projects it onto the operator's residual
/// structure and subtracts it. In the noiseless lattice case the pass fixes
/// indices `+-N` exactly.
pub fn b2r2_recover(
    folded: &SampledSignal,
    op: &OperatorSpec,
    n_lambda: usize,
    cfg: &PgdConfig,
) -> Result<Recovery> {
    op.validate()?;
    cfg.validate()?;
    let grid = folded.grid;
    let band = FrequencyBand::for_grid(&grid, cfg.density)?;
    if band.is_empty() {
        return Err(Error::EmptyBand {
            of: grid.oversampling_factor(),
        });
    }
    let needed = 2 * n_lambda + 1;
    if needed > band.bin_count() {
        return Err(Error::InsufficientBandwidth {
            half_width: n_lambda,
            needed,
            available: band.bin_count(),
        });
    }
    let mut ctx = PgdContext::new(grid, band)?;
    ctx.check_support(n_lambda)?;

    let lambda = op.lambda;
    let two = 2.0 * lambda;
    let clamped: Vec<f64> = folded.values.iter().map(|y| y.clamp(-lambda, lambda)).collect();
    let base: Vec<f64> = if op.is_identity() {
        folded.values.clone()
    } else {
        clamped.iter().map(|&y| op.expand(y)).collect()
    };
    let rebuild = |p: usize, k: i64| -> f64 {
        if op.is_identity() {
            folded.values[p] + two * k as f64
        } else {
            op.expand(clamped[p] + two * k as f64)
        }
    };

    let mut state = match op.structure {
        ResidualStructure::Lattice => State::Lattice {
            folds: vec![0; grid.length],
        },
        _ => State::Continuous {
            residual: vec![0.0; grid.length],
        },
    };
    let pattern = (op.structure == ResidualStructure::SignFromSaturation)
        .then(|| folded.values.iter().map(|&y| saturation(op, y) != 0).collect::<Vec<bool>>());
    let tol = cfg.tolerance(lambda, op.structure);

    let mut current = base.clone();
    let mut out = Recovery {
        signal: folded.clone(),
        folds: None,
        passes: 0,
        iterations: 0,
        warnings: 0,
        traces: Vec::new(),
    };
    let schedule: Vec<usize> = if n_lambda == 0 { vec![0] } else { (1..=n_lambda).rev().collect() };
    for n in schedule {
        let mut constraint = SupportConstraint::new(n);
        if let Some(p) = &pattern {
            constraint = constraint.with_pattern(p.clone());
        }
        let est = ctx.solve(&current, &constraint, cfg, tol, op.structure)?;
        out.passes += 1;
        out.iterations += est.iterations;
        out.warnings += est.warning as usize;
        if cfg.record_trace {
            out.traces.push(est.trace.clone());
        }
        let lo = (-(n as i64) - grid.origin) as usize;
        let hi = (n as i64 - grid.origin) as usize;
        match &mut state {
            State::Lattice { folds } => {
                for p in lo..=hi {
                    let q = lattice_quotient(op, current[p], est.values[p]);
                    if q != 0 {
                        folds[p] -= q;
                        current[p] = rebuild(p, folds[p]);
                    }
                }
            }
            State::Continuous { residual } => {
                for p in lo..=hi {
                    if !constraint.contains(&grid, p) {
                        continue;
                    }
                    let total = residual[p] + est.values[p];
                    residual[p] = match op.structure {
                        ResidualStructure::SignFromSaturation => sign_rule(op, folded.values[p], total),
                        _ => total,
                    };
                    current[p] = base[p] - residual[p];
                }
            }
        }
    }
    if let State::Lattice { folds } = state {
        out.folds = Some(folds);
    }
    out.signal = folded.with_values(current);
    Ok(out)
}
