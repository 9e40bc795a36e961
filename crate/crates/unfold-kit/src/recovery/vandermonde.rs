use nalgebra::DVector;

use super::rounding::{lattice_quotient, sign_rule};
use super::Recovery;
use crate::error::{Error, Result};
use crate::ops::{OperatorSpec, ResidualStructure};
use crate::signal::SampledSignal;
use crate::spectral::{build_vandermonde, partial_dtft, FrequencyBand, SupportConstraint};

/// Condition numbers above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Solves the square Vandermonde system for the residual on `S_{N_lambda}`
/// from the out-of-band spectrum at `2 N_lambda + 1` nodes, rounds it per the
/// operator's residual structure and subtracts it from `g^-1(folded)`.
pub fn vandermonde_recover(folded: &SampledSignal, op: &OperatorSpec, n_lambda: usize) -> Result<Recovery> {
    op.validate()?;
    let grid = folded.grid;
    let band = FrequencyBand::for_grid(&grid, 1)?;
    let system = build_vandermonde(&band, &SupportConstraint::new(n_lambda))?;
    let n = n_lambda as i64;
    if grid.origin > -n || grid.origin + grid.length as i64 - 1 < n {
        return Err(Error::Config(format!(
            "support half-width {n_lambda} does not fit inside the window"
        )));
    }
    let cond = system.condition_number();
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { cond });
    }

    let lambda = op.lambda;
    let clamped: Vec<f64> = folded.values.iter().map(|y| y.clamp(-lambda, lambda)).collect();
    let base: Vec<f64> = if op.is_identity() {
        folded.values.clone()
    } else {
        clamped.iter().map(|&y| op.expand(y)).collect()
    };
    let spectrum = partial_dtft(&folded.with_values(base.clone()), &band)?;
    let rhs = DVector::from_iterator(
        system.bins.len(),
        system.bins.iter().map(|k| {
            let i = spectrum.bins.binary_search(k).expect("node lies on a band bin");
            spectrum.values[i]
        }),
    );
    let solution = system
        .matrix
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;

    let two = 2.0 * lambda;
    let mut values = base.clone();
    let mut folds = (op.structure == ResidualStructure::Lattice).then(|| vec![0_i64; grid.length]);
    for (j, z) in solution.iter().enumerate() {
        let idx = j as i64 - n;
        let p = grid.position(idx).expect("support inside window");
        let est = z.re;
        match op.structure {
            ResidualStructure::Lattice => {
                let q = lattice_quotient(op, base[p], est);
                if let Some(f) = folds.as_mut() {
                    f[p] = -q;
                }
                values[p] = if op.is_identity() {
                    folded.values[p] - two * q as f64
                } else {
                    op.expand(clamped[p] - two * q as f64)
                };
            }
            ResidualStructure::SignFromSaturation => {
                values[p] = base[p] - sign_rule(op, folded.values[p], est);
            }
            ResidualStructure::None => values[p] = base[p] - est,
        }
    }
    Ok(Recovery {
        signal: folded.with_values(values),
        folds,
        passes: 1,
        iterations: 0,
        warnings: 0,
        traces: Vec::new(),
    })
}
