use super::pgd::dot;
use super::ResidualEstimate;
use crate::error::{Error, Result};
use crate::ops::{OperatorSpec, ResidualStructure};
use crate::signal::SampledSignal;
use crate::spectral::{FrequencyBand, GramOperator};

/// Largest search space the oracle accepts.
pub const ORACLE_LIMIT: f64 = 1e7;

/// Exhaustive minimizer of `||F (g^-1(folded) - z)||^2` over residuals whose
/// fold counts on `{-N, ..., N}` lie in `[-k_max, k_max]`.
pub fn brute_force_residual_oracle(
    folded: &SampledSignal,
    op: &OperatorSpec,
    n_lambda: usize,
    k_max: usize,
) -> Result<ResidualEstimate> {
    op.validate()?;
    if op.structure != ResidualStructure::Lattice {
        return Err(Error::Config("the oracle enumerates lattice residuals only".into()));
    }
    let dim = 2 * n_lambda + 1;
    let choices = 2 * k_max + 1;
    let size = (choices as f64).powi(dim as i32);
    if size > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    let grid = folded.grid;
    let n = n_lambda as i64;
    if grid.origin > -n || grid.origin + grid.length as i64 - 1 < n {
        return Err(Error::Config(format!(
            "support half-width {n_lambda} does not fit inside the window"
        )));
    }
    let band = FrequencyBand::for_grid(&grid, 1)?;
    let gram = GramOperator::for_grid(&grid, band)?;
    let lambda = op.lambda;
    let clamped: Vec<f64> = folded.values.iter().map(|y| y.clamp(-lambda, lambda)).collect();
    let base: Vec<f64> = if op.is_identity() {
        folded.values.clone()
    } else {
        clamped.iter().map(|&y| op.expand(y)).collect()
    };
    let off = grid.position(-n).expect("support inside window");

    // Objective in support coordinates: 0.5 z'Tz - z'b + const.
    let hb = gram.apply(&base);
    let b: Vec<f64> = hb[off..off + dim].to_vec();
    let mut t = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut e = vec![0.0; grid.length];
        e[off + j] = 1.0;
        let col = gram.apply(&e);
        for i in 0..dim {
            t[i * dim + j] = col[off + i];
        }
    }

    let candidate = |p: usize, k: i64| -> f64 {
        let v = if op.is_identity() {
            folded.values[p] + 2.0 * lambda * k as f64
        } else {
            op.expand(clamped[p] + 2.0 * lambda * k as f64)
        };
        base[p] - v
    };
    let mut digits = vec![-(k_max as i64); dim];
    let mut z = vec![0.0; dim];
    let mut tz = vec![0.0; dim];
    let mut best = (f64::INFINITY, z.clone());
    loop {
        for i in 0..dim {
            z[i] = candidate(off + i, digits[i]);
        }
        for i in 0..dim {
            tz[i] = dot(&t[i * dim..(i + 1) * dim], &z);
        }
        let obj = 0.5 * dot(&z, &tz) - dot(&z, &b);
        if obj < best.0 {
            best = (obj, z.clone());
        }
        let mut i = 0;
        while i < dim && digits[i] == k_max as i64 {
            digits[i] = -(k_max as i64);
            i += 1;
        }
        if i == dim {
            break;
        }
        digits[i] += 1;
    }
    let mut values = vec![0.0; grid.length];
    values[off..off + dim].copy_from_slice(&best.1);
    Ok(ResidualEstimate {
        values,
        half_width: n_lambda,
        structure: ResidualStructure::Lattice,
        iterations: size as usize,
        warning: false,
        trace: Vec::new(),
    })
}
