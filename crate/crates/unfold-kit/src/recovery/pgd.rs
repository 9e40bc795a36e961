//! Projected gradient descent on `C(z) = 0.5 ||F (f_hat - z)||^2` over
//! sequences supported on `S_N`.
//!
//! Iterates live in the `2N + 1` support coordinates. With `T = P_S F*F P_S`
//! and `b = P_S F*F f_hat`, the cost is `0.5 z'Tz - z'b + C(0)` and the
//! gradient is `Tz - b`, so each iteration needs one application of `T`
//! (to the search direction) and the cost along the ray is exact.

use rustfft::FftPlanner;

use super::ResidualEstimate;
use crate::error::{Error, Result};
use crate::ops::ResidualStructure;
use crate::signal::{SampledSignal, SamplingGrid};
use crate::spectral::{FrequencyBand, GramOperator, SupportConstraint, SupportGram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed { gamma: f64 },
    /// Armijo backtracking: start at `gamma0`, shrink by `alpha` until the
    /// decrease is at least `c * gamma * ||g||^2`.
    Backtracking { alpha: f64, c: f64, gamma0: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking {
            alpha: 0.5,
            c: 1e-4,
            gamma0: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdConfig {
    /// Inner iteration budget per pass.
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Absolute sup-norm step threshold. `None` picks a threshold from the
    /// operator: `1e-3 lambda` for lattice residuals, `1e-10 lambda` otherwise.
    pub stop_tol: Option<f64>,
    /// Transform length as a multiple of the window length.
    pub density: usize,
    pub record_trace: bool,
}

impl Default for PgdConfig {
    fn default() -> Self {
        PgdConfig {
            max_iters: 20_000,
            step_rule: StepRule::default(),
            stop_tol: None,
            density: 1,
            record_trace: false,
        }
    }
}

impl PgdConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.step_rule {
            StepRule::Fixed { gamma } => gamma > 0.0,
            StepRule::Backtracking { alpha, c, gamma0 } => {
                alpha > 0.0 && alpha < 1.0 && c > 0.0 && c < 1.0 && gamma0 > 0.0
            }
        };
        if !ok {
            return Err(Error::Config(format!("invalid step rule {:?}", self.step_rule)));
        }
        if let Some(tol) = self.stop_tol {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("stop_tol must be positive, got {tol}")));
            }
        }
        if self.max_iters == 0 || self.density == 0 {
            return Err(Error::Config("max_iters and density must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self, lambda: f64, structure: ResidualStructure) -> f64 {
        self.stop_tol.unwrap_or(match structure {
            ResidualStructure::Lattice => lambda * 1e-3,
            _ => lambda * 1e-10,
        })
    }
}

/// Exact resynchronization period for the incrementally updated `Tz`.
const RESYNC: usize = 64;

/// Shared transform state for a sequence of solves on one grid.
pub(crate) struct PgdContext {
    pub grid: SamplingGrid,
    pub gram: GramOperator,
    impulse: Vec<f64>,
    planner: FftPlanner<f64>,
}

impl PgdContext {
    pub fn new(grid: SamplingGrid, band: FrequencyBand) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let gram = GramOperator::new(band, grid.origin, grid.length, &mut planner)?;
        let impulse = gram.impulse_response();
        Ok(PgdContext {
            grid,
            gram,
            impulse,
            planner,
        })
    }

    pub fn check_support(&self, half_width: usize) -> Result<()> {
        let g = &self.grid;
        let n = half_width as i64;
        if g.origin > -n || g.origin + g.length as i64 - 1 < n {
            return Err(Error::Config(format!(
                "support half-width {half_width} does not fit inside the window"
            )));
        }
        Ok(())
    }

    /// Runs PGD from `z0 = P_S(F*F f_hat)`.
    pub fn solve(
        &mut self,
        f_hat: &[f64],
        constraint: &SupportConstraint,
        cfg: &PgdConfig,
        tol: f64,
        structure: ResidualStructure,
    ) -> Result<ResidualEstimate> {
        self.check_support(constraint.half_width)?;
        let sg = SupportGram::new(&self.gram, &self.impulse, constraint.half_width, &mut self.planner);
        let size = sg.size();
        let off = sg.window_offset();
        let allowed: Vec<bool> = (0..size).map(|i| constraint.contains(&self.grid, off + i)).collect();

        let hf = self.gram.apply(f_hat);
        let c0 = 0.5 * dot(f_hat, &hf);
        let b: Vec<f64> = (0..size).map(|i| if allowed[i] { hf[off + i] } else { 0.0 }).collect();

        let mut buf = Vec::new();
        let mut z = b.clone();
        let mut tz = vec![0.0; size];
        sg.apply(&z, &mut tz, &mut buf);
        let exact_cost = |z: &[f64], tz: &[f64]| 0.5 * dot(z, tz) - dot(z, &b) + c0;
        let mut cost = exact_cost(&z, &tz);
        let mut g = vec![0.0; size];
        let mut tg = vec![0.0; size];
        let mut trace = Vec::new();
        if cfg.record_trace {
            trace.push(cost);
        }

        let mut converged = false;
        let mut iterations = 0;
        while iterations < cfg.max_iters {
            for i in 0..size {
                g[i] = if allowed[i] { tz[i] - b[i] } else { 0.0 };
            }
            let gg = dot(&g, &g);
            if gg == 0.0 {
                converged = true;
                break;
            }
            sg.apply(&g, &mut tg, &mut buf);
            let gtg = dot(&g, &tg);
            let gamma = match cfg.step_rule {
                StepRule::Fixed { gamma } => gamma,
                StepRule::Backtracking { alpha, c, gamma0 } => {
                    let mut gamma = gamma0;
                    while -gamma * gg + 0.5 * gamma * gamma * gtg > -c * gamma * gg && gamma > 1e-12 {
                        gamma *= alpha;
                    }
                    gamma
                }
            };
            let mut step = 0.0_f64;
            for i in 0..size {
                z[i] -= gamma * g[i];
                tz[i] -= gamma * tg[i];
                step = step.max((gamma * g[i]).abs());
            }
            iterations += 1;
            let predicted = cost - gamma * gg + 0.5 * gamma * gamma * gtg;
            if iterations % RESYNC == 0 {
                sg.apply(&z, &mut tz, &mut buf);
                cost = exact_cost(&z, &tz);
            } else {
                cost = predicted;
            }
            if cfg.record_trace {
                trace.push(cost);
            }
            if step < tol {
                converged = true;
                break;
            }
        }

        let mut values = vec![0.0; self.grid.length];
        values[off..off + size].copy_from_slice(&z);
        Ok(ResidualEstimate {
            values,
            half_width: constraint.half_width,
            structure,
            iterations,
            warning: !converged,
            trace,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Estimates the residual of `f_hat` on the support `constraint`.
pub fn pgd_residual(
    f_hat: &SampledSignal,
    band: &FrequencyBand,
    constraint: &SupportConstraint,
    cfg: &PgdConfig,
) -> Result<ResidualEstimate> {
    cfg.validate()?;
    if band.is_empty() {
        return Err(Error::EmptyBand {
            of: 1.0 / band.band_fraction(),
        });
    }
    let mut ctx = PgdContext::new(f_hat.grid, *band)?;
    let tol = cfg.stop_tol.unwrap_or(1e-6);
    ctx.solve(&f_hat.values, constraint, cfg, tol, ResidualStructure::None)
}

/// `C(z) = 0.5 ||F(f_hat - z)||^2` and its gradient `F*F (z - f_hat)` on
/// the full window.
pub fn cost_and_gradient(f_hat: &SampledSignal, band: &FrequencyBand, z: &[f64]) -> Result<(f64, Vec<f64>)> {
    let gram = GramOperator::for_grid(&f_hat.grid, *band)?;
    let diff: Vec<f64> = z.iter().zip(&f_hat.values).map(|(a, b)| a - b).collect();
    Ok((gram.half_energy(&diff), gram.apply(&diff)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize_sum_of_sincs, SynthesisConfig};

    #[test]
    fn bandlimited_input_gives_zero_residual() {
        let g = SamplingGrid::from_oversampling(4.0, 256).unwrap();
        let f = synthesize_sum_of_sincs(&SynthesisConfig::new(g, 4, 5)).unwrap();
        let band = FrequencyBand::for_grid(&g, 1).unwrap();
        let est = pgd_residual(&f, &band, &SupportConstraint::new(10), &PgdConfig::default()).unwrap();
        assert!(est.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn fixed_and_backtracking_descend() {
        let g = SamplingGrid::from_oversampling(3.0, 128).unwrap();
        let mut vals = vec![0.0; 128];
        vals[64] = 0.7;
        vals[66] = -0.4;
        let f = SampledSignal::new(g, vals).unwrap();
        let band = FrequencyBand::for_grid(&g, 1).unwrap();
        for rule in [StepRule::Fixed { gamma: 1.0 }, StepRule::default()] {
            let cfg = PgdConfig {
                step_rule: rule,
                record_trace: true,
                max_iters: 300,
                stop_tol: Some(1e-14),
                ..PgdConfig::default()
            };
            let est = pgd_residual(&f, &band, &SupportConstraint::new(3), &cfg).unwrap();
            let slack = 1e-12 * est.trace[0];
            assert!(est.trace.windows(2).all(|w| w[1] <= w[0] + slack));
            assert!(est.trace.last().unwrap() < &est.trace[0]);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = PgdConfig {
            step_rule: StepRule::Fixed { gamma: 0.0 },
            ..PgdConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PgdConfig {
            stop_tol: Some(-1.0),
            ..PgdConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
