use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::metrics::{compute_snr, ratio_to_db};
use super::noise::{bounded_sigma_for_snr, draw_noise, NoiseKind, NoiseModel};
use super::report::{MseReport, MseRow};
use super::derive_seed;
use crate::error::{Error, Result};
use crate::ops::{apply_operator, OperatorKind, OperatorSpec};
use crate::recovery::{auto_order, b2r2_recover, hod_recover, vandermonde_recover, AnchorPolicy, HodConfig, PgdConfig};
use crate::signal::{
    check_edge_decay, compute_support_bound, normalize_peak, synthesize_sum_of_sincs, synthesize_terms, Kernel,
    SampledSignal, SamplingGrid, SincTerm, SynthesisConfig,
};
use crate::spectral::bandlimit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    B2r2,
    Vandermonde,
    Hod,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::B2r2 => "b2r2",
            Algorithm::Vandermonde => "vandermonde",
            Algorithm::Hod => "hod",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b2r2" => Ok(Algorithm::B2r2),
            "vandermonde" | "vand" => Ok(Algorithm::Vandermonde),
            "hod" => Ok(Algorithm::Hod),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected b2r2, vand or hod)"
            ))),
        }
    }
}

/// Noise setting of one row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Noiseless,
    /// Uniform noise scaled to a target SNR.
    BoundedSnr(f64),
    /// Uniform noise with `sigma = lambda / ratio`.
    BoundedRatio(f64),
    GaussianSnr(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PostFilter {
    None,
    /// Projection of the recovered window onto the in-band DFT bins.
    #[default]
    Bandlimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalShape {
    SumOfSincs {
        num_sincs: usize,
        coefficient_range: (f64, f64),
        center_jitter: f64,
        center_span: f64,
    },
    /// One unit-height sinc centered at index 0.
    SingleSinc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub shape: SignalShape,
    pub kernel: Kernel,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec {
            shape: SignalShape::SumOfSincs {
                num_sincs: 12,
                coefficient_range: (-1.0, 1.0),
                center_jitter: 0.25,
                center_span: 0.4,
            },
            kernel: Kernel::Periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lambdas: Vec<f64>,
    pub ofs: Vec<f64>,
    pub levels: Vec<NoiseLevel>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub length: usize,
    pub seed: u64,
    pub operator: OperatorKind,
    pub mu: f64,
    pub signal: SignalSpec,
    pub pgd: PgdConfig,
    /// `None` picks the order from the oversampling bound.
    pub hod_order: Option<usize>,
    pub postfilter: PostFilter,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambdas: vec![0.2],
            ofs: vec![4.0],
            levels: vec![NoiseLevel::Noiseless],
            trials: 50,
            algorithms: vec![Algorithm::B2r2],
            length: 1024,
            seed: 0,
            operator: OperatorKind::Modulo,
            mu: 255.0,
            signal: SignalSpec::default(),
            pgd: PgdConfig::default(),
            hod_order: None,
            postfilter: PostFilter::Bandlimit,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.ofs.is_empty() || self.levels.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config("lambda, OF, noise and algorithm lists must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        for &l in &self.lambdas {
            OperatorSpec::from_kind(self.operator, l, self.mu)?;
        }
        for &of in &self.ofs {
            SamplingGrid::from_oversampling(of, self.length)?;
        }
        self.pgd.validate()
    }

    pub fn cell_count(&self) -> usize {
        self.lambdas.len() * self.ofs.len() * self.levels.len() * self.algorithms.len()
    }
}

/// A trial that ended in an error rather than an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub of: f64,
    pub trial: usize,
    pub message: String,
}

const SIGNAL_ATTEMPTS: u64 = 100;

/// Signal shared by every trial of the `(lambda, OF)` cell, redrawn until it
/// decays near the window edges.
pub fn cell_signal(cfg: &ExperimentConfig, lambda_idx: usize, of_idx: usize) -> Result<SampledSignal> {
    let lambda = cfg.lambdas[lambda_idx];
    let grid = SamplingGrid::from_oversampling(cfg.ofs[of_idx], cfg.length)?;
    match cfg.signal.shape {
        SignalShape::SingleSinc => normalize_peak(&synthesize_terms(
            &grid,
            &[SincTerm {
                coefficient: 1.0,
                center: 0.0,
            }],
            cfg.signal.kernel,
        )?),
        SignalShape::SumOfSincs {
            num_sincs,
            coefficient_range,
            center_jitter,
            center_span,
        } => {
            let mut last = None;
            for attempt in 0..SIGNAL_ATTEMPTS {
                let syn = SynthesisConfig {
                    num_sincs,
                    coefficient_seed: derive_seed(cfg.seed, &[1, lambda_idx as u64, of_idx as u64, attempt]),
                    coefficient_range,
                    center_jitter,
                    center_span,
                    kernel: cfg.signal.kernel,
                    grid,
                };
                let s = synthesize_sum_of_sincs(&syn)?;
                match check_edge_decay(&s, lambda) {
                    Ok(()) => return Ok(s),
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one attempt"))
        }
    }
}

struct TrialResult {
    snr_db: f64,
    /// Per algorithm: linear normalized MSE and warning flag, or an error.
    outcomes: Vec<std::result::Result<(f64, bool), String>>,
}

fn recover_one(
    alg: Algorithm,
    cfg: &ExperimentConfig,
    op: &OperatorSpec,
    noisy: &SampledSignal,
    truth: &SampledSignal,
    n_lambda: usize,
) -> Result<(SampledSignal, bool)> {
    match alg {
        Algorithm::B2r2 => b2r2_recover(noisy, op, n_lambda, &cfg.pgd).map(|r| (r.signal, r.warnings > 0)),
        Algorithm::Vandermonde => vandermonde_recover(noisy, op, n_lambda).map(|r| (r.signal, false)),
        Algorithm::Hod => {
            if op.kind() != Some(OperatorKind::Modulo) {
                return Err(Error::Config("higher-order differences apply to plain modulo only".into()));
            }
            let order = cfg
                .hod_order
                .unwrap_or_else(|| auto_order(&truth.grid, op.lambda, truth.peak()));
            let hod = HodConfig {
                order,
                anchor: AnchorPolicy::Tail { n_lambda },
            };
            hod_recover(noisy, op.lambda, &hod).map(|r| (r.signal, false))
        }
    }
}

fn linear_mse(truth: &[f64], rec: &[f64]) -> f64 {
    let e: f64 = truth.iter().map(|v| v * v).sum();
    let d: f64 = truth.iter().zip(rec).map(|(a, b)| (a - b) * (a - b)).sum();
    d / e
}

/// Runs every trial of every cell and aggregates per cell; trial errors are
/// returned alongside the report.
pub fn run_experiment_detailed(cfg: &ExperimentConfig) -> Result<(MseReport, Vec<TrialFailure>)> {
    cfg.validate()?;
    let nl = cfg.lambdas.len();
    let no = cfg.ofs.len();
    let nv = cfg.levels.len();
    let signals: Vec<std::result::Result<SampledSignal, String>> = (0..nl * no)
        .map(|c| cell_signal(cfg, c / no, c % no).map_err(|e| e.to_string()))
        .collect();

    let units: Vec<(usize, usize, usize, usize)> = (0..nl)
        .flat_map(|li| (0..no).flat_map(move |oi| (0..nv).map(move |vi| (li, oi, vi))))
        .flat_map(|(li, oi, vi)| (0..cfg.trials).map(move |t| (li, oi, vi, t)))
        .collect();

    let run_unit = |&(li, oi, vi, t): &(usize, usize, usize, usize)| -> TrialResult {
        let fail_all = |msg: String| TrialResult {
            snr_db: f64::NAN,
            outcomes: vec![Err(msg); cfg.algorithms.len()],
        };
        let truth = match &signals[li * no + oi] {
            Ok(s) => s,
            Err(e) => return fail_all(e.clone()),
        };
        let lambda = cfg.lambdas[li];
        let op = match OperatorSpec::from_kind(cfg.operator, lambda, cfg.mu) {
            Ok(op) => op,
            Err(e) => return fail_all(e.to_string()),
        };
        let folded = apply_operator(truth, &op);
        let kind = match cfg.levels[vi] {
            NoiseLevel::Noiseless => NoiseKind::None,
            NoiseLevel::BoundedSnr(s) => NoiseKind::BoundedUniform {
                sigma: bounded_sigma_for_snr(&folded, s),
            },
            NoiseLevel::BoundedRatio(r) => NoiseKind::BoundedUniform { sigma: lambda / r },
            NoiseLevel::GaussianSnr(s) => NoiseKind::GaussianSnr { snr_db: s },
        };
        let model = NoiseModel {
            kind,
            seed: derive_seed(cfg.seed, &[2, li as u64, oi as u64, vi as u64, t as u64]),
        };
        let v = match draw_noise(&folded, &model) {
            Ok(v) => v,
            Err(e) => return fail_all(e.to_string()),
        };
        let noisy = folded.with_values(folded.values.iter().zip(&v).map(|(a, b)| a + b).collect());
        let n_lambda = compute_support_bound(truth, lambda);
        let outcomes = cfg
            .algorithms
            .iter()
            .map(|&alg| {
                let (rec, warn) = recover_one(alg, cfg, &op, &noisy, truth, n_lambda).map_err(|e| e.to_string())?;
                let rec = match cfg.postfilter {
                    PostFilter::None => rec,
                    PostFilter::Bandlimit => bandlimit(&rec).map_err(|e| e.to_string())?,
                };
                Ok((linear_mse(&truth.values, &rec.values), warn))
            })
            .collect();
        TrialResult {
            snr_db: compute_snr(&folded.values, &v),
            outcomes,
        }
    };

    let results: Vec<TrialResult> = if cfg.jobs == 1 {
        units.iter().map(run_unit).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| units.par_iter().map(run_unit).collect())
    };

    let mut rows = Vec::with_capacity(cfg.cell_count());
    let mut failures = Vec::new();
    for (cell, chunk) in results.chunks(cfg.trials).enumerate() {
        let li = cell / (no * nv);
        let oi = (cell / nv) % no;
        let vi = cell % nv;
        let snr_db = match cfg.levels[vi] {
            NoiseLevel::Noiseless => f64::INFINITY,
            NoiseLevel::BoundedSnr(s) | NoiseLevel::GaussianSnr(s) => s,
            NoiseLevel::BoundedRatio(_) => chunk.iter().map(|r| r.snr_db).sum::<f64>() / chunk.len() as f64,
        };
        for (ai, &alg) in cfg.algorithms.iter().enumerate() {
            let mut linear = Vec::new();
            let mut flagged = 0usize;
            for (t, r) in chunk.iter().enumerate() {
                match &r.outcomes[ai] {
                    Ok((mse, warn)) => {
                        linear.push(*mse);
                        flagged += *warn as usize;
                    }
                    Err(msg) => {
                        flagged += 1;
                        failures.push(TrialFailure {
                            algorithm: alg,
                            lambda: cfg.lambdas[li],
                            of: cfg.ofs[oi],
                            trial: t,
                            message: msg.clone(),
                        });
                    }
                }
            }
            let (mse_db, mse_std_db) = if linear.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let mean = linear.iter().sum::<f64>() / linear.len() as f64;
                let dbs: Vec<f64> = linear.iter().map(|&m| ratio_to_db(m)).collect();
                let mu = dbs.iter().sum::<f64>() / dbs.len() as f64;
                let var = dbs.iter().map(|d| (d - mu) * (d - mu)).sum::<f64>() / dbs.len() as f64;
                (ratio_to_db(mean), var.sqrt())
            };
            rows.push(MseRow {
                algorithm: alg.to_string(),
                lambda: cfg.lambdas[li],
                of: cfg.ofs[oi],
                snr_db,
                mse_db,
                mse_std_db,
                trials: cfg.trials,
                fail_rate: flagged as f64 / cfg.trials as f64,
            });
        }
    }
    Ok((MseReport { rows }, failures))
}

/// Runs the sweep; per-trial errors count toward `fail_rate`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MseReport> {
    run_experiment_detailed(cfg).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::MSE_FLOOR_DB;

    #[test]
    fn noiseless_modulo_cell_hits_floor() {
        let cfg = ExperimentConfig {
            lambdas: vec![0.25],
            ofs: vec![2.0],
            trials: 1,
            seed: 4,
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].mse_db, MSE_FLOOR_DB);
        assert_eq!(report.rows[0].fail_rate, 0.0);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::B2r2, Algorithm::Vandermonde, Algorithm::Hod] {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("vand".parse::<Algorithm>().unwrap(), Algorithm::Vandermonde);
        assert!("cpf".parse::<Algorithm>().is_err());
    }

    #[test]
    fn empty_lists_are_rejected() {
        let cfg = ExperimentConfig {
            lambdas: vec![],
            ..ExperimentConfig::default()
        };
        assert!(run_experiment(&cfg).is_err());
    }
}
