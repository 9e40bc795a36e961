//! TOML run configuration.
//!
//! A run file has four tables; every key is optional and unknown keys are
//! rejected:
//!
//! ```toml
//! [signal]
//! length = 1024                # window length L
//! shape = "sum_of_sincs"       # or "single_sinc"
//! num_sincs = 12
//! kernel = "periodic"          # or "sinc"
//! coefficient_range = [-1.0, 1.0]
//! center_jitter = 0.25
//! center_span = 0.4            # fraction of the window holding the centers
//!
//! [operator]
//! kind = "modulo"              # "clip", "modulo" or "mulaw_modulo"
//! lambdas = [0.1]
//! mu = 255.0
//!
//! [noise]
//! kind = "bounded_ratio"       # "none", "bounded_snr", "bounded_ratio", "gaussian_snr"
//! levels = [10.0]              # SNR in dB, or lambda/sigma for bounded_ratio
//!
//! [sweep]
//! ofs = [10.0, 15.0]
//! trials = 50
//! algorithms = ["b2r2", "hod"]
//! seed = 0
//! jobs = 1
//! postfilter = "bandlimit"     # or "none"
//! hod_order = 3                # omit to derive it from OF and lambda
//! max_iters = 20000
//! ```
//!
//! A preset file instead holds one `[[run]]` array entry per run, each with
//! the same four tables.

use std::path::Path;

use serde::Deserialize;

use crate::bench::{Algorithm, ExperimentConfig, NoiseLevel, PostFilter, SignalShape, SignalSpec};
use crate::error::{Error, Result};
use crate::ops::OperatorKind;
use crate::recovery::PgdConfig;
use crate::signal::Kernel;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalSection {
    pub length: usize,
    pub shape: String,
    pub num_sincs: usize,
    pub kernel: String,
    pub coefficient_range: [f64; 2],
    pub center_jitter: f64,
    pub center_span: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        SignalSection {
            length: 1024,
            shape: "sum_of_sincs".into(),
            num_sincs: 12,
            kernel: "periodic".into(),
            coefficient_range: [-1.0, 1.0],
            center_jitter: 0.25,
            center_span: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorSection {
    pub kind: String,
    pub lambdas: Vec<f64>,
    pub mu: f64,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            kind: "modulo".into(),
            lambdas: vec![0.2],
            mu: 255.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub kind: String,
    pub levels: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            kind: "none".into(),
            levels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub ofs: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<String>,
    pub seed: u64,
    pub jobs: usize,
    pub postfilter: String,
    pub hod_order: Option<usize>,
    pub max_iters: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            ofs: vec![4.0],
            trials: 50,
            algorithms: vec!["b2r2".into()],
            seed: 0,
            jobs: 1,
            postfilter: "bandlimit".into(),
            hod_order: None,
            max_iters: PgdConfig::default().max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub signal: SignalSection,
    pub operator: OperatorSection,
    pub noise: NoiseSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    run: Vec<RunConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::io(path, e))
    }

    pub fn noise_levels(&self) -> Result<Vec<NoiseLevel>> {
        let levels = &self.noise.levels;
        let make: fn(f64) -> NoiseLevel = match self.noise.kind.as_str() {
            "none" => return Ok(vec![NoiseLevel::Noiseless]),
            "bounded_snr" => NoiseLevel::BoundedSnr,
            "bounded_ratio" => NoiseLevel::BoundedRatio,
            "gaussian_snr" => NoiseLevel::GaussianSnr,
            other => return Err(Error::Config(format!("unknown noise kind '{other}'"))),
        };
        if levels.is_empty() {
            return Err(Error::Config(format!("noise kind '{}' needs at least one level", self.noise.kind)));
        }
        Ok(levels.iter().map(|&v| make(v)).collect())
    }

    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let s = &self.signal;
        let shape = match s.shape.as_str() {
            "sum_of_sincs" => SignalShape::SumOfSincs {
                num_sincs: s.num_sincs,
                coefficient_range: (s.coefficient_range[0], s.coefficient_range[1]),
                center_jitter: s.center_jitter,
                center_span: s.center_span,
            },
            "single_sinc" => SignalShape::SingleSinc,
            other => return Err(Error::Config(format!("unknown signal shape '{other}'"))),
        };
        let kernel = match s.kernel.as_str() {
            "periodic" => Kernel::Periodic,
            "sinc" => Kernel::Sinc,
            other => return Err(Error::Config(format!("unknown kernel '{other}'"))),
        };
        let postfilter = match self.sweep.postfilter.as_str() {
            "bandlimit" => PostFilter::Bandlimit,
            "none" => PostFilter::None,
            other => return Err(Error::Config(format!("unknown postfilter '{other}'"))),
        };
        let algorithms = self
            .sweep
            .algorithms
            .iter()
            .map(|a| a.parse::<Algorithm>())
            .collect::<Result<Vec<_>>>()?;
        let cfg = ExperimentConfig {
            lambdas: self.operator.lambdas.clone(),
            ofs: self.sweep.ofs.clone(),
            levels: self.noise_levels()?,
            trials: self.sweep.trials,
            algorithms,
            length: s.length,
            seed: self.sweep.seed,
            operator: self.operator.kind.parse::<OperatorKind>()?,
            mu: self.operator.mu,
            signal: SignalSpec { shape, kernel },
            pgd: PgdConfig {
                max_iters: self.sweep.max_iters,
                ..PgdConfig::default()
            },
            hod_order: self.sweep.hod_order,
            postfilter,
            jobs: self.sweep.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses either a single run file or a `[[run]]` preset.
pub fn parse_runs(text: &str) -> Result<Vec<RunConfig>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    if table.contains_key("run") {
        let preset: PresetFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if preset.run.is_empty() {
            return Err(Error::Config("preset holds no runs".into()));
        }
        Ok(preset.run)
    } else {
        Ok(vec![RunConfig::from_toml(text)?])
    }
}
