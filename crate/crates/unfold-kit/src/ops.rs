//! The amplitude nonlinearity: an invertible in-range map `g` on
//! `[-lambda, lambda]` and a rule for samples beyond the threshold.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Integer fold count `floor((x + lambda) / (2 lambda))`, corrected so the
/// wrapped value lands in `[-lambda, lambda)`.
pub fn fold_count(x: f64, lambda: f64) -> i64 {
    let two = 2.0 * lambda;
    let mut k = ((x + lambda) / two).floor() as i64;
    let y = x - two * k as f64;
    if y < -lambda {
        k -= 1;
    } else if y >= lambda {
        k += 1;
    }
    k
}

fn wrap(x: f64, lambda: f64) -> f64 {
    x - 2.0 * lambda * fold_count(x, lambda) as f64
}

/// Centered modulo: `x - 2 lambda k` with `k` from [`fold_count`].
pub fn apply_modulo(x: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(wrap(x, lambda))
}

pub fn apply_clip(x: f64, lambda: f64) -> f64 {
    x.clamp(-lambda, lambda)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold must be positive, got {lambda}")))
    }
}

/// Relative slack when testing `|y| <= lambda`.
const RANGE_SLACK: f64 = 1e-12;

fn in_range(y: f64, bound: f64) -> bool {
    y.abs() <= bound * (1.0 + RANGE_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuLawParams {
    pub mu: f64,
    pub normalizer: f64,
}

impl MuLawParams {
    pub fn new(mu: f64, normalizer: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Config(format!("mu must be positive, got {mu}")));
        }
        check_lambda(normalizer)?;
        Ok(MuLawParams { mu, normalizer })
    }

    fn compress(&self, x: f64) -> f64 {
        let a = self.normalizer;
        x.signum() * a * (self.mu * x.abs() / a).ln_1p() / self.mu.ln_1p()
    }

    fn expand(&self, y: f64) -> f64 {
        let a = self.normalizer;
        y.signum() * a * ((y.abs() / a) * self.mu.ln_1p()).exp_m1() / self.mu
    }
}

/// `a sgn(x) ln(1 + mu |x| / a) / ln(1 + mu)` for `|x| <= a`.
pub fn mu_law_forward(x: f64, p: &MuLawParams) -> Result<f64> {
    if !in_range(x, p.normalizer) {
        return Err(Error::Domain {
            value: x,
            lambda: p.normalizer,
        });
    }
    Ok(p.compress(x))
}

pub fn mu_law_inverse(y: f64, p: &MuLawParams) -> Result<f64> {
    if !in_range(y, p.normalizer) {
        return Err(Error::Domain {
            value: y,
            lambda: p.normalizer,
        });
    }
    Ok(p.expand(y))
}

/// Strictly increasing piecewise-linear map on `[-lambda, lambda]`,
/// extended linearly with the end slopes beyond the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Config("table needs at least two (x, y) knots of equal count".into()));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        if !increasing(&xs) || !increasing(&ys) {
            return Err(Error::Config("table knots must be finite and strictly increasing".into()));
        }
        Ok(MonotoneTable { xs, ys })
    }

    fn eval(from: &[f64], to: &[f64], x: f64) -> f64 {
        let n = from.len();
        let i = match from.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let t = (x - from[i]) / (from[i + 1] - from[i]);
        to[i] + t * (to[i + 1] - to[i])
    }

    fn forward(&self, x: f64) -> f64 {
        Self::eval(&self.xs, &self.ys, x)
    }

    fn inverse(&self, y: f64) -> f64 {
        Self::eval(&self.ys, &self.xs, y)
    }

    fn validate(&self, lambda: f64) -> Result<()> {
        let tol = lambda * 1e-12;
        let (x0, x1) = (self.xs[0], *self.xs.last().unwrap());
        let (y0, y1) = (self.ys[0], *self.ys.last().unwrap());
        if (x0 + lambda).abs() > tol || (x1 - lambda).abs() > tol {
            return Err(Error::Config("table must span exactly [-lambda, lambda]".into()));
        }
        if y0 < -lambda - tol || y1 > lambda + tol {
            return Err(Error::Config("table values must stay inside [-lambda, lambda]".into()));
        }
        Ok(())
    }
}

/// The invertible map applied to in-range samples.
#[derive(Debug, Clone, PartialEq)]
pub enum InRangeMap {
    Identity,
    /// mu-law with normalizer fixed to the threshold.
    MuLaw { mu: f64 },
    Table(MonotoneTable),
}

/// Behavior for samples with `|x| > lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutOfRange {
    Clip,
    Modulo,
    ModuloAfterCompand,
}

/// Structure of the residual `g^-1(folded) - f` exploited by recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualStructure {
    /// Residual of the companded samples lies on `2 lambda Z`.
    Lattice,
    /// Residual sign is dictated by which rail a sample saturated at.
    SignFromSaturation,
    None,
}

/// Built-in operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Clip,
    Modulo,
    MulawModulo,
}

impl FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "clip" | "clipping" => Ok(OperatorKind::Clip),
            "modulo" | "mod" => Ok(OperatorKind::Modulo),
            "mulaw_modulo" | "mu_law_modulo" | "mulaw" => Ok(OperatorKind::MulawModulo),
            other => Err(Error::Config(format!(
                "unknown operator kind '{other}' (expected clip, modulo or mulaw_modulo)"
            ))),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Clip => "clip",
            OperatorKind::Modulo => "modulo",
            OperatorKind::MulawModulo => "mulaw_modulo",
        })
    }
}

/// Complete description of the sampling nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub lambda: f64,
    pub in_range: InRangeMap,
    pub out_of_range: OutOfRange,
    pub structure: ResidualStructure,
}

impl OperatorSpec {
    pub fn clip(lambda: f64) -> Result<Self> {
        Self::build(lambda, InRangeMap::Identity, OutOfRange::Clip, ResidualStructure::SignFromSaturation)
    }

    pub fn modulo(lambda: f64) -> Result<Self> {
        Self::build(lambda, InRangeMap::Identity, OutOfRange::Modulo, ResidualStructure::Lattice)
    }

    pub fn mulaw_modulo(lambda: f64, mu: f64) -> Result<Self> {
        Self::build(
            lambda,
            InRangeMap::MuLaw { mu },
            OutOfRange::ModuloAfterCompand,
            ResidualStructure::Lattice,
        )
    }

    pub fn from_kind(kind: OperatorKind, lambda: f64, mu: f64) -> Result<Self> {
        match kind {
            OperatorKind::Clip => Self::clip(lambda),
            OperatorKind::Modulo => Self::modulo(lambda),
            OperatorKind::MulawModulo => Self::mulaw_modulo(lambda, mu),
        }
    }

    pub fn build(
        lambda: f64,
        in_range: InRangeMap,
        out_of_range: OutOfRange,
        structure: ResidualStructure,
    ) -> Result<Self> {
        let op = OperatorSpec {
            lambda,
            in_range,
            out_of_range,
            structure,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        match &self.in_range {
            InRangeMap::Identity => {}
            InRangeMap::MuLaw { mu } => {
                MuLawParams::new(*mu, self.lambda)?;
            }
            InRangeMap::Table(t) => t.validate(self.lambda)?,
        }
        let ok = match self.structure {
            ResidualStructure::Lattice => match self.out_of_range {
                OutOfRange::ModuloAfterCompand => true,
                OutOfRange::Modulo => self.is_identity(),
                OutOfRange::Clip => false,
            },
            ResidualStructure::SignFromSaturation => self.out_of_range == OutOfRange::Clip,
            ResidualStructure::None => true,
        };
        if !ok {
            return Err(Error::Config(format!(
                "residual structure {:?} does not match out-of-range mode {:?} with this in-range map",
                self.structure, self.out_of_range
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.in_range, InRangeMap::Identity)
    }

    pub fn kind(&self) -> Option<OperatorKind> {
        match (&self.in_range, self.out_of_range) {
            (InRangeMap::Identity, OutOfRange::Clip) => Some(OperatorKind::Clip),
            (InRangeMap::Identity, OutOfRange::Modulo | OutOfRange::ModuloAfterCompand) => {
                Some(OperatorKind::Modulo)
            }
            (InRangeMap::MuLaw { .. }, OutOfRange::ModuloAfterCompand) => Some(OperatorKind::MulawModulo),
            _ => None,
        }
    }

    fn mu_params(&self, mu: f64) -> MuLawParams {
        MuLawParams {
            mu,
            normalizer: self.lambda,
        }
    }

    /// Full-range compander: `g` on `[-lambda, lambda]`, its natural
    /// extension outside.
    pub fn compand(&self, x: f64) -> f64 {
        match &self.in_range {
            InRangeMap::Identity => x,
            InRangeMap::MuLaw { mu } => self.mu_params(*mu).compress(x),
            InRangeMap::Table(t) => t.forward(x),
        }
    }

    /// Inverse of [`OperatorSpec::compand`] over the whole real line.
    pub fn expand(&self, y: f64) -> f64 {
        match &self.in_range {
            InRangeMap::Identity => y,
            InRangeMap::MuLaw { mu } => self.mu_params(*mu).expand(y),
            InRangeMap::Table(t) => t.inverse(y),
        }
    }

    /// Applies the operator to one sample. Output lies in `[-lambda, lambda]`.
    pub fn apply(&self, x: f64) -> f64 {
        let l = self.lambda;
        if x.abs() <= l {
            return self.compand(x).clamp(-l, l);
        }
        match self.out_of_range {
            OutOfRange::Clip => l.copysign(x),
            OutOfRange::Modulo => wrap(x, l),
            OutOfRange::ModuloAfterCompand => wrap(self.compand(x), l),
        }
    }
}

/// Applies the operator samplewise.
pub fn apply_operator(signal: &SampledSignal, op: &OperatorSpec) -> SampledSignal {
    signal.with_values(signal.values.iter().map(|&x| op.apply(x)).collect())
}

/// `g^-1(y)` for a folded sample `|y| <= lambda`.
pub fn invert_in_range(op: &OperatorSpec, y: f64) -> Result<f64> {
    if !in_range(y, op.lambda) {
        return Err(Error::Domain {
            value: y,
            lambda: op.lambda,
        });
    }
    Ok(op.expand(y))
}

/// Replaces sample `n0` of a Nyquist-rate signal with `g^-1` of its folded
/// value. The result differs from the input yet folds to the same samples.
pub fn construct_nyquist_counterexample(
    signal: &SampledSignal,
    op: &OperatorSpec,
    n0: i64,
) -> Result<SampledSignal> {
    let of = signal.grid.oversampling_factor();
    if (of - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "counterexample needs a Nyquist-rate grid, oversampling factor is {of}"
        )));
    }
    let p = signal
        .grid
        .position(n0)
        .ok_or_else(|| Error::Precondition(format!("index {n0} lies outside the window")))?;
    let x = signal.values[p];
    if x.abs() <= op.lambda {
        return Err(Error::Precondition(format!(
            "sample {n0} = {x} does not exceed the threshold {}",
            op.lambda
        )));
    }
    let mut values = signal.values.clone();
    values[p] = invert_in_range(op, op.apply(x))?;
    Ok(signal.with_values(values))
}
