//! Python bindings. Sequences cross the boundary as lists of floats.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kit::bench::{compute_mse as mse, compute_snr as snr, run_experiment_detailed, sweep_to_string, MseReport};
use kit::config::parse_runs;
use kit::signal::{Kernel, SincTerm, SynthesisConfig};

fn err(e: kit::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "SamplingGrid", frozen, from_py_object)]
#[derive(Clone)]
struct Grid(kit::SamplingGrid);

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (sample_interval, band_edge, length, origin=None))]
    fn new(sample_interval: f64, band_edge: f64, length: usize, origin: Option<i64>) -> PyResult<Self> {
        let g = kit::SamplingGrid::new(sample_interval, band_edge, length).map_err(err)?;
        Ok(Grid(origin.map_or(g, |o| g.with_origin(o))))
    }

    /// Unit sampling interval with band edge `pi / of`, centered window.
    #[staticmethod]
    fn from_oversampling(of: f64, length: usize) -> PyResult<Self> {
        kit::SamplingGrid::from_oversampling(of, length).map(Grid).map_err(err)
    }

    #[getter]
    fn sample_interval(&self) -> f64 {
        self.0.sample_interval
    }

    #[getter]
    fn band_edge(&self) -> f64 {
        self.0.band_edge
    }

    #[getter]
    fn length(&self) -> usize {
        self.0.length
    }

    #[getter]
    fn origin(&self) -> i64 {
        self.0.origin
    }

    #[getter]
    fn oversampling_factor(&self) -> f64 {
        self.0.oversampling_factor()
    }

    fn indices(&self) -> Vec<i64> {
        self.0.indices().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "SamplingGrid(sample_interval={}, band_edge={}, length={}, origin={})",
            self.0.sample_interval, self.0.band_edge, self.0.length, self.0.origin
        )
    }
}

#[pyclass(name = "SampledSignal", frozen, from_py_object)]
#[derive(Clone)]
struct Signal(kit::SampledSignal);

#[pymethods]
impl Signal {
    #[new]
    fn new(grid: Grid, values: Vec<f64>) -> PyResult<Self> {
        kit::SampledSignal::new(grid.0, values).map(Signal).map_err(err)
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid(self.0.grid)
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    fn peak(&self) -> f64 {
        self.0.peak()
    }

    fn energy(&self) -> f64 {
        self.0.energy()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("SampledSignal(length={}, peak={})", self.0.len(), self.0.peak())
    }
}

#[pyclass(name = "OperatorSpec", frozen, from_py_object)]
#[derive(Clone)]
struct Operator(kit::OperatorSpec);

#[pymethods]
impl Operator {
    /// `kind` is "clip", "modulo" or "mulaw_modulo"; `lam` is the threshold.
    #[new]
    #[pyo3(signature = (kind, lam, mu=255.0))]
    fn new(kind: &str, lam: f64, mu: f64) -> PyResult<Self> {
        let k: kit::OperatorKind = kind.parse().map_err(err)?;
        kit::OperatorSpec::from_kind(k, lam, mu).map(Operator).map_err(err)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn kind(&self) -> Option<String> {
        self.0.kind().map(|k| k.to_string())
    }

    /// Operator applied to one sample.
    fn apply(&self, x: f64) -> f64 {
        self.0.apply(x)
    }

    fn __repr__(&self) -> String {
        format!(
            "OperatorSpec(kind={:?}, lam={})",
            self.kind().unwrap_or_else(|| "custom".into()),
            self.0.lambda
        )
    }
}

#[pyclass(name = "Recovery", frozen)]
struct Recovered(kit::Recovery);

#[pymethods]
impl Recovered {
    #[getter]
    fn signal(&self) -> Signal {
        Signal(self.0.signal.clone())
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.signal.values.clone()
    }

    /// Integer fold counts, for lattice-structured operators.
    #[getter]
    fn folds(&self) -> Option<Vec<i64>> {
        self.0.folds.clone()
    }

    #[getter]
    fn passes(&self) -> usize {
        self.0.passes
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn warnings(&self) -> usize {
        self.0.warnings
    }
}

fn kernel(name: &str) -> PyResult<Kernel> {
    match name {
        "periodic" => Ok(Kernel::Periodic),
        "sinc" => Ok(Kernel::Sinc),
        other => Err(PyValueError::new_err(format!("unknown kernel '{other}'"))),
    }
}

/// Peak-normalized sum of `num_sincs` random sincs on an OF grid.
#[pyfunction]
#[pyo3(signature = (of, length=1024, num_sincs=12, seed=0, kernel_name="periodic"))]
fn synthesize(of: f64, length: usize, num_sincs: usize, seed: u64, kernel_name: &str) -> PyResult<Signal> {
    let grid = kit::SamplingGrid::from_oversampling(of, length).map_err(err)?;
    let mut cfg = SynthesisConfig::new(grid, num_sincs, seed);
    cfg.kernel = kernel(kernel_name)?;
    kit::signal::synthesize_sum_of_sincs(&cfg).map(Signal).map_err(err)
}

/// Unit-height sinc centered at index 0.
#[pyfunction]
#[pyo3(signature = (of, length=1024, kernel_name="periodic"))]
fn single_sinc(of: f64, length: usize, kernel_name: &str) -> PyResult<Signal> {
    let grid = kit::SamplingGrid::from_oversampling(of, length).map_err(err)?;
    let term = SincTerm {
        coefficient: 1.0,
        center: 0.0,
    };
    let s = kit::signal::synthesize_terms(&grid, &[term], kernel(kernel_name)?).map_err(err)?;
    kit::signal::normalize_peak(&s).map(Signal).map_err(err)
}

#[pyfunction]
fn apply_operator(signal: &Signal, op: &Operator) -> Signal {
    Signal(kit::ops::apply_operator(&signal.0, &op.0))
}

/// Largest |n| with |f[n]| >= lam.
#[pyfunction]
fn support_bound(signal: &Signal, lam: f64) -> usize {
    kit::signal::compute_support_bound(&signal.0, lam)
}

#[pyfunction]
#[pyo3(signature = (folded, op, n_lambda, max_iters=None))]
fn b2r2_recover(folded: &Signal, op: &Operator, n_lambda: usize, max_iters: Option<usize>) -> PyResult<Recovered> {
    let mut cfg = kit::PgdConfig::default();
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    kit::b2r2_recover(&folded.0, &op.0, n_lambda, &cfg)
        .map(Recovered)
        .map_err(err)
}

#[pyfunction]
fn vandermonde_recover(folded: &Signal, op: &Operator, n_lambda: usize) -> PyResult<Recovered> {
    kit::vandermonde_recover(&folded.0, &op.0, n_lambda)
        .map(Recovered)
        .map_err(err)
}

/// Higher-order-difference unwrapping anchored on the samples beyond `n_lambda`.
#[pyfunction]
fn hod_recover(folded: &Signal, lam: f64, order: usize, n_lambda: usize) -> PyResult<Recovered> {
    let cfg = kit::HodConfig {
        order,
        anchor: kit::AnchorPolicy::Tail { n_lambda },
    };
    kit::hod_recover(&folded.0, lam, &cfg).map(Recovered).map_err(err)
}

#[pyfunction]
fn compute_mse(truth: Vec<f64>, recovered: Vec<f64>) -> PyResult<f64> {
    mse(&truth, &recovered).map_err(err)
}

#[pyfunction]
fn compute_snr(folded: Vec<f64>, noise: Vec<f64>) -> f64 {
    snr(&folded, &noise)
}

/// Runs a TOML run file or preset and returns the sweep CSV text.
#[pyfunction]
fn run_sweep(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let runs = parse_runs(config_toml).map_err(err)?;
    py.detach(|| {
        let mut report = MseReport::default();
        for run in &runs {
            let cfg = run.to_experiment()?;
            report.rows.extend(run_experiment_detailed(&cfg)?.0.rows);
        }
        sweep_to_string(&report)
    })
    .map_err(err)
}

#[pyfunction]
fn read_signal(path: PathBuf) -> PyResult<Signal> {
    kit::io::read_signal(&path).map(Signal).map_err(err)
}

#[pyfunction]
fn write_signal(signal: &Signal, path: PathBuf) -> PyResult<()> {
    kit::io::write_signal(&signal.0, &path).map_err(err)
}

#[pymodule]
#[pyo3(name = "unfold_kit")]
fn unfold_kit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Signal>()?;
    m.add_class::<Operator>()?;
    m.add_class::<Recovered>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(single_sinc, m)?)?;
    m.add_function(wrap_pyfunction!(apply_operator, m)?)?;
    m.add_function(wrap_pyfunction!(support_bound, m)?)?;
    m.add_function(wrap_pyfunction!(b2r2_recover, m)?)?;
    m.add_function(wrap_pyfunction!(vandermonde_recover, m)?)?;
    m.add_function(wrap_pyfunction!(hod_recover, m)?)?;
    m.add_function(wrap_pyfunction!(compute_mse, m)?)?;
    m.add_function(wrap_pyfunction!(compute_snr, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(read_signal, m)?)?;
    m.add_function(wrap_pyfunction!(write_signal, m)?)?;
    Ok(())
}
