//! Python bindings. Plain value types are exposed as classes; reports and
//! sweep tables cross the boundary as dicts built from the crate's JSON.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;

use qcoin_core::acceptance::Suite;
use qcoin_core::adversary::{self, CheatPoint, CheatSolution, OracleSettings};
use qcoin_core::harness::{self, ExperimentConfig, SweepAxis};
use qcoin_core::protocol;
use qcoin_core::qstate::{self, DepolarizingChannel, MeasurementBasis, ProtocolStates as CoreStates};
use qcoin_core::{json, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::AllAborted => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qcoin_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Round-trips a value through JSON into plain Python objects.
fn to_python<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = json::to_string(value).py()?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config_from(py: Python<'_>, config: &Bound<'_, PyAny>) -> PyResult<ExperimentConfig> {
    let text: String = if config.is_instance_of::<PyString>() {
        config.extract()?
    } else {
        py.import("json")?.call_method1("dumps", (config,))?.extract()?
    };
    ExperimentConfig::from_json(&text).py()
}

#[pyclass(name = "QubitState", module = "qcoin", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyQubitState(qstate::QubitState);

#[pymethods]
impl PyQubitState {
    #[new]
    fn new(x: f64, y: f64, z: f64) -> PyResult<Self> {
        qstate::QubitState::from_bloch([x, y, z]).py().map(Self)
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self(qstate::QubitState::maximally_mixed())
    }

    #[getter]
    fn bloch(&self) -> (f64, f64, f64) {
        let [x, y, z] = self.0.bloch();
        (x, y, z)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    #[getter]
    fn purity(&self) -> f64 {
        self.0.purity()
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn is_pure(&self, tol: f64) -> bool {
        self.0.is_pure(tol)
    }

    fn depolarize(&self, f: f64) -> PyResult<Self> {
        Ok(Self(DepolarizingChannel::new(f).py()?.apply(&self.0)))
    }

    /// Fidelity with a pure reference state.
    fn fidelity(&self, pure: &PyQubitState) -> PyResult<f64> {
        qstate::fidelity(&self.0, &pure.0).py()
    }

    fn trace_distance(&self, other: &PyQubitState) -> f64 {
        qstate::trace_distance(&self.0, &other.0)
    }

    /// Probability of the `+1` outcome along a unit axis.
    fn prob_plus(&self, axis: (f64, f64, f64)) -> PyResult<f64> {
        let basis = MeasurementBasis::new([axis.0, axis.1, axis.2]).py()?;
        Ok(basis.prob_plus(&self.0))
    }

    fn __repr__(&self) -> String {
        let [x, y, z] = self.0.bloch();
        format!("QubitState({x}, {y}, {z})")
    }
}

#[pyclass(name = "ProtocolStates", module = "qcoin", frozen)]
struct PyProtocolStates(CoreStates);

#[pymethods]
impl PyProtocolStates {
    #[new]
    fn new(theta: f64) -> PyResult<Self> {
        qstate::make_protocol_states(theta).py().map(Self)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn state(&self, bit: u8) -> PyResult<PyQubitState> {
        match bit {
            0 | 1 => Ok(PyQubitState(self.0.state(bit))),
            _ => Err(PyValueError::new_err("bit must be 0 or 1")),
        }
    }

    /// `|<phi_0|phi_1>|^2`.
    fn overlap(&self) -> f64 {
        self.0.overlap()
    }

    fn helstrom_success(&self) -> f64 {
        qstate::helstrom_success(&self.0).success
    }

    fn unambiguous_success(&self) -> f64 {
        qstate::unambiguous_discrimination(&self.0).success_prob
    }
}

#[pyclass(name = "CheatSolution", module = "qcoin", frozen)]
struct PyCheatSolution {
    inner: CheatSolution,
    states: CoreStates,
    f: f64,
}

#[pymethods]
impl PyCheatSolution {
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn s_x(&self) -> f64 {
        self.inner.s_x
    }

    #[getter]
    fn s_z(&self) -> f64 {
        self.inner.s_z
    }

    #[getter]
    fn regime(&self) -> Option<&'static str> {
        self.inner.regime.map(|r| r.label())
    }

    /// Bob's states `(sigma, sigma_bar, tau, tau_bar)`.
    #[getter]
    fn states(&self) -> (PyQubitState, PyQubitState, PyQubitState, PyQubitState) {
        let s = &self.inner;
        (
            PyQubitState(s.sigma),
            PyQubitState(s.sigma_bar),
            PyQubitState(s.tau),
            PyQubitState(s.tau_bar),
        )
    }

    fn mixture_residual(&self) -> f64 {
        self.inner.mixture_residual(&self.states, self.f)
    }

    fn __repr__(&self) -> String {
        format!("CheatSolution(q={}, s_x={}, s_z={})", self.inner.q, self.inner.s_x, self.inner.s_z)
    }
}

#[pyfunction]
fn theorem1_bound(gamma: f64, theta: f64) -> PyResult<f64> {
    adversary::theorem1_bound(gamma, theta).py()
}

#[pyfunction]
fn f_star(theta: f64) -> PyResult<f64> {
    adversary::f_star(theta).py()
}

/// Returns `(eps_A, CheatSolution)`.
#[pyfunction]
fn optimal_alice_bias(f: f64, theta: f64) -> PyResult<(f64, PyCheatSolution)> {
    let opt = adversary::optimal_alice_bias(f, theta).py()?;
    let states = qstate::make_protocol_states(theta).py()?;
    Ok((
        opt.eps_a,
        PyCheatSolution {
            inner: opt.solution,
            states,
            f,
        },
    ))
}

#[pyfunction]
fn build_cheat_ensemble(q: f64, s_x: f64, s_z: f64, theta: f64, f: f64) -> PyResult<PyCheatSolution> {
    let states = qstate::make_protocol_states(theta).py()?;
    let inner = adversary::build_cheat_ensemble(CheatPoint { q, s_x, s_z }, &states, f).py()?;
    Ok(PyCheatSolution { inner, states, f })
}

#[pyfunction]
fn optimal_bob_bias(theta: f64) -> PyResult<f64> {
    adversary::optimal_bob_bias(theta).py()
}

/// Returns `(eps_A, eps_B)` for a single noiseless coin.
#[pyfunction]
fn noiseless_single_coin_bounds(theta: f64) -> PyResult<(f64, f64)> {
    let b = adversary::noiseless_single_coin_bounds(theta).py()?;
    Ok((b.eps_a, b.eps_b))
}

#[pyfunction]
#[pyo3(signature = (f, theta, grid = 200, refine = 3))]
fn oracle_alice_bias<'py>(py: Python<'py>, f: f64, theta: f64, grid: usize, refine: usize) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| adversary::oracle_alice_bias(f, theta, grid, refine)).py()?;
    to_python(py, &r)
}

#[pyfunction]
#[pyo3(signature = (f, theta, gamma = None, oracle = false))]
fn bias_report<'py>(py: Python<'py>, f: f64, theta: f64, gamma: Option<f64>, oracle: bool) -> PyResult<Bound<'py, PyAny>> {
    let settings = oracle.then(OracleSettings::default);
    let r = py.detach(|| adversary::bias_report(f, theta, gamma, settings)).py()?;
    to_python(py, &r)
}

#[pyfunction]
fn default_gamma(f: f64, n: usize) -> f64 {
    protocol::default_gamma(f, n)
}

/// Runs an experiment from a config dict or JSON string; returns the report.
#[pyfunction]
#[pyo3(signature = (config, threads = None))]
fn run_experiment<'py>(py: Python<'py>, config: &Bound<'py, PyAny>, threads: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config_from(py, config)?;
    let out = py.detach(|| harness::run_experiment(&cfg, threads)).py()?;
    let report = to_python(py, &out.report)?;
    if cfg.outputs.transcripts {
        report.set_item("transcripts", to_python(py, &out.transcripts)?)?;
    }
    Ok(report)
}

/// One dict per value, with an `error` key that is `None` unless the cell failed.
#[pyfunction]
#[pyo3(signature = (axis, values, config, theory_only = false, threads = None))]
fn sweep<'py>(
    py: Python<'py>,
    axis: &str,
    values: Vec<f64>,
    config: &Bound<'py, PyAny>,
    theory_only: bool,
    threads: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let axis: SweepAxis = axis.parse().py()?;
    let base = config_from(py, config)?;
    let rows = py.detach(|| harness::sweep(axis, &values, &base, theory_only, threads));
    rows.iter()
        .map(|r| {
            let row = to_python(py, r)?;
            row.set_item("error", r.error.as_deref())?;
            Ok(row)
        })
        .collect()
}

/// Runs acceptance criteria (all by default); one dict per criterion.
#[pyfunction]
#[pyo3(signature = (ids = None, threads = None))]
fn acceptance<'py>(py: Python<'py>, ids: Option<Vec<u8>>, threads: Option<usize>) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let suite = Suite {
        threads,
        ..Suite::default()
    };
    let ids = ids.unwrap_or_else(|| Suite::ids().collect());
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let r = py
            .detach(|| suite.run(id))
            .ok_or_else(|| PyValueError::new_err(format!("no criterion {id}")))?;
        out.push(to_python(py, &r)?);
    }
    Ok(out)
}

#[pymodule]
fn qcoin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQubitState>()?;
    m.add_class::<PyProtocolStates>()?;
    m.add_class::<PyCheatSolution>()?;
    m.add_function(wrap_pyfunction!(theorem1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(f_star, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_alice_bias, m)?)?;
    m.add_function(wrap_pyfunction!(build_cheat_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_bob_bias, m)?)?;
    m.add_function(wrap_pyfunction!(noiseless_single_coin_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_alice_bias, m)?)?;
    m.add_function(wrap_pyfunction!(bias_report, m)?)?;
    m.add_function(wrap_pyfunction!(default_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
