//! Python bindings: `import kbk`.

use std::path::PathBuf;

use kbk_core::diagnostics::{self as diag, DiagnosticsRecord};
use kbk_core::exact::{self, GaussianKind, SolitonParams};
use kbk_core::experiment::{self, Scenario, ScenarioConfig};
use kbk_core::{KbkError, KbkModel, ModelParams};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: KbkError) -> PyErr {
    match e {
        KbkError::Io { .. } => PyOSError::new_err(e.to_string()),
        KbkError::BlowUp { .. } | KbkError::FitFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Periodic grid on `[-Lπ, Lπ)` with `N` nodes.
#[pyclass(name = "Grid", module = "kbk", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid(pub kbk_core::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(l: f64, n: usize) -> PyResult<Self> {
        kbk_core::Grid::new(l, n).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn l(&self) -> f64 {
        self.0.l()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.len()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn wavenumbers(&self) -> Vec<f64> {
        self.0.wavenumbers().to_vec()
    }

    /// Spectral derivative of a real field, orders 1 to 4.
    #[pyo3(signature = (field, order = 1))]
    fn derivative(&self, field: Vec<f64>, order: u32) -> PyResult<Vec<f64>> {
        self.0.derivative(&field, order).map_err(to_py)
    }

    fn integrate(&self, field: Vec<f64>) -> PyResult<f64> {
        self.0.integrate(&field).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Grid(l={}, n={})", self.0.l(), self.0.len())
    }
}

/// Surface elevation `eta` and velocity `v` sampled on a grid.
#[pyclass(name = "State", module = "kbk", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyState(pub kbk_core::State);

#[pymethods]
impl PyState {
    #[new]
    fn new(grid: &PyGrid, eta: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        kbk_core::State::new(&grid.0, eta, v).map(PyState).map_err(to_py)
    }

    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.0.eta.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.0.v.clone()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn max_abs_diff(&self, other: &PyState) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("State(n={})", self.0.eta.len())
    }
}

/// The KBK flow on a grid with dispersion scale `eps`.
#[pyclass(name = "Model", module = "kbk", frozen, skip_from_py_object)]
pub struct PyModel(pub KbkModel);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (grid, eps = 1.0, dealias = false))]
    fn new(grid: &PyGrid, eps: f64, dealias: bool) -> PyResult<Self> {
        let mut params = ModelParams::new(eps).map_err(to_py)?;
        if dealias {
            params = params.with_two_thirds_dealiasing();
        }
        KbkModel::new(&grid.0, params).map(PyModel).map_err(to_py)
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }

    /// Time derivative `(eta_t, v_t)` of a state.
    fn rhs(&self, state: &PyState) -> PyResult<PyState> {
        self.0.rhs_physical(&state.0).map(PyState).map_err(to_py)
    }

    /// Diagonal variables `(u_plus, u_minus)` as lists of complex numbers.
    fn to_diagonal(&self, state: &PyState) -> PyResult<(Vec<num_complex::Complex64>, Vec<num_complex::Complex64>)> {
        let d = self.0.to_diagonal(&state.0).map_err(to_py)?;
        Ok((d.u_plus().to_vec(), d.u_minus().to_vec()))
    }
}

#[pyfunction]
#[pyo3(signature = (grid, c, x0 = 0.0, t = 0.0))]
fn good_soliton(grid: &PyGrid, c: f64, x0: f64, t: f64) -> PyResult<PyState> {
    let p = SolitonParams::new(c, x0).map_err(to_py)?;
    exact::good_soliton(&p, t, &grid.0).map(PyState).map_err(to_py)
}

/// Gaussian bump in `v` (`kind="v"`) or in `eta` (`kind="eta"`).
#[pyfunction]
#[pyo3(signature = (grid, amplitude, kind = "v"))]
fn gaussian(grid: &PyGrid, amplitude: f64, kind: &str) -> PyResult<PyState> {
    let kind = match kind {
        "v" => GaussianKind::VelocityBump,
        "eta" => GaussianKind::ElevationBump,
        other => return Err(PyValueError::new_err(format!("kind must be 'v' or 'eta', got {other:?}"))),
    };
    exact::gaussian_data(kind, amplitude, &grid.0).map(PyState).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (grid, eps = 1.0))]
fn stationary_solution(grid: &PyGrid, eps: f64) -> PyResult<PyState> {
    exact::stationary_solution(eps, &grid.0).map(PyState).map_err(to_py)
}

/// Advances `state` to `t_final` in `nt` ETDRK4 steps. With `every`, also
/// returns the states at every `every`-th step as `(t, State)` pairs.
#[pyfunction]
#[pyo3(signature = (state, model, t_final, nt, every = None))]
fn evolve(
    py: Python<'_>,
    state: &PyState,
    model: &PyModel,
    t_final: f64,
    nt: usize,
    every: Option<usize>,
) -> PyResult<(PyState, Vec<(f64, PyState)>)> {
    let (s0, m) = (&state.0, &model.0);
    py.detach(|| {
        let mut samples = Vec::new();
        let last = match every {
            Some(k) => kbk_core::evolve(s0, m, t_final, nt, k, |_, t, s| {
                samples.push((t, PyState(s.clone())));
                Ok(())
            }),
            None => kbk_core::evolve_plain(s0, m, t_final, nt),
        };
        last.map(|s| (PyState(s), samples))
    })
    .map_err(to_py)
}

fn record_dict<'py>(py: Python<'py>, r: &DiagnosticsRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("E", r.energy)?;
    d.set_item("delta", r.delta)?;
    d.set_item("H0", r.h0)?;
    d.set_item("I3", r.i3)?;
    d.set_item("mass_eta", r.mass_eta)?;
    d.set_item("mass_v", r.mass_v)?;
    d.set_item("rho", r.rho_integrals.clone())?;
    d.set_item("tail", r.tail)?;
    d.set_item("min_depth", r.min_depth)?;
    Ok(d)
}

/// All monitored quantities of a state as a dict.
#[pyfunction]
#[pyo3(signature = (state, eps = 1.0, t = 0.0, reference_energy = None))]
fn diagnostics<'py>(
    py: Python<'py>,
    state: &PyState,
    eps: f64,
    t: f64,
    reference_energy: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = DiagnosticsRecord::compute(&state.0, eps, t, reference_energy).map_err(to_py)?;
    record_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (state, eps = 1.0))]
fn energy(state: &PyState, eps: f64) -> PyResult<f64> {
    diag::energy(&state.0, eps).map_err(to_py)
}

#[pyfunction]
fn dft_tail(state: &PyState) -> PyResult<f64> {
    diag::dft_tail(&state.0).map_err(to_py)
}

/// Soliton fit around the global maximum of `v`; raises RuntimeError on failure.
#[pyfunction]
#[pyo3(signature = (state, window = diag::DEFAULT_FIT_WINDOW))]
fn fit_soliton<'py>(py: Python<'py>, state: &PyState, window: f64) -> PyResult<Bound<'py, PyDict>> {
    let f = diag::fit_soliton(&state.0, window).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("C", f.c_fit)?;
    d.set_item("x0", f.x0_fit)?;
    d.set_item("peak", f.peak)?;
    d.set_item("residual", f.residual)?;
    Ok(d)
}

/// Runs a named scenario into `out`. Keyword arguments override the
/// scenario defaults using the config-file keys (`L`, `N`, `Nt`, `eps`, ...).
#[pyfunction]
#[pyo3(signature = (scenario, out, **overrides))]
fn run_scenario<'py>(
    py: Python<'py>,
    scenario: &str,
    out: PathBuf,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let scenario: Scenario = scenario.parse().map_err(to_py)?;
    let mut cfg = ScenarioConfig::defaults(scenario);
    if let Some(kw) = overrides {
        for (k, v) in kw.iter() {
            let (k, v) = (k.str()?.to_string(), v.str()?.to_string());
            cfg.set(&k, &v).map_err(to_py)?;
        }
    }
    cfg.output_dir = out;
    let outcome = py.detach(|| experiment::run_scenario(&cfg)).map_err(to_py)?;

    let d = PyDict::new(py);
    d.set_item("status", outcome.status.describe())?;
    d.set_item("ok", outcome.status.is_success())?;
    d.set_item("dir", outcome.dir.clone())?;
    d.set_item("config", outcome.config.echo())?;
    d.set_item("max_error", outcome.max_error)?;
    d.set_item("max_delta", outcome.max_delta())?;
    d.set_item("max_tail", outcome.max_tail())?;
    d.set_item("wall_time", outcome.wall_time.as_secs_f64())?;
    match &outcome.fit {
        Some(Ok(f)) => d.set_item("fit", (f.c_fit, f.x0_fit, f.residual))?,
        _ => d.set_item("fit", py.None())?,
    }
    let records = outcome
        .records
        .iter()
        .map(|r| record_dict(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("records", records)?;
    d.set_item("final_state", outcome.final_state.map(PyState))?;
    Ok(d)
}

#[pymodule]
pub fn kbk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(good_soliton, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_solution, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(dft_tail, m)?)?;
    m.add_function(wrap_pyfunction!(fit_soliton, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
