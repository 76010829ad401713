//! Python bindings for the radial conformal toolkit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use conformal_core::conformal::{
    assemble_initial_data, monotonicity_condition, read_bundle_csv, write_bundle_csv, ConformalSolution,
};
use conformal_core::radial::{build_grid, Dimension, RadialGrid, RadialProfile};
use conformal_core::scenario::{run_scenario, to_json_17, Command, GridSpec, ScenarioConfig};
use conformal_core::solver::{fixed_point_solve, smooth_schwarzschild_phi, SolveControls};
use conformal_core::verify::{
    adm_mass, check_solution, decay_exponents, residual_report, sample_points, tail_limit_check, DecayWindows,
    H_SCALE,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(radial_conformal, ConformalError, PyException);

fn to_py(e: conformal_core::Error) -> PyErr {
    match e {
        conformal_core::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        other => ConformalError::new_err(format!("{}: {other}", other.kind())),
    }
}

fn json_value<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_json_17(value),))
}

/// Radial grid `r = a sinh(b ξ)` on uniform `ξ`.
#[pyclass(name = "Grid", module = "radial_conformal", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrid(RadialGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (points = 4000, r_max = 1e4, stretch = 1.01))]
    fn new(points: usize, r_max: f64, stretch: f64) -> PyResult<Self> {
        build_grid(points, r_max, stretch).map(PyGrid).map_err(to_py)
    }

    /// Rebuild a grid from explicit nodes starting at `r = 0`.
    #[staticmethod]
    fn from_nodes(nodes: Vec<f64>) -> PyResult<Self> {
        RadialGrid::from_nodes(nodes).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.0.r_max()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(points={}, r_max={})", self.0.len(), self.0.r_max())
    }
}

/// A consistent radial solution `(φ, τ, A, w, |LW|)`.
#[pyclass(name = "Solution", module = "radial_conformal", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolution(ConformalSolution);

#[pymethods]
impl PySolution {
    /// Build `τ` and the potentials from sampled values of `φ`.
    #[staticmethod]
    fn from_phi(n: usize, grid: &PyGrid, phi: Vec<f64>) -> PyResult<Self> {
        let dim = Dimension::new(n).map_err(to_py)?;
        let phi = RadialProfile::new(grid.0.clone(), phi).map_err(to_py)?;
        ConformalSolution::from_phi(dim, phi).map(PySolution).map_err(to_py)
    }

    /// Read an `r,phi,dphi,tau,A,w,lw` bundle.
    #[staticmethod]
    #[pyo3(signature = (path, n = 3))]
    fn read_csv(path: PathBuf, n: usize) -> PyResult<Self> {
        let dim = Dimension::new(n).map_err(to_py)?;
        let file = File::open(&path)?;
        read_bundle_csv(dim, BufReader::new(file)).map(PySolution).map_err(to_py)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        let mut w = BufWriter::new(File::create(&path)?);
        write_bundle_csv(&self.0, &mut w).map_err(to_py)?;
        w.flush()?;
        Ok(())
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.dim.n()
    }

    #[getter]
    fn r(&self) -> Vec<f64> {
        self.0.phi.nodes().to_vec()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.phi.values().to_vec()
    }

    #[getter]
    fn tau(&self) -> Vec<f64> {
        self.0.tau.values().to_vec()
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.0.a.values().to_vec()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.0.w.values().to_vec()
    }

    #[getter]
    fn lw(&self) -> Vec<f64> {
        self.0.lw.values().to_vec()
    }

    /// `φ′(2nφ + N r φ′)` at every node.
    fn monotonicity(&self) -> Vec<f64> {
        monotonicity_condition(self.0.dim, &self.0.phi).into_values()
    }

    /// Consistency checks as a dict.
    fn check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_value(py, &check_solution(&self.0))
    }

    /// ADM mass in all normalizations; infinite masses come back as `None`.
    fn mass<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let data = assemble_initial_data(&self.0).map_err(to_py)?;
        json_value(py, &adm_mass(&data).map_err(to_py)?)
    }

    /// Fitted decay rates of `τ`, `g − δ` and `|k|`.
    fn decay<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let data = assemble_initial_data(&self.0).map_err(to_py)?;
        let windows = DecayWindows::for_r_max(self.0.grid().r_max());
        json_value(py, &decay_exponents(&data, &windows).map_err(to_py)?)
    }

    /// Hamiltonian and momentum residuals at deterministic sample points.
    #[pyo3(signature = (points = 64, h = H_SCALE))]
    fn residuals<'py>(&self, py: Python<'py>, points: usize, h: f64) -> PyResult<Bound<'py, PyAny>> {
        let data = assemble_initial_data(&self.0).map_err(to_py)?;
        let r_hi = 50f64.min(0.5 * self.0.grid().r_max());
        let pts = sample_points(self.0.dim.n(), points, 0.1f64.min(0.1 * r_hi), r_hi);
        json_value(py, &residual_report(&data, &pts, h).map_err(to_py)?)
    }

    /// Measured `lim φ′ r^(2q−1)` against the predicted constant.
    fn tail_limit<'py>(&self, py: Python<'py>, c: f64, q: f64) -> PyResult<Bound<'py, PyAny>> {
        json_value(py, &tail_limit_check(self.0.dim, &self.0.phi, c, q).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Solution(n={}, points={})", self.0.dim.n(), self.0.phi.nodes().len())
    }
}

/// Smoothed negative-mass Schwarzschild data.
#[pyfunction]
#[pyo3(signature = (m, n = 3, grid = None))]
fn smooth_schwarzschild(m: f64, n: usize, grid: Option<PyGrid>) -> PyResult<PySolution> {
    let dim = Dimension::new(n).map_err(to_py)?;
    let grid = match grid {
        Some(g) => g.0,
        None => default_grid()?,
    };
    let phi = smooth_schwarzschild_phi(dim, m, &grid).map_err(to_py)?;
    ConformalSolution::from_phi(dim, phi).map(PySolution).map_err(to_py)
}

fn default_grid() -> PyResult<RadialGrid> {
    let g = GridSpec::default();
    build_grid(g.points, g.r_max, g.stretch).map_err(to_py)
}

/// Fixed-point solve for `τ = c(1+r²)^(−q/2)`; returns `(solution, trace)`.
#[pyfunction]
#[pyo3(signature = (c, q, n = 3, grid = None, tol = None, max_iter = None, damping = None, continuation = None))]
#[allow(clippy::too_many_arguments)]
fn free_tau<'py>(
    py: Python<'py>,
    c: f64,
    q: f64,
    n: usize,
    grid: Option<PyGrid>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    damping: Option<f64>,
    continuation: Option<usize>,
) -> PyResult<(PySolution, Bound<'py, PyAny>)> {
    let dim = Dimension::new(n).map_err(to_py)?;
    let grid = match grid {
        Some(g) => g.0,
        None => default_grid()?,
    };
    let mut controls = SolveControls::default();
    controls.tol = tol.unwrap_or(controls.tol);
    controls.max_outer = max_iter.unwrap_or(controls.max_outer);
    controls.damping = damping.unwrap_or(controls.damping);
    controls.continuation_steps = continuation.unwrap_or(controls.continuation_steps);
    let tau = RadialProfile::from_fn(&grid, |r| c * (1.0 + r * r).powf(-q / 2.0)).map_err(to_py)?;
    let (sol, trace) = py
        .detach(|| fixed_point_solve(dim, &tau, &controls))
        .map_err(to_py)?;
    Ok((PySolution(sol), json_value(py, &trace)?))
}

/// Run a CLI scenario in process; returns `(exit_code, report_json)`.
#[pyfunction]
#[pyo3(signature = (command, n = 3, m = None, c = None, q = None, profiles = None, points = 64))]
#[allow(clippy::too_many_arguments)]
fn scenario(
    py: Python<'_>,
    command: &str,
    n: usize,
    m: Option<f64>,
    c: Option<f64>,
    q: Option<f64>,
    profiles: Option<PathBuf>,
    points: usize,
) -> PyResult<(i32, String)> {
    let command: Command = command.parse().map_err(to_py)?;
    let mut cfg = ScenarioConfig::new(command);
    cfg.n = n;
    cfg.m = m;
    cfg.c = c;
    cfg.q = q;
    cfg.profiles = profiles;
    cfg.points = points;
    let outcome = py.detach(|| run_scenario(&cfg));
    outcome.write_artifacts(&cfg).map_err(to_py)?;
    Ok((outcome.exit_code(), outcome.report.to_json()))
}

#[pymodule]
fn radial_conformal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(smooth_schwarzschild, m)?)?;
    m.add_function(wrap_pyfunction!(free_tau, m)?)?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    m.add("ConformalError", m.py().get_type::<ConformalError>())?;
    Ok(())
}
