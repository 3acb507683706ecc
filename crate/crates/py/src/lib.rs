//! Python bindings. Fields cross the boundary as `Field` objects; raw data as lists of
//! floats (samples) or `(k, complex)` pairs (coefficients).

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use rbenjamin::analysis::{self, DiagnosticsRecord};
use rbenjamin::evolution::{Method, SolverConfig};
use rbenjamin::spectral::{self, PeriodicGrid, RealField, SpectralField};
use rbenjamin::symbols::{self, Operator, SymbolTable};

fn to_py(err: rbenjamin::Error) -> PyErr {
    match err.exit_code() {
        1 => PyOSError::new_err(err.to_string()),
        3 => PyArithmeticError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn operator_from(name: &str, h: Option<f64>) -> Result<Operator, String> {
    match (name, h) {
        ("hilbert", None) => Ok(Operator::Hilbert),
        ("hilbert", Some(_)) => Err("h is only meaningful with operator = 'strip'".into()),
        ("strip", Some(depth)) => Ok(Operator::Strip { depth }),
        ("strip", None) => Err("operator = 'strip' requires h".into()),
        (other, _) => Err(format!("operator must be 'hilbert' or 'strip', got '{other}'")),
    }
}

fn method_from(name: &str) -> Result<Method, String> {
    match name {
        "rk4" => Ok(Method::Rk4),
        "picard" => Ok(Method::PicardDuhamel),
        other => Err(format!("method must be 'rk4' or 'picard', got '{other}'")),
    }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModelParams(symbols::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (alpha, a, b, operator = "hilbert", h = None, allow_zero_b = false))]
    fn new(alpha: f64, a: f64, b: f64, operator: &str, h: Option<f64>, allow_zero_b: bool) -> PyResult<Self> {
        let op = operator_from(operator, h).map_err(PyValueError::new_err)?;
        let p = if allow_zero_b {
            symbols::ModelParams::with_zero_b_override(alpha, a, b, op)
        } else {
            symbols::ModelParams::new(alpha, a, b, op)
        };
        p.map(Self).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }

    #[getter]
    fn h(&self) -> Option<f64> {
        self.0.depth()
    }

    fn m(&self, k: f64) -> f64 {
        symbols::m_symbol(k, &self.0)
    }

    fn phi(&self, k: f64) -> f64 {
        symbols::phi_symbol(k, &self.0)
    }

    fn phi_bound(&self) -> f64 {
        symbols::phi_bound(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyGrid(PeriodicGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n_points: usize) -> PyResult<Self> {
        PeriodicGrid::new(n_points).map(Self).map_err(to_py)
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn mode_cutoff(&self) -> i64 {
        self.0.mode_cutoff()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    fn __repr__(&self) -> String {
        format!("Grid({})", self.0.n_points())
    }
}

/// Real field stored as its retained Fourier coefficients.
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyField(SpectralField);

#[pymethods]
impl PyField {
    #[staticmethod]
    fn zeros(grid: &PyGrid) -> Self {
        Self(SpectralField::zeros(grid.0))
    }

    /// Field from collocation samples at `grid.points()`.
    #[staticmethod]
    fn from_values(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        let real = RealField::new(grid.0, values).map_err(to_py)?;
        Ok(Self(spectral::forward_transform(&real)))
    }

    /// Field from `(k, coefficient)` pairs; give both `k` and `-k` for a real field.
    #[staticmethod]
    fn from_modes(grid: &PyGrid, modes: Vec<(i64, Complex64)>) -> PyResult<Self> {
        SpectralField::from_modes(grid.0, &modes).map(Self).map_err(to_py)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn get(&self, k: i64) -> Complex64 {
        self.0.get(k)
    }

    fn modes(&self) -> Vec<(i64, Complex64)> {
        self.0.modes().collect()
    }

    fn values(&self) -> PyResult<Vec<f64>> {
        spectral::inverse_transform(&self.0)
            .map(|r| r.values().to_vec())
            .map_err(to_py)
    }

    fn sobolev_norm(&self, s: f64) -> f64 {
        spectral::sobolev_norm(&self.0, s)
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        self.0.add(&other.0).map(Self).map_err(to_py)
    }

    fn __sub__(&self, other: &PyField) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(to_py)
    }

    fn __mul__(&self, c: f64) -> Self {
        Self(self.0.scaled(c))
    }

    fn __repr__(&self) -> String {
        format!("Field(n_points={}, mean={})", self.0.grid().n_points(), self.0.mean())
    }
}

#[pyclass(name = "Diagnostics", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDiagnostics {
    t: f64,
    mass: f64,
    norm0: f64,
    norm_half: f64,
    norm1: f64,
    norm_s: f64,
    triple_norm1: f64,
    sup_norm: f64,
}

impl From<DiagnosticsRecord> for PyDiagnostics {
    fn from(d: DiagnosticsRecord) -> Self {
        Self {
            t: d.t,
            mass: d.mass,
            norm0: d.norm0,
            norm_half: d.norm_half,
            norm1: d.norm1,
            norm_s: d.norm_s,
            triple_norm1: d.triple_norm1,
            sup_norm: d.sup_norm,
        }
    }
}

#[pymethods]
impl PyDiagnostics {
    fn __repr__(&self) -> String {
        format!(
            "Diagnostics(t={}, mass={}, norm1={}, triple_norm1={})",
            self.t, self.mass, self.norm1, self.triple_norm1
        )
    }
}

fn table(field: &PyField, params: &PyModelParams) -> SymbolTable {
    SymbolTable::new(*field.0.grid(), params.0)
}

#[pyfunction]
fn hilbert_transform(f: &PyField) -> PyField {
    PyField(symbols::hilbert_transform(&f.0))
}

#[pyfunction]
fn strip_hilbert_transform(f: &PyField, params: &PyModelParams) -> PyResult<PyField> {
    symbols::strip_hilbert_transform(&f.0, &params.0)
        .map(PyField)
        .map_err(to_py)
}

#[pyfunction]
fn apply_aj(f: &PyField, params: &PyModelParams) -> PyField {
    PyField(symbols::apply_aj(&f.0, &table(f, params)))
}

#[pyfunction]
#[pyo3(signature = (f, g, dealias = true))]
fn product(f: &PyField, g: &PyField, dealias: bool) -> PyResult<PyField> {
    spectral::product(&f.0, &g.0, dealias).map(PyField).map_err(to_py)
}

#[pyfunction]
fn linear_propagate(f: &PyField, t: f64, params: &PyModelParams) -> PyField {
    PyField(rbenjamin::propagator::linear_propagate(&f.0, t, &table(f, params)))
}

#[pyfunction]
#[pyo3(signature = (f, params, s = 1.0, t = 0.0))]
fn diagnostics(f: &PyField, params: &PyModelParams, s: f64, t: f64) -> PyDiagnostics {
    analysis::diagnostics(&f.0, &table(f, params), s, t).into()
}

#[pyfunction]
fn frequency_split(f: &PyField, cutoff: i64) -> PyResult<(PyField, PyField)> {
    analysis::frequency_split(&f.0, cutoff)
        .map(|(lo, hi)| (PyField(lo), PyField(hi)))
        .map_err(to_py)
}

#[pyfunction]
fn norm_equivalence_constants(params: &PyModelParams, grid: &PyGrid) -> (f64, f64) {
    analysis::norm_equivalence_constants(&params.0, grid.0)
}

/// Evolves `eta0`; returns `[(t, Field, Diagnostics)]` at the recorded steps.
#[pyfunction]
#[pyo3(signature = (eta0, params, dt, t_end, method = "rk4", diagnostics_every = 100, sobolev_s = 1.0, dealias = true))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    eta0: &PyField,
    params: &PyModelParams,
    dt: f64,
    t_end: f64,
    method: &str,
    diagnostics_every: usize,
    sobolev_s: f64,
    dealias: bool,
) -> PyResult<Vec<(f64, PyField, PyDiagnostics)>> {
    let mut cfg = SolverConfig::rk4(dt, t_end);
    cfg.method = method_from(method).map_err(PyValueError::new_err)?;
    cfg.diagnostics_every = diagnostics_every;
    cfg.sobolev_s = sobolev_s;
    cfg.dealias = dealias;
    let (f, p) = (eta0.0.clone(), params.0);
    let traj = py
        .detach(move || rbenjamin::evolution::solve(&f, &p, &cfg))
        .map_err(to_py)?;
    Ok(traj
        .snapshots
        .into_iter()
        .map(|s| (s.t, PyField(s.field), s.diagnostics.into()))
        .collect())
}

#[pymodule]
#[pyo3(name = "rbenjamin")]
fn rbenjamin_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyDiagnostics>()?;
    m.add_function(wrap_pyfunction!(hilbert_transform, m)?)?;
    m.add_function(wrap_pyfunction!(strip_hilbert_transform, m)?)?;
    m.add_function(wrap_pyfunction!(apply_aj, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    m.add_function(wrap_pyfunction!(linear_propagate, m)?)?;
    m.add_function(wrap_pyfunction!(diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_split, m)?)?;
    m.add_function(wrap_pyfunction!(norm_equivalence_constants, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
