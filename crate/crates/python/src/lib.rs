//! Python bindings. Build with `maturin develop --features extension-module`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use exciton_trap::classical::{self, build_rate_model};
use exciton_trap::liouville::{build_liouvillian, diagonalize};
use exciton_trap::observables::{default_time_grid, DEFAULT_POINTS};
use exciton_trap::scan::{run_sweep, SweepJob};
use exciton_trap::{self as core, build_hamiltonian, Engine, Error, NetworkKind};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidSpec(_) | Error::WrongKind { .. } | Error::Config(_) | Error::ClassicalLimitUndefined(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn engine(name: &str) -> PyResult<Engine> {
    name.parse().map_err(py_err)
}

#[pyclass(name = "NetworkSpec", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyNetworkSpec {
    inner: core::NetworkSpec,
}

#[pymethods]
impl PyNetworkSpec {
    #[new]
    #[pyo3(signature = (kind, n, l, j = 1.0, delta = 0.0, gamma_trap = 0.1, eps0 = 0.0))]
    fn new(kind: &str, n: usize, l: usize, j: f64, delta: f64, gamma_trap: f64, eps0: f64) -> PyResult<Self> {
        let kind: NetworkKind = kind.parse().map_err(py_err)?;
        let inner = core::NetworkSpec::new(kind, n, l)
            .with_hopping(j)
            .with_defect(delta)
            .with_trap_rate(gamma_trap)
            .with_site_energy(eps0);
        inner.validate().map_err(py_err)?;
        Ok(PyNetworkSpec { inner })
    }

    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        core::NetworkSpec::from_config(text).map(|inner| PyNetworkSpec { inner }).map_err(py_err)
    }

    #[pyo3(name = "to_config")]
    fn config_text(&self) -> String {
        self.inner.to_config()
    }

    /// Copy with a different defect energy.
    fn with_defect(&self, delta: f64) -> Self {
        PyNetworkSpec { inner: self.inner.with_defect(delta) }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter(N)]
    fn branches(&self) -> usize {
        self.inner.branches
    }

    #[getter(L)]
    fn length(&self) -> usize {
        self.inner.length
    }

    #[getter(J)]
    fn hopping(&self) -> f64 {
        self.inner.hopping
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.defect
    }

    #[getter]
    fn gamma_trap(&self) -> f64 {
        self.inner.trap_rate
    }

    #[getter]
    fn total_sites(&self) -> usize {
        self.inner.total_sites()
    }

    #[getter]
    fn optimal_defect(&self) -> f64 {
        self.inner.optimal_defect()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "NetworkSpec(kind='{}', N={}, L={}, J={}, delta={}, gamma_trap={}, eps0={})",
            s.kind, s.branches, s.length, s.hopping, s.defect, s.trap_rate, s.site_energy
        )
    }
}

/// `(times, p_absorbed)` on `times`, or on the default grid of `points`.
#[pyfunction]
#[pyo3(signature = (spec, gamma, engine = "auto", times = None, points = DEFAULT_POINTS))]
fn simulate(
    py: Python<'_>,
    spec: PyNetworkSpec,
    gamma: f64,
    engine: &str,
    times: Option<Vec<f64>>,
    points: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let e = self::engine(engine)?;
    let times = times.unwrap_or_else(|| default_time_grid(&spec.inner, points));
    let series = py.detach(|| core::simulate(&spec.inner, gamma, e, &times)).map_err(py_err)?;
    Ok((series.times, series.p_absorbed))
}

#[pyfunction]
#[pyo3(signature = (spec, gamma, engine = "auto"))]
fn absorption_time(py: Python<'_>, spec: PyNetworkSpec, gamma: f64, engine: &str) -> PyResult<f64> {
    let e = self::engine(engine)?;
    py.detach(|| core::absorption_time_for(&spec.inner, gamma, e)).map(|r| r.tau).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, gamma, engine = "auto"))]
fn speedup(py: Python<'_>, spec: PyNetworkSpec, gamma: f64, engine: &str) -> PyResult<f64> {
    let e = self::engine(engine)?;
    py.detach(|| core::speedup(&spec.inner, gamma, e)).map_err(py_err)
}

#[pyfunction]
fn critical_length(n: usize) -> PyResult<f64> {
    core::critical_length(n).map_err(py_err)
}

/// `(k_A, k_B, k_C)`.
#[pyfunction]
#[pyo3(signature = (j, gamma, delta, gamma_trap))]
fn classical_rates(j: f64, gamma: f64, delta: f64, gamma_trap: f64) -> PyResult<(f64, f64, f64)> {
    let r = classical::classical_rates(j, gamma, delta, gamma_trap).map_err(py_err)?;
    Ok((r.k_a, r.k_b, r.k_c))
}

/// Mean first-passage times of the classical limit by every route.
#[pyfunction]
fn mfpt<'py>(py: Python<'py>, spec: PyNetworkSpec, gamma: f64) -> PyResult<Bound<'py, PyDict>> {
    let model = build_rate_model(&spec.inner, gamma).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("closed_form", classical::mfpt_closed_form(&spec.inner, gamma).ok())?;
    out.set_item("inverse", classical::mfpt_via_inverse(&model).map_err(py_err)?)?;
    out.set_item("recurrence", classical::mfpt_via_recurrence(&model).map_err(py_err)?)?;
    let wtd = classical::mfpt_via_wtd(&model).map_err(py_err)?;
    out.set_item("wtd", wtd.exact)?;
    out.set_item("wtd_finite_difference", wtd.finite_difference)?;
    Ok(out)
}

/// Eigenvalues of the full Liouvillian.
#[pyfunction]
fn liouvillian_spectrum(spec: PyNetworkSpec, gamma: f64) -> PyResult<Vec<num_complex::Complex64>> {
    let l = build_hamiltonian(&spec.inner).and_then(|h| build_liouvillian(&h, gamma)).map_err(py_err)?;
    Ok(diagonalize(&l).map_err(py_err)?.eigenvalues().to_vec())
}

/// Rows of a `gammas x deltas` sweep as dictionaries keyed like the CSV.
#[pyfunction]
#[pyo3(signature = (spec, deltas, gammas, engine = "auto", with_speedup = false))]
fn sweep<'py>(
    py: Python<'py>,
    spec: PyNetworkSpec,
    deltas: Vec<f64>,
    gammas: Vec<f64>,
    engine: &str,
    with_speedup: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let job = SweepJob { base: spec.inner, deltas, gammas, engine: self::engine(engine)?, with_speedup };
    let rows = py.detach(|| run_sweep(&job)).map_err(py_err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("kind", r.kind.as_str())?;
            d.set_item("N", r.branches)?;
            d.set_item("L", r.length)?;
            d.set_item("J", r.hopping)?;
            d.set_item("delta", r.delta)?;
            d.set_item("gamma", r.gamma)?;
            d.set_item("gamma_trap", r.gamma_trap)?;
            d.set_item("tau", r.tau)?;
            d.set_item("speedup", r.speedup)?;
            d.set_item("engine", r.engine.as_str())?;
            d.set_item("converged", r.converged)?;
            Ok(d)
        })
        .collect()
}

/// `[(suite, passed, checks, violations)]`.
#[pyfunction]
#[pyo3(signature = (seed = 1))]
fn validate(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, usize, usize)>> {
    let reports = py.detach(|| exciton_trap::validate::run_all(seed)).map_err(py_err)?;
    Ok(reports.iter().map(|r| (r.name.to_string(), r.passed(), r.checks, r.violations.len())).collect())
}

#[pymodule]
pub fn exciton_trap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkSpec>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(absorption_time, m)?)?;
    m.add_function(wrap_pyfunction!(speedup, m)?)?;
    m.add_function(wrap_pyfunction!(critical_length, m)?)?;
    m.add_function(wrap_pyfunction!(classical_rates, m)?)?;
    m.add_function(wrap_pyfunction!(mfpt, m)?)?;
    m.add_function(wrap_pyfunction!(liouvillian_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
