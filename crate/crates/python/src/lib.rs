//! Python bindings. Reports come back as JSON text; sequences and
//! approximants as small wrapper objects.

use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use diophant::error::Error;
use diophant::exponents;
use diophant::forms::{NormKind, Problem};
use diophant::gallery;
use diophant::io;
use diophant::ledger::{self, LedgerParams};
use diophant::minimal_points::{self, EnumOptions};
use diophant::numeric::RealCtx;
use diophant::quadratic;
use diophant::rational::LedgerScalar;
use diophant::structure;

create_exception!(diophant_py, HypothesisViolated, PyException);
create_exception!(diophant_py, PrecisionFailure, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::HypothesisViolated(_) => HypothesisViolated::new_err(e.to_string()),
        e if e.is_precision_failure() => PrecisionFailure::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn ctx(precision: u32) -> PyResult<RealCtx> {
    RealCtx::new(precision).map_err(to_py)
}

fn scalar(s: &str) -> PyResult<LedgerScalar> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "MinimalPoint", frozen, get_all)]
struct PyMinimalPoint {
    nu: usize,
    x: (BigInt, BigInt, BigInt),
    norm: f64,
    l: f64,
    p: f64,
}

#[pymethods]
impl PyMinimalPoint {
    fn __repr__(&self) -> String {
        format!("MinimalPoint(nu={}, x=({}, {}, {}), L={:e})", self.nu, self.x.0, self.x.1, self.x.2, self.l)
    }
}

#[pyclass(name = "MinimalSequence", frozen)]
struct PySequence {
    inner: minimal_points::MinimalSequence,
}

#[pymethods]
impl PySequence {
    #[getter]
    fn theta(&self) -> String {
        self.inner.problem.key()
    }

    #[getter]
    fn norm(&self) -> String {
        self.inner.norm.to_string()
    }

    #[getter]
    fn t_reached(&self) -> u64 {
        self.inner.t_reached
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn records(&self) -> Vec<PyMinimalPoint> {
        self.inner
            .records
            .iter()
            .map(|r| {
                let [a, b, c] = r.x.0.clone();
                PyMinimalPoint {
                    nu: r.nu,
                    x: (a, b, c),
                    norm: r.norm.to_f64(),
                    l: r.l.to_f64(),
                    p: r.p.to_f64(),
                }
            })
            .collect()
    }

    /// `(j, gamma_j)` pairs.
    fn gamma_samples(&self) -> Vec<(usize, f64)> {
        minimal_points::gamma_ratios(&self.inner)
    }

    #[pyo3(signature = (burn_in = exponents::DEFAULT_BURN_IN))]
    fn analyze_json(&self, burn_in: usize) -> PyResult<String> {
        let r = structure::analyze(&self.inner, burn_in).map_err(to_py)?;
        io::to_json(&r).map_err(to_py)
    }

    #[pyo3(signature = (burn_in = exponents::DEFAULT_BURN_IN, slack = exponents::DEFAULT_SLACK))]
    fn verdict_json(&self, burn_in: usize, slack: f64) -> PyResult<String> {
        let v = exponents::verdict(&self.inner, burn_in, slack).map_err(to_py)?;
        io::to_json(&v).map_err(to_py)
    }

    /// `(omega_hat, omega_lp)` estimates.
    #[pyo3(signature = (burn_in = exponents::DEFAULT_BURN_IN))]
    fn exponents(&self, burn_in: usize) -> PyResult<(f64, f64)> {
        let hat = exponents::estimate_uniform(&self.inner, burn_in).map_err(to_py)?;
        let lp = exponents::estimate_two_form(&self.inner, burn_in).map_err(to_py)?;
        Ok((hat.value, lp.value))
    }
}

/// Minimal points of `x0 + x1·θ + x2·θ²` with norm at most `tmax`.
#[pyfunction]
#[pyo3(signature = (theta, tmax, norm = "euclid", precision = 256, workers = 1))]
fn enumerate(py: Python<'_>, theta: &str, tmax: u64, norm: &str, precision: u32, workers: usize) -> PyResult<PySequence> {
    let spec = gallery::resolve(theta).map_err(to_py)?;
    let norm: NormKind = norm.parse().map_err(to_py)?;
    let c = ctx(precision)?;
    let opts = EnumOptions {
        workers: workers.max(1),
        ..EnumOptions::default()
    };
    let seq = py
        .detach(|| minimal_points::enumerate_minimal_points(&Problem::derivative(spec), norm, tmax, &c, opts))
        .map_err(to_py)?;
    Ok(PySequence { inner: seq })
}

#[pyclass(name = "QuadraticApproximant", frozen, get_all)]
struct PyApproximant {
    height: u64,
    coeffs: (i64, i64, i64),
    xi: f64,
    dist: f64,
    gamma: Option<f64>,
}

#[pymethods]
impl PyApproximant {
    fn __repr__(&self) -> String {
        format!("QuadraticApproximant(H={}, coeffs={:?}, dist={:e})", self.height, self.coeffs, self.dist)
    }
}

/// Record-breaking approximants of degree at most two up to height `hmax`.
#[pyfunction]
#[pyo3(signature = (theta, hmax, precision = 256, workers = 1))]
fn quadratic_approximants(py: Python<'_>, theta: &str, hmax: u64, precision: u32, workers: usize) -> PyResult<Vec<PyApproximant>> {
    let spec = gallery::resolve(theta).map_err(to_py)?;
    let c = ctx(precision)?;
    let recs = py
        .detach(|| quadratic::enumerate_approximants(&spec, hmax, &c, workers.max(1)))
        .map_err(to_py)?;
    Ok(recs
        .iter()
        .map(|r| PyApproximant {
            height: r.height,
            coeffs: (r.coeffs[0], r.coeffs[1], r.coeffs[2]),
            xi: r.xi.to_f64(),
            dist: r.dist.to_f64(),
            gamma: r.gamma,
        })
        .collect())
}

/// Running maximum of gamma over the approximants up to `hmax`.
#[pyfunction]
#[pyo3(signature = (theta, hmax, precision = 256, workers = 1))]
fn omega_star(py: Python<'_>, theta: &str, hmax: u64, precision: u32, workers: usize) -> PyResult<f64> {
    let spec = gallery::resolve(theta).map_err(to_py)?;
    let c = ctx(precision)?;
    let recs = py
        .detach(|| quadratic::enumerate_approximants(&spec, hmax, &c, workers.max(1)))
        .map_err(to_py)?;
    quadratic::estimate_omega_star(&recs).map(|e| e.value).map_err(to_py)
}

/// Exact β recursion trace; rationals are passed as strings like `"5/2"`.
#[pyfunction]
#[pyo3(signature = (alpha, r, beta0, iterations = 50))]
fn ledger_trace_json(alpha: &str, r: &str, beta0: &str, iterations: usize) -> PyResult<String> {
    let p = LedgerParams::new(scalar(alpha)?, scalar(r)?, scalar(beta0)?).map_err(to_py)?;
    let t = ledger::contradiction_trace(&p, iterations).map_err(to_py)?;
    io::to_json(&t).map_err(to_py)
}

/// `w² − w + 1` as an exact rational string.
#[pyfunction]
fn lp_floor(w: &str) -> PyResult<String> {
    Ok(exponents::lp_floor(&scalar(w)?).to_string())
}

#[pyfunction]
fn gallery_names() -> Vec<String> {
    gallery::builtin_gallery().into_iter().map(|e| e.name).collect()
}

#[pymodule]
fn diophant_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySequence>()?;
    m.add_class::<PyMinimalPoint>()?;
    m.add_class::<PyApproximant>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_approximants, m)?)?;
    m.add_function(wrap_pyfunction!(omega_star, m)?)?;
    m.add_function(wrap_pyfunction!(ledger_trace_json, m)?)?;
    m.add_function(wrap_pyfunction!(lp_floor, m)?)?;
    m.add_function(wrap_pyfunction!(gallery_names, m)?)?;
    m.add("HypothesisViolated", m.py().get_type::<HypothesisViolated>())?;
    m.add("PrecisionFailure", m.py().get_type::<PrecisionFailure>())?;
    Ok(())
}
