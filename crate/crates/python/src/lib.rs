//! Python access to detection, selective inference, truncated distributions
//! and the simulation harness.
//!
//! Reports come back as plain dicts mirroring the CLI JSON.

use std::fs::File;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use selout::detection::{default_dffits_threshold, detect as detect_rows, DetectionConfig, DetectionMethod};
use selout::inference::{analyze as analyze_data, AnalysisOptions, SigmaMode};
use selout::simulation::{run_coverage, run_power, PowerTarget, SimConfig};
use selout::{datasets, truncated, IntervalSet};

fn to_py_err(e: selout::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let out = PyList::empty(py);
            for item in items {
                out.append(value_to_py(py, item)?)?;
            }
            out.into_any()
        }
        Value::Object(map) => {
            let out = PyDict::new(py);
            for (k, item) in map {
                out.set_item(k, value_to_py(py, item)?)?;
            }
            out.into_any()
        }
    })
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, report: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn parse_method(s: &str) -> PyResult<DetectionMethod> {
    s.parse().map_err(to_py_err)
}

fn support_from(pairs: Vec<(f64, f64)>) -> IntervalSet {
    IntervalSet::from_pairs(&pairs)
}

/// A response vector with its design matrix.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: selout::Dataset,
}

#[pymethods]
impl PyDataset {
    /// `x` is row-major. With `intercept` its first column must be all ones.
    #[new]
    #[pyo3(signature = (y, x, names, intercept = true))]
    fn new(y: Vec<f64>, x: Vec<Vec<f64>>, names: Vec<String>, intercept: bool) -> PyResult<Self> {
        let n = y.len();
        let p = names.len();
        if x.len() != n || x.iter().any(|row| row.len() != p) {
            return Err(PyValueError::new_err(format!("x must be {n} rows of {p} values")));
        }
        let xm = DMatrix::from_fn(n, p, |i, j| x[i][j]);
        let inner = selout::Dataset::new(DVector::from_vec(y), xm, names, intercept).map_err(to_py_err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, response, intercept = true))]
    fn from_csv(path: &str, response: &str, intercept: bool) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        let table = datasets::read_table(file).map_err(to_py_err)?;
        let inner = selout::model::validate_dataset(&table, response, intercept).map_err(to_py_err)?;
        Ok(PyDataset { inner })
    }

    #[staticmethod]
    fn stackloss() -> Self {
        PyDataset { inner: datasets::stackloss() }
    }

    #[staticmethod]
    fn hills() -> Self {
        PyDataset { inner: datasets::hills() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.column_names().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, p={})", self.inner.n(), self.inner.p())
    }
}

fn config_for(data: &selout::Dataset, method: &str, cutoff: Option<f64>) -> PyResult<DetectionConfig> {
    let method = parse_method(method)?;
    let cutoff = match (cutoff, method) {
        (Some(c), _) => c,
        (None, DetectionMethod::Cooks) => 4.0,
        (None, DetectionMethod::Dffits) => default_dffits_threshold(data.n(), data.p()),
        (None, DetectionMethod::Softipod) => return Err(PyValueError::new_err("soft-IPOD needs an explicit cutoff")),
    };
    DetectionConfig::new(method, cutoff).map_err(to_py_err)
}

/// Flag outliers. Returns `{method, cutoff, outliers, scores}` with 1-based
/// outlier indices.
#[pyfunction]
#[pyo3(signature = (data, method = "cooks", cutoff = None))]
fn detect<'py>(py: Python<'py>, data: &PyDataset, method: &str, cutoff: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_for(&data.inner, method, cutoff)?;
    let res = detect_rows(&data.inner, &cfg).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("method", res.method.as_str())?;
    out.set_item("cutoff", res.cutoff)?;
    out.set_item("outliers", res.outliers_one_based())?;
    out.set_item("scores", res.scores.as_slice().to_vec())?;
    Ok(out)
}

/// Detect, refit and report naive and selective inference for every
/// coefficient.
#[pyfunction]
#[pyo3(signature = (data, method = "cooks", cutoff = None, sigma = "exact", alpha = 0.05))]
fn analyze<'py>(
    py: Python<'py>,
    data: &PyDataset,
    method: &str,
    cutoff: Option<f64>,
    sigma: &str,
    alpha: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = AnalysisOptions {
        detection: config_for(&data.inner, method, cutoff)?,
        sigma: sigma.parse::<SigmaMode>().map_err(to_py_err)?,
        alpha,
    };
    let report = py.allow_threads(|| analyze_data(&data.inner, &opts)).map_err(to_py_err)?;
    json_to_py(py, &report)
}

/// CDF of N(mean, 1) truncated to a union of `(lo, hi)` intervals.
#[pyfunction]
fn tn_cdf(support: Vec<(f64, f64)>, mean: f64, x: f64) -> PyResult<f64> {
    truncated::tn_cdf(&support_from(support), mean, x).map_err(to_py_err)
}

#[pyfunction]
fn tchi2_cdf(support: Vec<(f64, f64)>, df: f64, x: f64) -> PyResult<f64> {
    truncated::tchi2_cdf(&support_from(support), df, x).map_err(to_py_err)
}

#[pyfunction]
fn tf_cdf(support: Vec<(f64, f64)>, d1: f64, d2: f64, x: f64) -> PyResult<f64> {
    truncated::tf_cdf(&support_from(support), d1, d2, x).map_err(to_py_err)
}

#[allow(clippy::too_many_arguments)]
fn sim_config(n: usize, p: usize, s: f64, method: &str, cutoff: f64, noise: f64, alpha: f64, reps: usize, seed: u64) -> PyResult<SimConfig> {
    Ok(SimConfig { n, p, s, method: parse_method(method)?, cutoff, sigma: noise, alpha, reps, seed })
}

/// Coverage of naive and selective intervals under the mean-shift model.
#[pyfunction]
#[pyo3(signature = (n = 100, p = 11, s = 4.0, method = "cooks", cutoff = 4.0, noise = 1.0, alpha = 0.05, reps = 500, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate_coverage<'py>(
    py: Python<'py>,
    n: usize,
    p: usize,
    s: f64,
    method: &str,
    cutoff: f64,
    noise: f64,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = sim_config(n, p, s, method, cutoff, noise, alpha, reps, seed)?;
    let report = py.allow_threads(|| run_coverage(&cfg)).map_err(to_py_err)?;
    json_to_py(py, &report)
}

/// Rejection rates over a sweep of `beta1`. `target` is "coef" or "group".
#[pyfunction]
#[pyo3(signature = (beta1, target = "coef", n = 100, p = 11, s = 4.0, method = "cooks", cutoff = 4.0, noise = 1.0, alpha = 0.05, reps = 500, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate_power<'py>(
    py: Python<'py>,
    beta1: Vec<f64>,
    target: &str,
    n: usize,
    p: usize,
    s: f64,
    method: &str,
    cutoff: f64,
    noise: f64,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let target = match target {
        "coef" => PowerTarget::Coefficient,
        "group" => PowerTarget::Group,
        other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    };
    let cfg = sim_config(n, p, s, method, cutoff, noise, alpha, reps, seed)?;
    let report = py.allow_threads(|| run_power(&cfg, target, &beta1)).map_err(to_py_err)?;
    json_to_py(py, &report)
}

#[pymodule]
pub fn selout_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(tn_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(tchi2_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(tf_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coverage, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_power, m)?)?;
    Ok(())
}
