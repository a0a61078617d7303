use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::fastdcov as core;
use core::datagen::{Model, RngStream, ScreeningDesign};
use core::screening::ScreeningMethod;
use core::{DcovError, DependenceEstimate, Direct, Estimator, Method};

fn to_py(e: DcovError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_method(method: &str) -> PyResult<Method> {
    match method {
        "fast" => Ok(Method::Fast),
        "direct" => Ok(Method::Direct),
        other => Err(PyValueError::new_err(format!(
            "method must be 'fast' or 'direct', got {other:?}"
        ))),
    }
}

/// Validated paired sample of equal-length finite sequences.
#[pyclass(name = "PairedSample", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPairedSample {
    inner: core::PairedSample,
}

#[pymethods]
impl PyPairedSample {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::PairedSample::new(x, y).map_err(to_py)?,
        })
    }

    /// Pair a sequence with itself.
    #[staticmethod]
    fn diagonal(v: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::PairedSample::diagonal(v).map_err(to_py)?,
        })
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PairedSample(n={})", self.inner.len())
    }
}

/// Result of one estimator evaluation.
#[pyclass(name = "Estimate", frozen, get_all)]
pub struct PyEstimate {
    value: f64,
    estimator: String,
    method: String,
    n: usize,
}

impl From<DependenceEstimate> for PyEstimate {
    fn from(e: DependenceEstimate) -> Self {
        Self {
            value: e.value,
            estimator: e.estimator.to_string(),
            method: e.method.to_string(),
            n: e.n,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __float__(&self) -> f64 {
        self.value
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate({}={}, method={}, n={})",
            self.estimator, self.value, self.method, self.n
        )
    }
}

fn evaluate(
    sample: &PyPairedSample,
    estimator: Estimator,
    method: &str,
    force_direct_large: bool,
) -> PyResult<PyEstimate> {
    let direct = if force_direct_large {
        Direct::unbounded()
    } else {
        Direct::default()
    };
    core::cli::evaluate(&sample.inner, estimator, parse_method(method)?, &direct)
        .map(PyEstimate::from)
        .map_err(to_py)
}

/// Unbiased squared distance covariance.
#[pyfunction]
#[pyo3(signature = (sample, method = "fast", force_direct_large = false))]
fn unbiased_dcov2(
    sample: &PyPairedSample,
    method: &str,
    force_direct_large: bool,
) -> PyResult<PyEstimate> {
    evaluate(sample, Estimator::UnbiasedDcov2, method, force_direct_large)
}

/// Bias-corrected squared distance correlation.
#[pyfunction]
#[pyo3(signature = (sample, method = "fast", force_direct_large = false))]
fn bias_corrected_dcor2(
    sample: &PyPairedSample,
    method: &str,
    force_direct_large: bool,
) -> PyResult<PyEstimate> {
    evaluate(
        sample,
        Estimator::BiasCorrectedDcor2,
        method,
        force_direct_large,
    )
}

/// V-statistic squared distance covariance.
#[pyfunction]
#[pyo3(signature = (sample, method = "fast", force_direct_large = false))]
fn vstat_dcov2(
    sample: &PyPairedSample,
    method: &str,
    force_direct_large: bool,
) -> PyResult<PyEstimate> {
    evaluate(sample, Estimator::VstatDcov2, method, force_direct_large)
}

/// V-statistic squared distance correlation.
#[pyfunction]
#[pyo3(signature = (sample, method = "fast", force_direct_large = false))]
fn vstat_dcor2(
    sample: &PyPairedSample,
    method: &str,
    force_direct_large: bool,
) -> PyResult<PyEstimate> {
    evaluate(sample, Estimator::VstatDcor2, method, force_direct_large)
}

#[pyfunction]
#[pyo3(signature = (sample, method = "fast"))]
fn sirs(sample: &PyPairedSample, method: &str) -> PyResult<PyEstimate> {
    evaluate(sample, Estimator::Sirs, method, false)
}

/// Ω with pair `k` (0-based) removed, by the direct method.
#[pyfunction]
fn unbiased_dcov2_leave_one_out(sample: &PyPairedSample, k: usize) -> PyResult<f64> {
    core::oracle::omega_leave_one_out_direct(&sample.inner, k)
        .map(|e| e.value)
        .map_err(to_py)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> f64 {
    core::screening::pearson(&x, &y)
}

/// Draw `n` points from showcase pattern `case` on RNG stream `case`.
#[pyfunction]
fn gen_showcase(case: u8, n: usize, seed: u64) -> PyResult<PyPairedSample> {
    let mut rng = RngStream::new(seed, case as u64);
    let inner = core::datagen::gen_showcase(case, n, &mut rng).map_err(to_py)?;
    Ok(PyPairedSample { inner })
}

/// `(case, label, pearson, dcor)` rows.
#[pyfunction]
#[pyo3(signature = (n = 10_000, seed = core::cli::DEFAULT_SEED, cases = None))]
fn showcase(n: usize, seed: u64, cases: Option<Vec<u8>>) -> PyResult<Vec<(u8, String, f64, f64)>> {
    let cases = cases.unwrap_or_else(|| core::datagen::SHOWCASE_CASES.collect());
    let rows = core::cli::showcase_rows(&cases, n, seed).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.case, r.label, r.pearson, r.dcor))
        .collect())
}

/// Marginal utilities of every column against `y`.
#[pyfunction]
fn marginal_utilities(columns: Vec<Vec<f64>>, y: Vec<f64>, method: &str) -> PyResult<Vec<f64>> {
    let method: ScreeningMethod = method.parse().map_err(to_py)?;
    let x = core::datagen::ColumnMatrix::from_columns(columns).map_err(to_py)?;
    core::screening::marginal_utilities(&x, &y, method).map_err(to_py)
}

/// Run the screening study and return the reports as JSON text.
#[pyfunction]
#[pyo3(signature = (model = "1b", p = 500, n = 200, rho = 0.5, reps = 100, seed = core::cli::DEFAULT_SEED, methods = None))]
#[allow(clippy::too_many_arguments)]
fn screen(
    py: Python<'_>,
    model: &str,
    p: usize,
    n: usize,
    rho: f64,
    reps: usize,
    seed: u64,
    methods: Option<Vec<String>>,
) -> PyResult<String> {
    let model: Model = model.parse().map_err(to_py)?;
    let methods = match methods {
        Some(list) => list
            .iter()
            .map(|m| m.parse::<ScreeningMethod>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?,
        None => ScreeningMethod::ALL.to_vec(),
    };
    let design = ScreeningDesign::new(p, n, rho, model).map_err(to_py)?;
    let reports = py
        .detach(|| core::screening::run_screening_experiment(&design, &methods, reps, seed))
        .map_err(to_py)?;
    serde_json::to_string(&reports).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// `(n, method, reps, mean_seconds, stderr_seconds)`
type BenchRow = (usize, String, usize, f64, f64);

/// Timing rows, one per size and method.
#[pyfunction]
#[pyo3(signature = (sizes, methods = vec!["fast".to_string(), "direct".to_string()], reps = 10, seed = core::cli::DEFAULT_SEED))]
fn bench_run(
    py: Python<'_>,
    sizes: Vec<usize>,
    methods: Vec<String>,
    reps: usize,
    seed: u64,
) -> PyResult<Vec<BenchRow>> {
    let methods = methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<PyResult<Vec<_>>>()?;
    let report = py
        .detach(|| core::bench::bench_run(&sizes, &methods, reps, seed))
        .map_err(to_py)?;
    Ok(report
        .records
        .into_iter()
        .map(|r| {
            (
                r.n,
                r.method.to_string(),
                r.reps,
                r.mean_seconds,
                r.stderr_seconds,
            )
        })
        .collect())
}

/// Least-squares slope of log(time) against log(n).
#[pyfunction]
fn fit_scaling_slope(sizes: Vec<usize>, seconds: Vec<f64>) -> PyResult<f64> {
    if sizes.len() != seconds.len() {
        return Err(to_py(DcovError::LengthMismatch {
            x: sizes.len(),
            y: seconds.len(),
        }));
    }
    let records: Vec<_> = sizes
        .into_iter()
        .zip(seconds)
        .map(|(n, t)| core::bench::BenchRecord {
            n,
            method: Method::Fast,
            reps: 1,
            mean_seconds: t,
            stderr_seconds: 0.0,
        })
        .collect();
    core::bench::fit_scaling_slope(&records).map_err(to_py)
}

#[pymodule]
fn fastdcov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPairedSample>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(unbiased_dcov2, m)?)?;
    m.add_function(wrap_pyfunction!(bias_corrected_dcor2, m)?)?;
    m.add_function(wrap_pyfunction!(vstat_dcov2, m)?)?;
    m.add_function(wrap_pyfunction!(vstat_dcor2, m)?)?;
    m.add_function(wrap_pyfunction!(sirs, m)?)?;
    m.add_function(wrap_pyfunction!(unbiased_dcov2_leave_one_out, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(gen_showcase, m)?)?;
    m.add_function(wrap_pyfunction!(showcase, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_utilities, m)?)?;
    m.add_function(wrap_pyfunction!(screen, m)?)?;
    m.add_function(wrap_pyfunction!(bench_run, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling_slope, m)?)?;
    Ok(())
}
