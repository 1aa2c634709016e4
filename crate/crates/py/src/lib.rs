//! Python bindings.
//!
//! Matrix sequences cross the boundary as complex128 arrays of shape
//! `(F, p, p)`, samples as float64 arrays of shape `(N, p)`, and edge
//! sets as lists of 0-based `(i, j)` tuples with `i < j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use numpy::{IntoPyArray, PyArray2, PyArray3, PyReadonlyArray2, PyReadonlyArray3};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tsglasso::experiment::{run_roc, ExperimentConfig, PipelineConfig};
use tsglasso::graph::EdgeSet;
use tsglasso::matseq::{CMatrix, MatrixSequence};
use tsglasso::solver::SolverConfig;
use tsglasso::spectrum::{SampleMatrix, Window};
use tsglasso::synth::{ProcessSpec, StarSpec};
use tsglasso::CoreError;

fn to_py_err(err: CoreError) -> PyErr {
    if err.is_numerical() {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn seq_from_array(arr: PyReadonlyArray3<'_, Complex64>) -> PyResult<MatrixSequence> {
    let view = arr.as_array();
    let shape = view.shape();
    if shape[1] != shape[2] {
        return Err(PyValueError::new_err(format!(
            "expected shape (F, p, p), got {shape:?}"
        )));
    }
    let (f_len, p) = (shape[0], shape[1]);
    let mats = (0..f_len)
        .map(|f| CMatrix::from_fn(p, p, |i, j| view[[f, i, j]]))
        .collect();
    MatrixSequence::new(mats).map_err(to_py_err)
}

type SeqArray<'py> = Bound<'py, PyArray3<Complex64>>;

fn seq_to_array<'py>(py: Python<'py>, seq: &MatrixSequence) -> Bound<'py, PyArray3<Complex64>> {
    let (f_len, p) = (seq.f_len(), seq.dim());
    let arr =
        numpy::ndarray::Array3::from_shape_fn((f_len, p, p), |(f, i, j)| seq.mat(f)[(i, j)]);
    arr.into_pyarray(py)
}

fn samples_from_array(arr: PyReadonlyArray2<'_, f64>) -> PyResult<SampleMatrix> {
    let view = arr.as_array();
    let (n, p) = (view.shape()[0], view.shape()[1]);
    let data = DMatrix::from_fn(n, p, |i, j| view[[i, j]]);
    SampleMatrix::new(data).map_err(to_py_err)
}

fn star_spec(p: usize, s: usize, diag: f64, offdiag: Option<f64>) -> StarSpec {
    let mut star = StarSpec::new(p, s);
    star.diag = diag;
    if let Some(offdiag) = offdiag {
        star.offdiag = offdiag;
    }
    star
}

fn edge_set(p: usize, edges: Vec<(usize, usize)>) -> PyResult<EdgeSet> {
    EdgeSet::new(p, edges).map_err(to_py_err)
}

/// Star-graph precision matrix.
#[pyfunction]
#[pyo3(signature = (p, s, diag=0.5, offdiag=None))]
fn star_precision<'py>(
    py: Python<'py>,
    p: usize,
    s: usize,
    diag: f64,
    offdiag: Option<f64>,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let k0 = tsglasso::synth::star_precision(&star_spec(p, s, diag, offdiag)).map_err(to_py_err)?;
    let arr = numpy::ndarray::Array2::from_shape_fn((p, p), |(i, j)| k0[(i, j)]);
    Ok(arr.into_pyarray(py))
}

/// Hub-neighbor edges of the star graph, 0-based.
#[pyfunction]
#[pyo3(signature = (p, s))]
fn true_edges(p: usize, s: usize) -> PyResult<Vec<(usize, usize)>> {
    let star = StarSpec::new(p, s);
    star.validate().map_err(to_py_err)?;
    Ok(tsglasso::synth::true_edges(&star).iter().collect())
}

/// Samples of the FIR-filtered star-graph process, shape `(n, p)`.
#[pyfunction]
#[pyo3(signature = (p, s, n, seed, f_bins=4, taps=vec![1.0, 0.5], diag=0.5, offdiag=None))]
#[allow(clippy::too_many_arguments)]
fn sample_star_process<'py>(
    py: Python<'py>,
    p: usize,
    s: usize,
    n: usize,
    seed: u64,
    f_bins: usize,
    taps: Vec<f64>,
    diag: f64,
    offdiag: Option<f64>,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let spec = ProcessSpec::new(star_spec(p, s, diag, offdiag), taps, seed, f_bins)
        .map_err(to_py_err)?;
    let x = tsglasso::synth::sample_process(&spec, n).map_err(to_py_err)?;
    let arr = numpy::ndarray::Array2::from_shape_fn((n, p), |(i, j)| x.data()[(i, j)]);
    Ok(arr.into_pyarray(py))
}

/// Analytic SDM and inverse SDM of the star process as a pair of
/// `(f_bins, p, p)` arrays.
#[pyfunction]
#[pyo3(signature = (p, s, f_bins=4, taps=vec![1.0, 0.5], diag=0.5, offdiag=None))]
fn true_sdm<'py>(
    py: Python<'py>,
    p: usize,
    s: usize,
    f_bins: usize,
    taps: Vec<f64>,
    diag: f64,
    offdiag: Option<f64>,
) -> PyResult<(SeqArray<'py>, SeqArray<'py>)> {
    let spec = ProcessSpec::new(star_spec(p, s, diag, offdiag), taps, 0, f_bins)
        .map_err(to_py_err)?;
    let (s_true, k_true) = spec.true_sdm(f_bins).map_err(to_py_err)?;
    Ok((seq_to_array(py, &s_true), seq_to_array(py, &k_true)))
}

/// Biased sample autocorrelation, shape `(max_lag + 1, p, p)`.
#[pyfunction]
#[pyo3(signature = (samples, max_lag))]
fn acf_biased<'py>(
    py: Python<'py>,
    samples: PyReadonlyArray2<'py, f64>,
    max_lag: usize,
) -> PyResult<Bound<'py, PyArray3<f64>>> {
    let x = samples_from_array(samples)?;
    let acf = tsglasso::spectrum::acf_biased(&x, max_lag).map_err(to_py_err)?;
    let p = acf.dim();
    let arr = numpy::ndarray::Array3::from_shape_fn((max_lag + 1, p, p), |(m, i, j)| {
        acf.lag(m)[(i, j)]
    });
    Ok(arr.into_pyarray(py))
}

/// Blackman-Tukey SDM estimate from samples, shape `(f_bins, p, p)`.
#[pyfunction]
#[pyo3(signature = (samples, f_bins=4, window="gaussian", max_lag=None))]
fn bt_sdm<'py>(
    py: Python<'py>,
    samples: PyReadonlyArray2<'py, f64>,
    f_bins: usize,
    window: &str,
    max_lag: Option<usize>,
) -> PyResult<Bound<'py, PyArray3<Complex64>>> {
    let x = samples_from_array(samples)?;
    let w = Window::parse(window).map_err(to_py_err)?;
    let max_lag = max_lag.unwrap_or_else(|| w.radius());
    let acf = tsglasso::spectrum::acf_biased(&x, max_lag).map_err(to_py_err)?;
    let sdm = tsglasso::spectrum::bt_sdm(&acf, &w, f_bins).map_err(to_py_err)?;
    Ok(seq_to_array(py, &sdm))
}

/// Result of an ADMM solve; `estimate` is the block-sparse `z` iterate.
#[pyclass]
struct SolveResult {
    x: MatrixSequence,
    z: MatrixSequence,
    u: MatrixSequence,
    #[pyo3(get)]
    objective: Vec<f64>,
    #[pyo3(get)]
    primal_residual: Vec<f64>,
    #[pyo3(get)]
    dual_residual: Vec<f64>,
}

#[pymethods]
impl SolveResult {
    #[getter]
    fn x<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray3<Complex64>> {
        seq_to_array(py, &self.x)
    }

    #[getter]
    fn z<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray3<Complex64>> {
        seq_to_array(py, &self.z)
    }

    #[getter]
    fn u<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray3<Complex64>> {
        seq_to_array(py, &self.u)
    }

    /// The reported inverse-SDM estimate (alias for `z`).
    #[getter]
    fn estimate<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray3<Complex64>> {
        seq_to_array(py, &self.z)
    }
}

/// ADMM solve of the penalized inverse-SDM problem.
#[pyfunction]
#[pyo3(signature = (sdm, lam, rho=100.0, iters=10, penalize_diagonal=true, record_diagnostics=true))]
fn solve(
    sdm: PyReadonlyArray3<'_, Complex64>,
    lam: f64,
    rho: f64,
    iters: usize,
    penalize_diagonal: bool,
    record_diagnostics: bool,
) -> PyResult<SolveResult> {
    let s_hat = seq_from_array(sdm)?;
    let cfg = SolverConfig {
        lambda: lam,
        rho,
        iters,
        penalize_diagonal,
        record_diagnostics,
        early_stop_tol: None,
    };
    let res = tsglasso::solver::solve(&s_hat, &cfg).map_err(to_py_err)?;
    Ok(SolveResult {
        x: res.x,
        z: res.z,
        u: res.u,
        objective: res.objective_trace,
        primal_residual: res.primal_residual_trace,
        dual_residual: res.dual_residual_trace,
    })
}

/// Objective value of the penalized problem at `x`.
#[pyfunction]
#[pyo3(signature = (x, sdm, lam, penalize_diagonal=true))]
fn objective(
    x: PyReadonlyArray3<'_, Complex64>,
    sdm: PyReadonlyArray3<'_, Complex64>,
    lam: f64,
    penalize_diagonal: bool,
) -> PyResult<f64> {
    let x = seq_from_array(x)?;
    let s_hat = seq_from_array(sdm)?;
    tsglasso::solver::objective(&x, &s_hat, lam, penalize_diagonal).map_err(to_py_err)
}

/// Pooled block norm `sqrt((1/F) sum_f |X_{i,j}[f]|^2)`.
#[pyfunction]
#[pyo3(signature = (seq, i, j))]
fn block_norm(seq: PyReadonlyArray3<'_, Complex64>, i: usize, j: usize) -> PyResult<f64> {
    let seq = seq_from_array(seq)?;
    if i >= seq.dim() || j >= seq.dim() {
        return Err(PyValueError::new_err("entry index out of range"));
    }
    Ok(seq.block_norm(i, j))
}

/// Sum of block norms over all ordered pairs.
#[pyfunction]
#[pyo3(signature = (seq))]
fn l1_norm(seq: PyReadonlyArray3<'_, Complex64>) -> PyResult<f64> {
    Ok(seq_from_array(seq)?.l1_norm())
}

/// Ordered pairs whose block norm exceeds `tol`.
#[pyfunction]
#[pyo3(signature = (seq, tol=0.0))]
fn gsupport(seq: PyReadonlyArray3<'_, Complex64>, tol: f64) -> PyResult<Vec<(usize, usize)>> {
    Ok(seq_from_array(seq)?.gsupport(tol).iter().collect())
}

/// Edges whose block norm reaches `eta` (0-based, i < j).
#[pyfunction]
#[pyo3(signature = (k_hat, eta))]
fn select_edges(
    k_hat: PyReadonlyArray3<'_, Complex64>,
    eta: f64,
) -> PyResult<Vec<(usize, usize)>> {
    let eta_ok = eta > 0.0; // false for NaN too
    if !eta_ok {
        return Err(PyValueError::new_err("eta must be positive"));
    }
    let seq = seq_from_array(k_hat)?;
    Ok(tsglasso::graph::select_edges(&seq, eta).iter().collect())
}

/// `(detected fraction, false-alarm fraction)` of `estimated` against
/// `truth` over `p` nodes.
#[pyfunction]
#[pyo3(signature = (estimated, truth, p))]
fn detection_rates(
    estimated: Vec<(usize, usize)>,
    truth: Vec<(usize, usize)>,
    p: usize,
) -> PyResult<(f64, f64)> {
    let est = edge_set(p, estimated)?;
    let truth = edge_set(p, truth)?;
    tsglasso::graph::detection_rates(&est, &truth).map_err(to_py_err)
}

/// Full estimate→solve→select pass, returning the edge list.
#[pyfunction]
#[pyo3(signature = (samples, lam, f_bins=4, window="gaussian", rho=100.0, iters=10, eta=1e-4, penalize_diagonal=true))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    samples: PyReadonlyArray2<'_, f64>,
    lam: f64,
    f_bins: usize,
    window: &str,
    rho: f64,
    iters: usize,
    eta: f64,
    penalize_diagonal: bool,
) -> PyResult<Vec<(usize, usize)>> {
    let x = samples_from_array(samples)?;
    let cfg = PipelineConfig {
        f_bins,
        window: Window::parse(window).map_err(to_py_err)?,
        lambda: lam,
        rho,
        iters,
        penalize_diagonal,
        eta,
    };
    let edges = tsglasso::experiment::run_pipeline(&x, &cfg).map_err(to_py_err)?;
    Ok(edges.iter().collect())
}

/// Minimum block norm of `k` over the given edges.
#[pyfunction]
#[pyo3(signature = (k, edges))]
fn rho_x(k: PyReadonlyArray3<'_, Complex64>, edges: Vec<(usize, usize)>) -> PyResult<f64> {
    let seq = seq_from_array(k)?;
    let edges = edge_set(seq.dim(), edges)?;
    tsglasso::analysis::rho_x(&seq, &edges).map_err(to_py_err)
}

/// Theory-backed penalty `phi * rho_min / (192 s (2U+1)^2)`.
#[pyfunction]
#[pyo3(signature = (u_bound, s, phi, rho_min, delta=0.05))]
fn lambda_theoretical(u_bound: f64, s: usize, phi: f64, rho_min: f64, delta: f64) -> PyResult<f64> {
    let tp = tsglasso::analysis::TheoryParams {
        u_bound,
        s,
        phi,
        rho_min,
        delta,
    };
    tp.validate().map_err(to_py_err)?;
    Ok(tsglasso::analysis::lambda_theoretical(&tp))
}

/// L1 error bound `96 (2U+1)^2 (s/phi) lam`.
#[pyfunction]
#[pyo3(signature = (u_bound, s, phi, rho_min, lam, delta=0.05))]
fn error_bound(
    u_bound: f64,
    s: usize,
    phi: f64,
    rho_min: f64,
    lam: f64,
    delta: f64,
) -> PyResult<f64> {
    let tp = tsglasso::analysis::TheoryParams {
        u_bound,
        s,
        phi,
        rho_min,
        delta,
    };
    tp.validate().map_err(to_py_err)?;
    Ok(tsglasso::analysis::error_bound(&tp, lam))
}

/// Monte-Carlo ROC sweep; returns rows `(n, sweep_value, p_d, p_fa)`.
#[pyfunction]
#[pyo3(signature = (p, s, n_values, lambda_grid, runs=20, f_bins=4, iters=10, rho=100.0, eta=1e-4, window="gaussian", master_seed=17))]
#[allow(clippy::too_many_arguments)]
fn roc(
    p: usize,
    s: usize,
    n_values: Vec<usize>,
    lambda_grid: Vec<f64>,
    runs: usize,
    f_bins: usize,
    iters: usize,
    rho: f64,
    eta: f64,
    window: &str,
    master_seed: u64,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let mut cfg = ExperimentConfig::desk_scale();
    cfg.star = StarSpec::new(p, s);
    cfg.n_values = n_values;
    cfg.lambda_grid = lambda_grid;
    cfg.runs = runs;
    cfg.f_bins = f_bins;
    cfg.iters = iters;
    cfg.rho = rho;
    cfg.eta = eta;
    cfg.window = Window::parse(window).map_err(to_py_err)?;
    cfg.master_seed = master_seed;
    let table = run_roc(&cfg).map_err(to_py_err)?;
    Ok(table
        .rows
        .iter()
        .map(|r| (r.n, r.sweep_value, r.p_d, r.p_fa))
        .collect())
}

#[pymodule]
fn tsglasso_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(star_precision, m)?)?;
    m.add_function(wrap_pyfunction!(true_edges, m)?)?;
    m.add_function(wrap_pyfunction!(sample_star_process, m)?)?;
    m.add_function(wrap_pyfunction!(true_sdm, m)?)?;
    m.add_function(wrap_pyfunction!(acf_biased, m)?)?;
    m.add_function(wrap_pyfunction!(bt_sdm, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(block_norm, m)?)?;
    m.add_function(wrap_pyfunction!(l1_norm, m)?)?;
    m.add_function(wrap_pyfunction!(gsupport, m)?)?;
    m.add_function(wrap_pyfunction!(select_edges, m)?)?;
    m.add_function(wrap_pyfunction!(detection_rates, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(rho_x, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_theoretical, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(roc, m)?)?;
    Ok(())
}
