//! Autocorrelation and spectral density matrix (SDM) estimation.
//!
//! The SDM estimate is a windowed Fourier transform of the biased sample
//! autocovariance sequence, evaluated on the grid `θ_f = f/F` (0-based
//! bins). The module also provides the exact analytic SDM of a process
//! obtained by scalar FIR filtering of white Gaussian noise, which serves
//! as ground truth in benchmarks.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::matseq::{CMatrix, MatrixSequence};

/// An `N × p` real observation matrix; row `n` is the sample `x[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
}

impl SampleMatrix {
    /// Validates `N ≥ 2` and finiteness of all entries.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "need at least 2 samples, got {}",
                data.nrows()
            )));
        }
        if data.ncols() == 0 {
            return Err(CoreError::InvalidParameter("dimension must be >= 1".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("sample matrix entry".into()));
        }
        Ok(Self { data })
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Biased sample autocorrelation matrices `R̂[0..=max_lag]`.
///
/// Negative lags are implicit: for a real-valued process
/// `R̂[-m] = R̂[m]^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSequence {
    lags: Vec<DMatrix<f64>>,
}

impl AcfSequence {
    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.lags[0].nrows()
    }

    /// `R̂[m]` for `0 ≤ m ≤ max_lag`.
    pub fn lag(&self, m: usize) -> &DMatrix<f64> {
        &self.lags[m]
    }

    pub fn lags(&self) -> &[DMatrix<f64>] {
        &self.lags
    }

    /// Builds directly from lag matrices (used by analytic oracles).
    pub fn from_lags(lags: Vec<DMatrix<f64>>) -> Result<Self> {
        if lags.is_empty() {
            return Err(CoreError::InvalidParameter("need at least lag 0".into()));
        }
        let p = lags[0].nrows();
        if lags.iter().any(|m| m.nrows() != p || m.ncols() != p) {
            return Err(CoreError::DimensionMismatch("ACF lag matrices".into()));
        }
        Ok(Self { lags })
    }
}

/// Biased autocorrelation estimate
/// `R̂[m] = (1/N) Σ_{n=m}^{N-1} x[n] x[n-m]^T` for `m = 0..=max_lag`.
///
/// The `1/N` normalization is used for every lag.
pub fn acf_biased(x: &SampleMatrix, max_lag: usize) -> Result<AcfSequence> {
    let n = x.n_samples();
    if max_lag >= n {
        return Err(CoreError::MaxLagTooLarge { max_lag, n });
    }
    let data = x.data();
    let lags = (0..=max_lag)
        .map(|m| {
            let upper = data.rows(m, n - m);
            let lower = data.rows(0, n - m);
            (upper.transpose() * lower).scale(1.0 / n as f64)
        })
        .collect();
    Ok(AcfSequence { lags })
}

/// Lag window for Blackman-Tukey estimation. Weights are even in the lag
/// and treated as zero beyond the effective support radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Window {
    /// `w[m] = exp(-m²)`, truncated where the weight drops below 1e-12
    /// (radius 5).
    Gaussian,
    /// `w[m] = 1` for `|m| ≤ radius`, else 0.
    Rectangular { radius: usize },
}

/// Support radius beyond which `exp(-m²) < 1e-12`.
const GAUSSIAN_RADIUS: usize = 5;

impl Window {
    pub fn gaussian() -> Self {
        Window::Gaussian
    }

    pub fn rectangular(radius: usize) -> Self {
        Window::Rectangular { radius }
    }

    /// Weight at (signed) lag `m`.
    pub fn weight(&self, m: i64) -> f64 {
        let a = m.unsigned_abs() as usize;
        match self {
            Window::Gaussian => {
                if a > GAUSSIAN_RADIUS {
                    0.0
                } else {
                    (-((m * m) as f64)).exp()
                }
            }
            Window::Rectangular { radius } => {
                if a <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Effective support radius; weights vanish for `|m| > radius`.
    pub fn radius(&self) -> usize {
        match self {
            Window::Gaussian => GAUSSIAN_RADIUS,
            Window::Rectangular { radius } => *radius,
        }
    }

    /// `Σ_m |w[m]|` over the effective support, both lag signs.
    pub fn l1_norm(&self) -> f64 {
        let r = self.radius() as i64;
        (1..=r).map(|m| 2.0 * self.weight(m).abs()).sum::<f64>() + self.weight(0).abs()
    }

    /// Parses the CLI syntax `gaussian` or `rect:R`.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "gaussian" {
            return Ok(Window::Gaussian);
        }
        if let Some(radius) = text.strip_prefix("rect:") {
            let radius: usize = radius.parse().map_err(|_| {
                CoreError::InvalidParameter(format!("bad rectangular radius in '{text}'"))
            })?;
            return Ok(Window::Rectangular { radius });
        }
        Err(CoreError::InvalidParameter(format!(
            "unknown window '{text}' (expected 'gaussian' or 'rect:R')"
        )))
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Window::Gaussian => write!(f, "gaussian"),
            Window::Rectangular { radius } => write!(f, "rect:{radius}"),
        }
    }
}

/// Evaluates the window transform `W(θ) = Σ_m w[m] exp(-j2πθm)` on a
/// uniform grid and reports whether its minimum stays above `-1e-9`,
/// together with the minimum found.
///
/// Nonnegativity of `W` is a sufficient condition for the SDM estimate to
/// be positive semidefinite; the check is advisory and nothing downstream
/// requires it to pass.
pub fn window_psd_check(w: &Window, grid: usize) -> (bool, f64) {
    assert!(grid >= 8, "psd check grid must have at least 8 points");
    let r = w.radius() as i64;
    let mut min_val = f64::INFINITY;
    for g in 0..grid {
        let theta = g as f64 / grid as f64;
        let mut val = w.weight(0);
        for m in 1..=r {
            val += 2.0 * w.weight(m) * (TAU * theta * m as f64).cos();
        }
        min_val = min_val.min(val);
    }
    (min_val >= -1e-9, min_val)
}

/// Blackman-Tukey SDM estimate
/// `Ŝ[f] = Σ_{m=-M}^{M} w[m] R̂[m] exp(-j2πmθ_f)` on the grid
/// `θ_f = f/F`, with `M` the window support radius and
/// `R̂[-m] = R̂[m]^T`.
///
/// The output is Hermitian by construction and symmetrized to remove
/// rounding residue.
pub fn bt_sdm(acf: &AcfSequence, w: &Window, f_bins: usize) -> Result<MatrixSequence> {
    if f_bins == 0 {
        return Err(CoreError::InvalidParameter(
            "need at least one frequency bin".into(),
        ));
    }
    let radius = w.radius();
    if acf.max_lag() < radius {
        return Err(CoreError::WindowAcfMismatch {
            window_radius: radius,
            acf_max_lag: acf.max_lag(),
        });
    }
    let mut mats = Vec::with_capacity(f_bins);
    for f in 0..f_bins {
        let theta = f as f64 / f_bins as f64;
        let mut s = complexify(acf.lag(0)).scale(w.weight(0));
        for m in 1..=radius {
            let phase = Complex64::from_polar(1.0, -TAU * m as f64 * theta);
            let wm = w.weight(m as i64);
            let r = acf.lag(m);
            let fwd = complexify(r) * (phase * wm);
            let bwd = complexify(&r.transpose()) * (phase.conj() * wm);
            s += fwd + bwd;
        }
        mats.push(s);
    }
    MatrixSequence::symmetrized(mats)
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Scalar transfer function `G(θ) = Σ_k g[k] exp(-j2πθk)`.
pub fn transfer_at(taps: &[f64], theta: f64) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(k, &g)| Complex64::from_polar(g, -TAU * theta * k as f64))
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Exact SDM and inverse SDM, on the grid `θ_f = f/F`, of the process
/// obtained by applying the scalar FIR filter `taps` to white noise with
/// covariance `C0 = K0^{-1}`:
/// `S[f] = |G(θ_f)|² C0` and `K[f] = |G(θ_f)|^{-2} K0`.
pub fn true_sdm_fir(
    k0: &DMatrix<f64>,
    taps: &[f64],
    f_bins: usize,
) -> Result<(MatrixSequence, MatrixSequence)> {
    if f_bins == 0 {
        return Err(CoreError::InvalidParameter(
            "need at least one frequency bin".into(),
        ));
    }
    if taps.is_empty() {
        return Err(CoreError::InvalidParameter("empty filter".into()));
    }
    if k0.nrows() != k0.ncols() {
        return Err(CoreError::DimensionMismatch("K0 must be square".into()));
    }
    let sym_defect = (k0 - k0.transpose()).abs().max();
    if sym_defect > 1e-10 {
        return Err(CoreError::InvalidParameter(format!(
            "K0 must be symmetric (defect {sym_defect:.3e})"
        )));
    }
    let chol = nalgebra::Cholesky::new(k0.clone())
        .ok_or_else(|| CoreError::NotPositiveDefinite("K0".into()))?;
    let c0 = chol.inverse();

    let mut s_mats = Vec::with_capacity(f_bins);
    let mut k_mats = Vec::with_capacity(f_bins);
    for f in 0..f_bins {
        let theta = f as f64 / f_bins as f64;
        let gain = transfer_at(taps, theta).norm_sqr();
        if gain <= 1e-14 {
            return Err(CoreError::SingularTransfer { bin: f });
        }
        s_mats.push(complexify(&c0).scale(gain));
        k_mats.push(complexify(k0).scale(1.0 / gain));
    }
    Ok((
        MatrixSequence::symmetrized(s_mats)?,
        MatrixSequence::symmetrized(k_mats)?,
    ))
}

/// Smallest and largest eigenvalue over all frequency bins.
pub fn sdm_eigen_bounds(s: &MatrixSequence) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in s.mats() {
        let eig = m.clone().symmetric_eigen();
        for &v in eig.eigenvalues.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}
