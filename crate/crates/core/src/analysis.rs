//! Theoretical diagnostics: partial spectral coherence, ACF moments, the
//! theory-backed penalty choice with its error bound, the sufficient
//! sample-size condition, and a sampling probe for the compatibility
//! constant.
//!
//! The closed-form bounds here are extremely conservative at practical
//! sample sizes; they are reported for reference, not used to gate the
//! estimator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{CoreError, Result};
use crate::graph::EdgeSet;
use crate::matseq::{CMatrix, IndexSet, MatrixSequence};
use crate::spectrum::Window;

/// Parameters the performance bounds are expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryParams {
    /// Upper bound `U` on SDM eigenvalues (the lower bound is normalized
    /// to 1).
    pub u_bound: f64,
    /// Edge budget `s`.
    pub s: usize,
    /// Compatibility constant `φ`.
    pub phi: f64,
    /// Lower bound on the minimum partial spectral coherence.
    pub rho_min: f64,
    /// Failure probability budget.
    pub delta: f64,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.u_bound >= 1.0
            && self.u_bound.is_finite()
            && self.s >= 1
            && self.phi > 0.0
            && self.phi.is_finite()
            && self.rho_min > 0.0
            && self.rho_min.is_finite()
            && self.delta > 0.0
            && self.delta < 1.0;
        if ok {
            Ok(())
        } else {
            Err(CoreError::InvalidParameter(format!("{self:?}")))
        }
    }
}

/// Minimum pooled block norm of the inverse SDM over the given edges:
/// the smallest partial spectral coherence the estimator has to detect.
///
/// Zero (no error) when some edge has an exactly vanishing block; callers
/// should treat a zero as a degenerate configuration.
pub fn rho_x(k: &MatrixSequence, edges: &EdgeSet) -> Result<f64> {
    if edges.is_empty() {
        return Err(CoreError::EmptyEdgeSet);
    }
    if edges.p() != k.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "edges over {} nodes, sequence dimension {}",
            edges.p(),
            k.dim()
        )));
    }
    Ok(edges
        .iter()
        .map(|(i, j)| k.block_norm(i, j))
        .fold(f64::INFINITY, f64::min))
}

/// Weighted ACF moment `Σ_m ‖R[m]‖_∞ h[m]` over all lags covered by
/// `lags` (both signs; `‖R[-m]‖_∞ = ‖R[m]^T‖_∞`). `‖·‖_∞` is the maximum
/// absolute entry.
pub fn acf_moment(lags: &[DMatrix<f64>], h: impl Fn(i64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (m, r) in lags.iter().enumerate() {
        let norm = r.abs().max();
        if m == 0 {
            acc += norm * h(0);
        } else {
            acc += norm * (h(m as i64) + h(-(m as i64)));
        }
    }
    acc
}

/// Lag weight `h₁[m] = |1 - w[m](1 - |m|/N)|` for `|m| < N`, and 1
/// beyond; this weight measures how much the windowed biased ACF
/// transform deviates from the exact one at each lag.
pub fn h1_weight(w: &Window, n: usize) -> impl Fn(i64) -> f64 {
    assert!(n >= 1);
    let w = w.clone();
    move |m: i64| {
        let a = m.unsigned_abs() as usize;
        if a < n {
            (1.0 - w.weight(m) * (1.0 - a as f64 / n as f64)).abs()
        } else {
            1.0
        }
    }
}

/// Penalty weight for which the theory guarantees exact recovery under
/// its assumptions: `λ = φ ρ_min / (192 s (2U+1)²)`.
pub fn lambda_theoretical(tp: &TheoryParams) -> f64 {
    tp.phi * tp.rho_min / (192.0 * tp.s as f64 * (2.0 * tp.u_bound + 1.0).powi(2))
}

/// ℓ1 error bound `96 (2U+1)² (s/φ) λ` on the inverse-SDM estimate.
/// At `λ = lambda_theoretical` this equals `ρ_min / 2`, the largest error
/// compatible with perfect edge recovery at threshold `ρ_min / 2`.
pub fn error_bound(tp: &TheoryParams, lambda: f64) -> f64 {
    96.0 * (2.0 * tp.u_bound + 1.0).powi(2) * (tp.s as f64 / tp.phi) * lambda
}

/// Both sides of the sufficient sample-size and smoothness conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSizeReport {
    /// Whether `N` reaches the sample-size requirement.
    pub holds: bool,
    pub n: usize,
    /// Required sample count
    /// `10⁸ (2U+1)⁶ s² φ⁻² ρ_min⁻² ‖w‖₁² log(4Np²/δ)`.
    pub rhs: f64,
    /// ACF moment `μ^(h₁)`, when one was supplied.
    pub moment_lhs: Option<f64>,
    /// Moment budget `φ ρ_min / (384 s (2U+1)²)`.
    pub moment_rhs: f64,
    /// Whether the supplied moment fits the budget.
    pub moment_holds: Option<bool>,
}

/// Evaluates the sufficient sample-size condition (and, when an ACF
/// moment is supplied, the smoothness condition) for the given window
/// and dimension. Both sides are returned for reporting; at desk-scale
/// sample counts the requirement fails by many orders of magnitude.
pub fn sample_size_condition(
    tp: &TheoryParams,
    n: usize,
    w: &Window,
    p: usize,
    moment: Option<f64>,
) -> Result<SampleSizeReport> {
    tp.validate()?;
    if n == 0 || p == 0 {
        return Err(CoreError::InvalidParameter("need n >= 1 and p >= 1".into()));
    }
    let two_u_one = 2.0 * tp.u_bound + 1.0;
    let w1 = w.l1_norm();
    let log_term = (4.0 * n as f64 * (p * p) as f64 / tp.delta).ln();
    let rhs = 1e8
        * two_u_one.powi(6)
        * (tp.s as f64).powi(2)
        * tp.phi.powi(-2)
        * tp.rho_min.powi(-2)
        * w1.powi(2)
        * log_term;
    let moment_rhs = tp.phi * tp.rho_min / (384.0 * tp.s as f64 * two_u_one.powi(2));
    Ok(SampleSizeReport {
        holds: n as f64 >= rhs,
        n,
        rhs,
        moment_lhs: moment,
        moment_rhs,
        moment_holds: moment.map(|m| m <= moment_rhs),
    })
}

/// Tail-probability diagnostic for the event that the SDM estimation
/// error exceeds `ν` plus the ACF moment:
/// `2 exp(-(1/32) N ν² / (‖w‖₁² U²) + 2 log(2pN))`. Vacuous (≥ 1) at
/// desk-scale sample counts.
pub fn fail_prob(nu: f64, n: usize, w_l1: f64, u_bound: f64, p: usize) -> f64 {
    let exponent = -(n as f64) * nu * nu / (32.0 * w_l1 * w_l1 * u_bound * u_bound)
        + 2.0 * (2.0 * (p * n) as f64).ln();
    2.0 * exponent.exp()
}

/// Heuristic sampling probe for the compatibility constant: draws random
/// Hermitian sequences in the cone `‖X_{S^c}‖₁ ≤ 3 ‖X_S‖₁` and returns
/// the smallest observed quotient `s · Q(X) / ‖X_S‖₁²`, where `Q` is the
/// SDM quadratic form `(1/F) Σ_f tr(X[f] S[f] X[f] S[f])`.
///
/// The sampled minimum only upper-bounds the best certifiable constant;
/// it is a diagnostic, never a certificate that the compatibility
/// condition holds.
pub fn probe_compatibility(
    s: &MatrixSequence,
    support: &IndexSet,
    s_count: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    assert!(trials >= 1, "need at least one trial");
    assert!(s_count >= 1, "edge budget must be at least 1");
    if support.dim() != s.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "support over dimension {}, sequence dimension {}",
            support.dim(),
            s.dim()
        )));
    }
    if !support.is_transpose_closed() {
        return Err(CoreError::SupportNotTransposeClosed);
    }
    if support.is_empty() {
        return Err(CoreError::InvalidParameter("empty support".into()));
    }
    let complement = support.complement();
    let f_len = s.f_len();
    let p = s.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        let draw = |rng: &mut ChaCha12Rng| {
            let mats: Vec<CMatrix> = (0..f_len)
                .map(|_| {
                    let raw = CMatrix::from_fn(p, p, |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    });
                    let adj = raw.adjoint();
                    (raw + adj).scale(0.5)
                })
                .collect();
            MatrixSequence::from_parts_unchecked(mats, p)
        };
        let on_support = draw(&mut rng).restrict_support(support)?;
        let off_support = draw(&mut rng).restrict_support(&complement)?;

        let l1_s = on_support.l1_norm();
        if l1_s < 1e-12 {
            continue;
        }
        let l1_sc = off_support.l1_norm();
        let x = if l1_sc > 3.0 * l1_s {
            on_support.add(&off_support.scale(3.0 * l1_s / l1_sc))
        } else {
            on_support.add(&off_support)
        };

        let mut q = Complex64::new(0.0, 0.0);
        for f in 0..f_len {
            let xs = x.mat(f) * s.mat(f);
            for i in 0..p {
                for k in 0..p {
                    q += xs[(i, k)] * xs[(k, i)];
                }
            }
        }
        let q = q.re / f_len as f64;
        let quotient = s_count as f64 * q / (l1_s * l1_s);
        best = best.min(quotient);
    }
    if best.is_infinite() {
        return Err(CoreError::NonFinite(
            "all compatibility probe draws degenerated".into(),
        ));
    }
    Ok(best)
}
