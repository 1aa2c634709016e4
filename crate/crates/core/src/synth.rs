//! Synthetic benchmark process: a star-graph precision matrix drives white
//! Gaussian innovations through a short scalar FIR filter.
//!
//! The resulting process has a known conditional independence graph (the
//! star edges) and a known analytic SDM, which makes it a ground-truth
//! generator for recovery experiments. Sampling is fully deterministic
//! given the seed; the generator is ChaCha12, a counter-based stream
//! cipher RNG, so per-run seeds `master_seed + run_index` give
//! independent streams.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::EdgeSet;
use crate::matseq::MatrixSequence;
use crate::spectrum::{transfer_at, true_sdm_fir, SampleMatrix};

/// Star-graph precision matrix specification: `diag` on the main
/// diagonal, `offdiag` between the hub and each of its `n_neighbors`
/// consecutive neighbors, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSpec {
    /// Number of nodes.
    pub p: usize,
    /// Number of hub neighbors `s`.
    pub n_neighbors: usize,
    /// Main diagonal value.
    pub diag: f64,
    /// Hub-to-neighbor coupling.
    pub offdiag: f64,
    /// Hub node index (0-based).
    pub hub: usize,
}

impl StarSpec {
    /// Star over `p` nodes with `s` neighbors, diagonal 1/2 and coupling
    /// `4/(10 s)`, hub at node 0.
    pub fn new(p: usize, s: usize) -> Self {
        Self {
            p,
            n_neighbors: s,
            diag: 0.5,
            offdiag: 0.4 / s as f64,
            hub: 0,
        }
    }

    /// The benchmark configuration: 64 nodes, 4 neighbors, diagonal 1/2,
    /// coupling 0.1.
    pub fn benchmark() -> Self {
        Self::new(64, 4)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.n_neighbors == 0 {
            return Err(CoreError::InvalidParameter(
                "star needs p >= 2 and at least one neighbor".into(),
            ));
        }
        if self.p <= self.n_neighbors {
            return Err(CoreError::InvalidParameter(format!(
                "p = {} must exceed the neighbor count {}",
                self.p, self.n_neighbors
            )));
        }
        if self.hub + self.n_neighbors >= self.p {
            return Err(CoreError::InvalidParameter(format!(
                "hub {} with {} consecutive neighbors exceeds p = {}",
                self.hub, self.n_neighbors, self.p
            )));
        }
        let coupling_ok =
            self.offdiag >= 0.0 && self.diag > self.n_neighbors as f64 * self.offdiag;
        if !coupling_ok {
            return Err(CoreError::InvalidParameter(format!(
                "need diag > s * offdiag >= 0 for positive definiteness, got diag = {}, s * offdiag = {}",
                self.diag,
                self.n_neighbors as f64 * self.offdiag
            )));
        }
        Ok(())
    }

    fn neighbors(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n_neighbors).map(move |k| self.hub + k)
    }
}

/// Builds the star precision matrix `K0` and verifies positive
/// definiteness by factorization.
pub fn star_precision(spec: &StarSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let mut k0 = DMatrix::from_diagonal_element(spec.p, spec.p, spec.diag);
    for nb in spec.neighbors() {
        k0[(spec.hub, nb)] = spec.offdiag;
        k0[(nb, spec.hub)] = spec.offdiag;
    }
    if nalgebra::Cholesky::new(k0.clone()).is_none() {
        return Err(CoreError::NotPositiveDefinite("star precision matrix".into()));
    }
    Ok(k0)
}

/// The star's hub-neighbor edges.
pub fn true_edges(spec: &StarSpec) -> EdgeSet {
    EdgeSet::new(spec.p, spec.neighbors().map(|nb| (spec.hub, nb)))
        .expect("star spec produces valid edges")
}

/// Full generative description of the synthetic process: star precision,
/// FIR taps, the global amplitude that normalizes the smallest SDM
/// eigenvalue on the frequency grid to 1, and the RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub star: StarSpec,
    /// Unscaled FIR taps `g`.
    pub taps: Vec<f64>,
    /// Amplitude applied to the filter output so that
    /// `min_f λ_min(S(θ_f)) = 1` on the `f_bins` grid.
    pub scale: f64,
    /// Seed for the ChaCha12 sample stream.
    pub seed: u64,
    /// Frequency grid used for the normalization (and the default grid
    /// for analytic SDM evaluation).
    pub f_bins: usize,
}

impl ProcessSpec {
    /// Computes the normalizing scale for the given star, taps and grid.
    pub fn new(star: StarSpec, taps: Vec<f64>, seed: u64, f_bins: usize) -> Result<Self> {
        star.validate()?;
        if taps.is_empty() {
            return Err(CoreError::InvalidParameter("empty filter".into()));
        }
        if f_bins == 0 {
            return Err(CoreError::InvalidParameter(
                "need at least one frequency bin".into(),
            ));
        }
        let k0 = star_precision(&star)?;
        let c0 = nalgebra::Cholesky::new(k0)
            .expect("validated above")
            .inverse();
        let lambda_min_c0 = c0
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let mut min_gain = f64::INFINITY;
        for f in 0..f_bins {
            let theta = f as f64 / f_bins as f64;
            let gain = transfer_at(&taps, theta).norm_sqr();
            if gain <= 1e-14 {
                return Err(CoreError::SingularTransfer { bin: f });
            }
            min_gain = min_gain.min(gain);
        }
        let scale = 1.0 / (min_gain * lambda_min_c0).sqrt();
        Ok(Self {
            star,
            taps,
            scale,
            seed,
            f_bins,
        })
    }

    /// The benchmark process: 64-node star, taps `[1, 0.5]`, 4 bins.
    pub fn benchmark(seed: u64) -> Result<Self> {
        Self::new(StarSpec::benchmark(), vec![1.0, 0.5], seed, 4)
    }

    /// Same process with a different sample stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        out
    }

    /// Taps with the normalizing amplitude folded in.
    pub fn scaled_taps(&self) -> Vec<f64> {
        self.taps.iter().map(|&g| g * self.scale).collect()
    }

    /// Analytic SDM and inverse SDM on a grid of `f_bins` bins.
    pub fn true_sdm(&self, f_bins: usize) -> Result<(MatrixSequence, MatrixSequence)> {
        let k0 = star_precision(&self.star)?;
        true_sdm_fir(&k0, &self.scaled_taps(), f_bins)
    }

    /// Exact autocorrelation matrices `R[0..taps.len()-1]`: an FIR
    /// process has `R[m] = r_g[m] C0` with `r_g` the filter tap
    /// autocorrelation, and no correlation beyond the filter length.
    pub fn analytic_acf(&self) -> Result<Vec<DMatrix<f64>>> {
        let k0 = star_precision(&self.star)?;
        let c0 = nalgebra::Cholesky::new(k0)
            .ok_or_else(|| CoreError::NotPositiveDefinite("star precision matrix".into()))?
            .inverse();
        let taps = self.scaled_taps();
        let len = taps.len();
        Ok((0..len)
            .map(|m| {
                let r_g: f64 = (0..len - m).map(|n| taps[n + m] * taps[n]).sum();
                c0.scale(r_g)
            })
            .collect())
    }
}

/// Draws `n` samples of the process: innovations `e[t] ~ N(0, K0^{-1})`
/// from the seeded stream, filtered by the scaled taps. A burn-in of
/// `taps.len() - 1` innovation steps makes the output segment exactly
/// stationary. Bit-identical for equal seeds.
pub fn sample_process(spec: &ProcessSpec, n: usize) -> Result<SampleMatrix> {
    if n < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let p = spec.star.p;
    let k0 = star_precision(&spec.star)?;
    let c0 = nalgebra::Cholesky::new(k0)
        .ok_or_else(|| CoreError::NotPositiveDefinite("star precision matrix".into()))?
        .inverse();
    let chol_c0 = nalgebra::Cholesky::new(c0)
        .ok_or_else(|| CoreError::NotPositiveDefinite("innovation covariance".into()))?;
    let a = chol_c0.l();

    let taps = spec.scaled_taps();
    let burn_in = taps.len() - 1;
    let total = n + burn_in;

    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let innovations: Vec<DVector<f64>> = (0..total)
        .map(|_| {
            let z = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            &a * z
        })
        .collect();

    let mut data = DMatrix::zeros(n, p);
    for t in 0..n {
        let mut x = DVector::zeros(p);
        for (k, &g) in taps.iter().enumerate() {
            x += &innovations[burn_in + t - k] * g;
        }
        data.row_mut(t).copy_from(&x.transpose());
    }
    SampleMatrix::new(data)
}
