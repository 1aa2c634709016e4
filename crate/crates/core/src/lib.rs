//! Conditional independence graph estimation for stationary multivariate
//! Gaussian time series.
//!
//! The estimator works in the frequency domain: a Blackman-Tukey estimate
//! of the spectral density matrix feeds an ℓ1-regularized approximate
//! (Whittle) likelihood problem over inverse-SDM sequences, solved with
//! ADMM. Edges of the conditional independence graph are read off the
//! pooled block norms of the sparse solution.
//!
//! Module map:
//! * [`matseq`] — Hermitian matrix sequences and their norms/supports.
//! * [`spectrum`] — autocorrelation, lag windows, SDM estimation, and the
//!   analytic SDM of FIR-filtered white noise.
//! * [`solver`] — the ADMM solver with closed-form updates.
//! * [`graph`] — edge selection and detection metrics.
//! * [`synth`] — the star-graph benchmark process generator.
//! * [`analysis`] — theoretical diagnostics and bounds.
//! * [`experiment`] — pipeline orchestration and the ROC harness.
//! * [`io`] — file formats for sequences, samples, edges and diagnostics.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod matseq;
pub mod solver;
pub mod spectrum;
pub mod synth;

pub use error::{CoreError, Result};
pub use experiment::{ExperimentConfig, PipelineConfig, RocRow, RocTable, SweepMode};
pub use graph::EdgeSet;
pub use matseq::{CMatrix, IndexSet, MatrixSequence};
pub use solver::{GlassoResult, SolverConfig};
pub use spectrum::{AcfSequence, SampleMatrix, Window};
pub use synth::{ProcessSpec, StarSpec};
