//! End-to-end pipeline and the Monte-Carlo ROC harness.
//!
//! A pipeline run estimates the SDM from samples, solves for the sparse
//! inverse, and thresholds block norms into an edge set. The ROC harness
//! repeats this over seeded simulation runs for a grid of penalty (or
//! threshold) values and several sample counts, averaging detection and
//! false-alarm fractions.
//!
//! Reproducibility contract: `run_roc` is a pure function of its config.
//! Run `r` of every sample count uses seed `master_seed + r`, so curves
//! for different `N` share sample streams (common random numbers), and
//! reruns are byte-identical all the way to the emitted CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::graph::{detection_rates, select_edges, EdgeSet};
use crate::solver::{solve, GlassoResult, SolverConfig};
use crate::spectrum::{acf_biased, bt_sdm, SampleMatrix, Window};
use crate::synth::{sample_process, true_edges, ProcessSpec, StarSpec};

/// Parameters of a single estimate→solve→select pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub f_bins: usize,
    pub window: Window,
    pub lambda: f64,
    pub rho: f64,
    pub iters: usize,
    pub penalize_diagonal: bool,
    /// Block-norm threshold for edge selection.
    pub eta: f64,
}

impl PipelineConfig {
    pub fn new(f_bins: usize, lambda: f64) -> Self {
        Self {
            f_bins,
            window: Window::gaussian(),
            lambda,
            rho: 100.0,
            iters: 10,
            penalize_diagonal: true,
            eta: 1e-4,
        }
    }

    fn solver_config(&self, record_diagnostics: bool) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            rho: self.rho,
            iters: self.iters,
            penalize_diagonal: self.penalize_diagonal,
            record_diagnostics,
            early_stop_tol: None,
        }
    }
}

/// Intermediate artifacts of a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub sdm_estimate: crate::matseq::MatrixSequence,
    pub result: GlassoResult,
    pub edges: EdgeSet,
}

/// Runs the full pipeline and returns the estimated edge set.
pub fn run_pipeline(samples: &SampleMatrix, cfg: &PipelineConfig) -> Result<EdgeSet> {
    run_pipeline_full(samples, cfg).map(|a| a.edges)
}

/// Runs the full pipeline keeping the SDM estimate and solver result.
pub fn run_pipeline_full(
    samples: &SampleMatrix,
    cfg: &PipelineConfig,
) -> Result<PipelineArtifacts> {
    let acf = acf_biased(samples, cfg.window.radius())?;
    let sdm_estimate = bt_sdm(&acf, &cfg.window, cfg.f_bins)?;
    let result = solve(&sdm_estimate, &cfg.solver_config(false))?;
    let edges = select_edges(result.estimate(), cfg.eta);
    Ok(PipelineArtifacts {
        sdm_estimate,
        result,
        edges,
    })
}

/// Which grid the ROC sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Sweep the penalty `λ` at fixed threshold `η`.
    Lambda,
    /// Sweep the threshold `η` at fixed penalty (first `lambda_grid`
    /// entry).
    Eta,
}

/// Full description of a ROC experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub star: StarSpec,
    pub taps: Vec<f64>,
    pub n_values: Vec<usize>,
    pub f_bins: usize,
    pub iters: usize,
    pub rho: f64,
    pub lambda_grid: Vec<f64>,
    /// Selection threshold used in `Lambda` sweep mode.
    pub eta: f64,
    /// Threshold grid used in `Eta` sweep mode.
    pub eta_grid: Vec<f64>,
    /// Monte-Carlo runs per grid point.
    pub runs: usize,
    pub window: Window,
    pub master_seed: u64,
    pub sweep: SweepMode,
    pub penalize_diagonal: bool,
}

impl ExperimentConfig {
    /// Small configuration that finishes in seconds on a laptop: 16-node
    /// star with 4 neighbors, 20 runs, 8 log-spaced penalties.
    pub fn desk_scale() -> Self {
        Self {
            star: StarSpec::new(16, 4),
            taps: vec![1.0, 0.5],
            n_values: vec![128, 256],
            f_bins: 4,
            iters: 10,
            rho: 100.0,
            lambda_grid: logspace(0.01, 10.0, 8),
            eta: 1e-4,
            eta_grid: logspace(1e-5, 1e-1, 8),
            runs: 20,
            window: Window::gaussian(),
            master_seed: 17,
            sweep: SweepMode::Lambda,
            penalize_diagonal: true,
        }
    }

    /// The full benchmark configuration: 64-node star, 100 runs,
    /// penalties spanning [1.25, 7.5].
    pub fn paper_scale() -> Self {
        Self {
            star: StarSpec::benchmark(),
            lambda_grid: logspace(1.25, 7.5, 8),
            runs: 100,
            ..Self::desk_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.star.validate()?;
        if self.taps.is_empty() {
            return Err(CoreError::InvalidParameter("empty filter".into()));
        }
        if self.n_values.is_empty() {
            return Err(CoreError::InvalidParameter("no sample counts".into()));
        }
        if self.f_bins == 0 || self.iters == 0 || self.runs == 0 {
            return Err(CoreError::InvalidParameter(
                "f_bins, iters and runs must be >= 1".into(),
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(CoreError::InvalidParameter("rho must be > 0".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(CoreError::InvalidParameter("eta must be > 0".into()));
        }
        let grid = match self.sweep {
            SweepMode::Lambda => &self.lambda_grid,
            SweepMode::Eta => &self.eta_grid,
        };
        if grid.is_empty() {
            return Err(CoreError::InvalidParameter("empty sweep grid".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(CoreError::InvalidParameter("empty lambda grid".into()));
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(CoreError::InvalidParameter("bad lambda grid value".into()));
        }
        if self.eta_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CoreError::InvalidParameter("bad eta grid value".into()));
        }
        Ok(())
    }

    fn process_spec(&self) -> Result<ProcessSpec> {
        ProcessSpec::new(self.star.clone(), self.taps.clone(), 0, self.f_bins)
    }
}

/// One averaged operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub n: usize,
    pub sweep_value: f64,
    pub p_d: f64,
    pub p_fa: f64,
    pub runs: usize,
    /// Master seed the per-run seeds were derived from.
    pub seed: u64,
}

/// Averaged ROC results plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocTable {
    pub rows: Vec<RocRow>,
    pub config: ExperimentConfig,
}

/// Runs the ROC experiment. Rows come out sorted by `(N, sweep value)`.
pub fn run_roc(cfg: &ExperimentConfig) -> Result<RocTable> {
    run_roc_with(cfg, |_| {})
}

/// Like [`run_roc`], invoking `sink` for every finished row so callers
/// can flush partial results as sample counts complete.
pub fn run_roc_with(cfg: &ExperimentConfig, mut sink: impl FnMut(&RocRow)) -> Result<RocTable> {
    cfg.validate()?;
    let truth = true_edges(&cfg.star);
    let base_spec = cfg.process_spec()?;
    let grid: &[f64] = match cfg.sweep {
        SweepMode::Lambda => &cfg.lambda_grid,
        SweepMode::Eta => &cfg.eta_grid,
    };

    let mut rows = Vec::with_capacity(cfg.n_values.len() * grid.len());
    for &n in &cfg.n_values {
        // One entry per run, each a vector of (p_d, p_fa) per grid point;
        // parallel map keeps run order, so reduction is deterministic.
        let per_run: Vec<Vec<(f64, f64)>> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| -> Result<Vec<(f64, f64)>> {
                let spec = base_spec.with_seed(cfg.master_seed + run as u64);
                let samples = sample_process(&spec, n)?;
                let acf = acf_biased(&samples, cfg.window.radius())?;
                let s_hat = bt_sdm(&acf, &cfg.window, cfg.f_bins)?;
                match cfg.sweep {
                    SweepMode::Lambda => cfg
                        .lambda_grid
                        .iter()
                        .map(|&lambda| {
                            let solver = SolverConfig {
                                lambda,
                                rho: cfg.rho,
                                iters: cfg.iters,
                                penalize_diagonal: cfg.penalize_diagonal,
                                record_diagnostics: false,
                                early_stop_tol: None,
                            };
                            let res = solve(&s_hat, &solver)?;
                            let est = select_edges(res.estimate(), cfg.eta);
                            detection_rates(&est, &truth)
                        })
                        .collect(),
                    SweepMode::Eta => {
                        let solver = SolverConfig {
                            lambda: cfg.lambda_grid[0],
                            rho: cfg.rho,
                            iters: cfg.iters,
                            penalize_diagonal: cfg.penalize_diagonal,
                            record_diagnostics: false,
                            early_stop_tol: None,
                        };
                        let res = solve(&s_hat, &solver)?;
                        cfg.eta_grid
                            .iter()
                            .map(|&eta| {
                                let est = select_edges(res.estimate(), eta);
                                detection_rates(&est, &truth)
                            })
                            .collect()
                    }
                }
            })
            .collect::<Result<_>>()?;

        for (gi, &sweep_value) in grid.iter().enumerate() {
            let (mut pd_sum, mut fa_sum) = (0.0, 0.0);
            for run_results in &per_run {
                pd_sum += run_results[gi].0;
                fa_sum += run_results[gi].1;
            }
            let row = RocRow {
                n,
                sweep_value,
                p_d: pd_sum / cfg.runs as f64,
                p_fa: fa_sum / cfg.runs as f64,
                runs: cfg.runs,
                seed: cfg.master_seed,
            };
            sink(&row);
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| {
        (a.n, a.sweep_value)
            .partial_cmp(&(b.n, b.sweep_value))
            .expect("validated grid values are finite")
    });
    Ok(RocTable {
        rows,
        config: cfg.clone(),
    })
}

/// Self-contained renderer for the emitted CSV.
const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render detection-vs-false-alarm curves from roc.csv (one curve per N)."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "roc.csv")
curves = defaultdict(list)
with open(path) as fh:
    for row in csv.DictReader(fh):
        curves[int(row["N"])].append((float(row["P_fa"]), float(row["P_d"])))

fig, ax = plt.subplots(figsize=(6.0, 4.0))
for n in sorted(curves):
    pts = sorted(curves[n])
    ax.plot([q[0] for q in pts], [q[1] for q in pts], marker="o", label=f"N={n}")
ax.set_xlabel("false-alarm fraction")
ax.set_ylabel("detection fraction")
ax.set_xlim(0.0, 1.0)
ax.set_ylim(0.0, 1.02)
ax.grid(True, alpha=0.3)
ax.legend(loc="lower right")
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
"#;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed_rule: &'static str,
    rows: usize,
    config: &'a ExperimentConfig,
}

/// Writes `roc.csv`, `plot_roc.py` and `manifest.json` into `out_dir`.
/// Re-emitting the same table is byte-identical.
pub fn emit_outputs(table: &RocTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;

    let csv_path = out_dir.join("roc.csv");
    let mut csv_out = String::from("N,sweep_value,P_d,P_fa,M\n");
    for row in &table.rows {
        csv_out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n, row.sweep_value, row.p_d, row.p_fa, row.runs
        ));
    }
    std::fs::write(&csv_path, csv_out)?;

    let script_path = out_dir.join("plot_roc.py");
    std::fs::write(&script_path, PLOT_SCRIPT)?;

    let manifest_path = out_dir.join("manifest.json");
    let manifest = Manifest {
        tool: "tsglasso",
        version: env!("CARGO_PKG_VERSION"),
        seed_rule: "per-run seed = master_seed + run_index",
        rows: table.rows.len(),
        config: &table.config,
    };
    let mut file = std::fs::File::create(&manifest_path)?;
    file.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    file.write_all(b"\n")?;

    Ok(vec![csv_path, script_path, manifest_path])
}

/// `count` points spanning `[lo, hi]` with geometric spacing; endpoints
/// are exact.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let ratio = hi / lo;
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                lo * ratio.powf(i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Area under a ROC curve given `(P_fa, P_d)` points, with the implicit
/// endpoints `(0,0)` and `(1,1)` appended, by trapezoidal integration.
pub fn roc_auc(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite ROC points"));
    let mut auc = 0.0;
    for w in pts.windows(2) {
        auc += (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1);
    }
    auc
}

/// Linear interpolation of `P_d` at a false-alarm level, over the curve
/// extended with `(0,0)` and `(1,1)`.
pub fn roc_interpolate(points: &[(f64, f64)], fa: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite ROC points"));
    let fa = fa.clamp(0.0, 1.0);
    for w in pts.windows(2) {
        if fa >= w[0].0 && fa <= w[1].0 {
            let span = w[1].0 - w[0].0;
            if span <= 0.0 {
                return w[0].1.max(w[1].1);
            }
            let t = (fa - w[0].0) / span;
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_extreme_parameters_give_empty_edges() {
        let spec = ProcessSpec::new(StarSpec::new(6, 2), vec![1.0, 0.5], 3, 4).unwrap();
        let samples = sample_process(&spec, 256).unwrap();

        let mut cfg = PipelineConfig::new(4, 1e6);
        let edges = run_pipeline(&samples, &cfg).unwrap();
        assert!(edges.is_empty(), "huge lambda shrinks everything");

        cfg.lambda = 0.1;
        cfg.eta = 1e9;
        let edges = run_pipeline(&samples, &cfg).unwrap();
        assert!(edges.is_empty(), "huge eta rejects everything");
    }

    #[test]
    fn roc_degenerate_single_point_equals_manual_run() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.star = StarSpec::new(6, 2);
        cfg.n_values = vec![128];
        cfg.lambda_grid = vec![0.5];
        cfg.runs = 1;
        cfg.master_seed = 5;
        let table = run_roc(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);

        let spec = ProcessSpec::new(cfg.star.clone(), cfg.taps.clone(), 5, 4).unwrap();
        let samples = sample_process(&spec, 128).unwrap();
        let pipe = PipelineConfig {
            f_bins: 4,
            window: cfg.window.clone(),
            lambda: 0.5,
            rho: cfg.rho,
            iters: cfg.iters,
            penalize_diagonal: true,
            eta: cfg.eta,
        };
        let edges = run_pipeline(&samples, &pipe).unwrap();
        let (pd, pfa) = detection_rates(&edges, &true_edges(&cfg.star)).unwrap();
        assert_eq!(table.rows[0].p_d, pd);
        assert_eq!(table.rows[0].p_fa, pfa);
    }

    #[test]
    fn roc_is_deterministic() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.star = StarSpec::new(6, 2);
        cfg.n_values = vec![64];
        cfg.lambda_grid = vec![0.05, 0.5];
        cfg.runs = 3;
        let a = run_roc(&cfg).unwrap();
        let b = run_roc(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn roc_eta_sweep_rows_and_bounds() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.star = StarSpec::new(6, 2);
        cfg.n_values = vec![64];
        cfg.sweep = SweepMode::Eta;
        cfg.lambda_grid = vec![0.2];
        cfg.eta_grid = logspace(1e-4, 1e-1, 5);
        cfg.runs = 2;
        let table = run_roc(&cfg).unwrap();
        assert_eq!(table.rows.len(), 5);
        for row in &table.rows {
            assert!((0.0..=1.0).contains(&row.p_d));
            assert!((0.0..=1.0).contains(&row.p_fa));
        }
        // Larger eta can only drop edges.
        for w in table.rows.windows(2) {
            assert!(w[1].p_d <= w[0].p_d + 1e-12);
            assert!(w[1].p_fa <= w[0].p_fa + 1e-12);
        }
    }

    #[test]
    fn emit_outputs_contract() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.n_values = vec![128, 256];
        cfg.lambda_grid = logspace(0.1, 1.0, 6);

        // Empty table: header-only CSV plus script and manifest.
        let empty = RocTable {
            rows: vec![],
            config: cfg.clone(),
        };
        let files = emit_outputs(&empty, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv, "N,sweep_value,P_d,P_fa,M\n");

        // 2 sample counts x 6 grid points = 12 rows.
        let rows: Vec<RocRow> = cfg
            .n_values
            .iter()
            .flat_map(|&n| {
                cfg.lambda_grid.iter().map(move |&l| RocRow {
                    n,
                    sweep_value: l,
                    p_d: 0.5,
                    p_fa: 0.25,
                    runs: 20,
                    seed: 17,
                })
            })
            .collect();
        let table = RocTable {
            rows,
            config: cfg.clone(),
        };
        emit_outputs(&table, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("roc.csv")).unwrap();
        assert_eq!(csv.lines().count(), 13);

        // Idempotent re-emission.
        let bytes1 = std::fs::read(dir.path().join("roc.csv")).unwrap();
        emit_outputs(&table, dir.path()).unwrap();
        let bytes2 = std::fs::read(dir.path().join("roc.csv")).unwrap();
        assert_eq!(bytes1, bytes2);

        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["rows"], 12);
        assert_eq!(manifest["config"]["rho"], 100.0);
    }

    #[test]
    fn logspace_pins_endpoints() {
        let grid = logspace(1.25, 7.5, 8);
        assert_eq!(grid.len(), 8);
        assert_eq!(grid[0], 1.25);
        assert_eq!(grid[7], 7.5);
        for w in grid.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn roc_auc_and_interpolation() {
        // Perfect detector: P_d = 1 at P_fa = 0.
        assert!((roc_auc(&[(0.0, 1.0)]) - 1.0).abs() < 1e-12);
        // Chance diagonal.
        assert!((roc_auc(&[(0.5, 0.5)]) - 0.5).abs() < 1e-12);

        let curve = [(0.2, 0.8), (0.6, 1.0)];
        assert!((roc_interpolate(&curve, 0.2) - 0.8).abs() < 1e-12);
        assert!((roc_interpolate(&curve, 0.4) - 0.9).abs() < 1e-12);
        assert!((roc_interpolate(&curve, 0.0) - 0.0).abs() < 1e-12);
        assert!((roc_interpolate(&curve, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation_catches_bad_grids() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.lambda_grid.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_scale();
        cfg.eta = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::desk_scale();
        cfg.runs = 0;
        assert!(cfg.validate().is_err());

        assert!(ExperimentConfig::desk_scale().validate().is_ok());
        assert!(ExperimentConfig::paper_scale().validate().is_ok());
    }
}
