//! `tsglasso` — conditional independence graphs of stationary time series
//! from the command line.
//!
//! Subcommands: `synth` (sample the star benchmark process), `estimate`
//! (Blackman-Tukey SDM), `solve` (ADMM sparse inverse-SDM), `select`
//! (edge thresholding), `check` (theory diagnostics), `roc` (Monte-Carlo
//! ROC experiment).
//!
//! Exit codes: 0 success, 1 usage/configuration/I-O error, 2 numerical
//! failure.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use tsglasso::analysis::{
    acf_moment, error_bound, fail_prob, h1_weight, lambda_theoretical, rho_x,
    sample_size_condition, TheoryParams,
};
use tsglasso::experiment::{emit_outputs, run_roc_with, ExperimentConfig, RocTable, SweepMode};
use tsglasso::graph::select_edges;
use tsglasso::io;
use tsglasso::solver::{solve, SolverConfig};
use tsglasso::spectrum::{acf_biased, bt_sdm, sdm_eigen_bounds, Window};
use tsglasso::synth::{sample_process, true_edges, ProcessSpec, StarSpec};
use tsglasso::CoreError;

#[derive(Parser)]
#[command(name = "tsglasso", version, about = "Graphical model selection for stationary time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the synthetic star-graph benchmark process.
    Synth(SynthArgs),
    /// Estimate the spectral density matrix from samples.
    Estimate(EstimateArgs),
    /// Solve for the sparse inverse SDM.
    Solve(SolveArgs),
    /// Threshold an inverse-SDM estimate into an edge list.
    Select(SelectArgs),
    /// Print theory diagnostics for a process description.
    Check(CheckArgs),
    /// Run the Monte-Carlo ROC experiment.
    Roc(RocArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of nodes.
    #[arg(long, default_value_t = 16)]
    p: usize,
    /// Number of hub neighbors.
    #[arg(long, default_value_t = 4)]
    s: usize,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Precision-matrix diagonal.
    #[arg(long, default_value_t = 0.5)]
    diag: f64,
    /// Hub coupling; defaults to 4/(10 s).
    #[arg(long)]
    offdiag: Option<f64>,
    /// FIR taps, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5])]
    taps: Vec<f64>,
    /// Frequency bins used for amplitude normalization.
    #[arg(long, default_value_t = 4)]
    f_bins: usize,
    /// Output samples file (.csv, or raw binary with --format bin).
    #[arg(long)]
    out: PathBuf,
    /// Samples container: csv or bin.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the full process description as JSON next to the samples.
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Samples file (CSV or raw binary, detected by content).
    #[arg(long)]
    input: PathBuf,
    /// Number of frequency bins.
    #[arg(long, default_value_t = 4)]
    f_bins: usize,
    /// Lag window: gaussian or rect:R.
    #[arg(long, default_value = "gaussian")]
    window: String,
    /// ACF lags to compute; defaults to the window support radius.
    #[arg(long)]
    max_lag: Option<usize>,
    /// Output matrix-sequence file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// SDM estimate (matrix-sequence container).
    #[arg(long)]
    input: PathBuf,
    /// Penalty weight.
    #[arg(long)]
    lambda: f64,
    /// ADMM penalty parameter.
    #[arg(long, default_value_t = 100.0)]
    rho: f64,
    /// Iteration count.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Exempt diagonal blocks from the penalty.
    #[arg(long)]
    no_diag_penalty: bool,
    /// Output estimate (matrix-sequence container).
    #[arg(long)]
    out: PathBuf,
    /// Optional per-iteration diagnostics CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Inverse-SDM estimate (matrix-sequence container).
    #[arg(long)]
    input: PathBuf,
    /// Block-norm threshold.
    #[arg(long, default_value_t = 1e-4)]
    eta: f64,
    /// Output edge list (one "i j" pair per line, 1-based).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Process description JSON (as written by synth --spec-out).
    #[arg(long)]
    spec: PathBuf,
    /// Sample count the conditions are evaluated at.
    #[arg(long)]
    n: usize,
    /// Failure probability budget.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Compatibility constant to assume.
    #[arg(long, default_value_t = 1.0)]
    phi: f64,
    /// Lag window: gaussian or rect:R.
    #[arg(long, default_value = "gaussian")]
    window: String,
}

#[derive(Args)]
struct RocArgs {
    /// Output directory for roc.csv, plot_roc.py and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Start from the full benchmark preset (p=64, 100 runs,
    /// penalties spanning [1.25, 7.5]) instead of the desk-scale one.
    #[arg(long)]
    paper_scale: bool,
    /// Key-value configuration file (TOML); CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emit the manifest, plot script and CSV header without running.
    #[arg(long)]
    dry_run: bool,

    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    diag: Option<f64>,
    #[arg(long)]
    offdiag: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    taps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long)]
    f_bins: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Monte-Carlo runs per grid point.
    #[arg(long)]
    runs: Option<usize>,
    /// Lag window: gaussian or rect:R.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Sweep mode: lambda or eta.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    no_diag_penalty: bool,
}

/// Optional keys mirroring the experiment configuration; all flat, all
/// overridable from the command line.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RocFileConfig {
    p: Option<usize>,
    s: Option<usize>,
    diag: Option<f64>,
    offdiag: Option<f64>,
    taps: Option<Vec<f64>>,
    n_values: Option<Vec<usize>>,
    f_bins: Option<usize>,
    iters: Option<usize>,
    rho: Option<f64>,
    lambda_grid: Option<Vec<f64>>,
    eta: Option<f64>,
    eta_grid: Option<Vec<f64>>,
    runs: Option<usize>,
    window: Option<String>,
    master_seed: Option<u64>,
    sweep: Option<String>,
    penalize_diagonal: Option<bool>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err
                .downcast_ref::<CoreError>()
                .is_some_and(CoreError::is_numerical);
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Select(args) => cmd_select(args),
        Command::Check(args) => cmd_check(args),
        Command::Roc(args) => cmd_roc(args),
    }
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let mut star = StarSpec::new(args.p, args.s);
    star.diag = args.diag;
    if let Some(offdiag) = args.offdiag {
        star.offdiag = offdiag;
    }
    let spec = ProcessSpec::new(star, args.taps, args.seed, args.f_bins)?;
    let samples = sample_process(&spec, args.n)?;
    match args.format.as_str() {
        "csv" => io::write_samples_csv(&args.out, &samples)?,
        "bin" => io::write_samples_bin(&args.out, &samples)?,
        other => bail!("unknown samples format '{other}' (expected csv or bin)"),
    }
    if let Some(spec_out) = args.spec_out {
        let mut file = BufWriter::new(File::create(&spec_out)?);
        serde_json::to_writer_pretty(&mut file, &spec)?;
        file.write_all(b"\n")?;
    }
    eprintln!(
        "wrote {} samples of dimension {} to {}",
        samples.n_samples(),
        samples.dim(),
        args.out.display()
    );
    Ok(())
}

/// Reads samples from CSV or the raw binary container, sniffing the
/// binary magic.
fn read_samples_any(path: &Path) -> anyhow::Result<tsglasso::SampleMatrix> {
    let mut head = [0u8; 8];
    let mut file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let n = file.read(&mut head)?;
    drop(file);
    if n == 8 && &head == b"TSGLSMP1" {
        Ok(io::read_samples_bin(path)?)
    } else {
        Ok(io::read_samples_csv(path)?)
    }
}

fn cmd_estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let samples = read_samples_any(&args.input)?;
    let window = Window::parse(&args.window)?;
    let max_lag = args.max_lag.unwrap_or_else(|| window.radius());
    let acf = acf_biased(&samples, max_lag)?;
    let sdm = bt_sdm(&acf, &window, args.f_bins)?;
    io::write_matrix_sequence(&args.out, &sdm)?;
    eprintln!(
        "estimated SDM: {} bins, dimension {}, written to {}",
        sdm.f_len(),
        sdm.dim(),
        args.out.display()
    );
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let s_hat = io::read_matrix_sequence(&args.input)?;
    let cfg = SolverConfig {
        lambda: args.lambda,
        rho: args.rho,
        iters: args.iters,
        penalize_diagonal: !args.no_diag_penalty,
        record_diagnostics: args.diagnostics.is_some(),
        early_stop_tol: None,
    };
    let result = solve(&s_hat, &cfg)?;
    io::write_matrix_sequence(&args.out, result.estimate())?;
    if let Some(diag_path) = args.diagnostics {
        io::write_diagnostics_csv(&diag_path, &result)?;
    }
    eprintln!(
        "solved {} iterations at lambda = {}, estimate written to {}",
        args.iters,
        args.lambda,
        args.out.display()
    );
    Ok(())
}

fn cmd_select(args: SelectArgs) -> anyhow::Result<()> {
    let eta_ok = args.eta > 0.0; // false for NaN too
    if !eta_ok {
        bail!("--eta must be positive");
    }
    let k_hat = io::read_matrix_sequence(&args.input)?;
    let edges = select_edges(&k_hat, args.eta);
    io::write_edge_set(&args.out, &edges)?;
    eprintln!("{} edges at eta = {}", edges.len(), args.eta);
    Ok(())
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("read {}", args.spec.display()))?;
    let spec: ProcessSpec = serde_json::from_str(&text)?;
    let window = Window::parse(&args.window)?;

    let (s_true, k_true) = spec.true_sdm(spec.f_bins)?;
    let (l_obs, u_obs) = sdm_eigen_bounds(&s_true);
    let edges = true_edges(&spec.star);
    let coherence = rho_x(&k_true, &edges)?;

    let tp = TheoryParams {
        u_bound: u_obs.max(1.0),
        s: edges.len(),
        phi: args.phi,
        rho_min: coherence,
        delta: args.delta,
    };
    tp.validate()?;
    let lambda = lambda_theoretical(&tp);
    let bound = error_bound(&tp, lambda);
    let lags = spec.analytic_acf()?;
    let moment = acf_moment(&lags, h1_weight(&window, args.n));
    let report = sample_size_condition(&tp, args.n, &window, spec.star.p, Some(moment))?;

    println!("process: p={} s={} diag={} offdiag={} taps={:?} scale={:.6} f_bins={}",
        spec.star.p, spec.star.n_neighbors, spec.star.diag, spec.star.offdiag, spec.taps,
        spec.scale, spec.f_bins);
    println!("eigenvalue bounds on grid:  L_obs = {l_obs:.9}  U_obs = {u_obs:.6}");
    println!("rho_x (min partial spectral coherence) = {coherence:.6}");
    println!("assumed: phi = {}, delta = {}, N = {}", args.phi, args.delta, args.n);
    println!("lambda_theoretical = {lambda:.6e}");
    println!("error bound at that lambda = {bound:.6e}  (= rho_x / 2)");
    let moment_flag = if report.moment_holds == Some(true) { "PASS" } else { "FAIL" };
    println!(
        "smoothness: mu_h1 = {:.6e}  <=  {:.6e}  -> {moment_flag}",
        moment, report.moment_rhs
    );
    let n_flag = if report.holds { "PASS" } else { "FAIL" };
    println!(
        "sample size: N = {}  >=  {:.6e}  -> {n_flag}",
        report.n, report.rhs
    );
    let nu = lambda / 2.0 - moment;
    if nu > 0.0 {
        println!(
            "tail diagnostic at nu = lambda/2 - mu_h1 = {:.3e}: fail_prob = {:.6e}",
            nu,
            fail_prob(nu, args.n, window.l1_norm(), tp.u_bound, spec.star.p)
        );
    } else {
        println!("tail diagnostic skipped: lambda/2 <= mu_h1 (window bias dominates)");
    }
    Ok(())
}

fn apply_file_config(cfg: &mut ExperimentConfig, file: RocFileConfig) -> anyhow::Result<()> {
    if let Some(p) = file.p {
        cfg.star.p = p;
    }
    if let Some(s) = file.s {
        cfg.star.n_neighbors = s;
        cfg.star.offdiag = 0.4 / s as f64;
    }
    if let Some(diag) = file.diag {
        cfg.star.diag = diag;
    }
    if let Some(offdiag) = file.offdiag {
        cfg.star.offdiag = offdiag;
    }
    if let Some(taps) = file.taps {
        cfg.taps = taps;
    }
    if let Some(n_values) = file.n_values {
        cfg.n_values = n_values;
    }
    if let Some(f_bins) = file.f_bins {
        cfg.f_bins = f_bins;
    }
    if let Some(iters) = file.iters {
        cfg.iters = iters;
    }
    if let Some(rho) = file.rho {
        cfg.rho = rho;
    }
    if let Some(grid) = file.lambda_grid {
        cfg.lambda_grid = grid;
    }
    if let Some(eta) = file.eta {
        cfg.eta = eta;
    }
    if let Some(grid) = file.eta_grid {
        cfg.eta_grid = grid;
    }
    if let Some(runs) = file.runs {
        cfg.runs = runs;
    }
    if let Some(window) = file.window {
        cfg.window = Window::parse(&window)?;
    }
    if let Some(seed) = file.master_seed {
        cfg.master_seed = seed;
    }
    if let Some(sweep) = file.sweep {
        cfg.sweep = parse_sweep(&sweep)?;
    }
    if let Some(pen) = file.penalize_diagonal {
        cfg.penalize_diagonal = pen;
    }
    Ok(())
}

fn parse_sweep(text: &str) -> anyhow::Result<SweepMode> {
    match text {
        "lambda" => Ok(SweepMode::Lambda),
        "eta" => Ok(SweepMode::Eta),
        other => bail!("unknown sweep mode '{other}' (expected lambda or eta)"),
    }
}

fn cmd_roc(args: RocArgs) -> anyhow::Result<()> {
    let mut cfg = if args.paper_scale {
        ExperimentConfig::paper_scale()
    } else {
        ExperimentConfig::desk_scale()
    };

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("read {}", path.display()))?;
        let file: RocFileConfig = toml::from_str(&text)?;
        apply_file_config(&mut cfg, file)?;
    }

    // CLI flags take precedence over the file.
    if let Some(p) = args.p {
        cfg.star.p = p;
    }
    if let Some(s) = args.s {
        cfg.star.n_neighbors = s;
        cfg.star.offdiag = 0.4 / s as f64;
    }
    if let Some(diag) = args.diag {
        cfg.star.diag = diag;
    }
    if let Some(offdiag) = args.offdiag {
        cfg.star.offdiag = offdiag;
    }
    if let Some(taps) = args.taps {
        cfg.taps = taps;
    }
    if let Some(n_values) = args.n_values {
        cfg.n_values = n_values;
    }
    if let Some(f_bins) = args.f_bins {
        cfg.f_bins = f_bins;
    }
    if let Some(iters) = args.iters {
        cfg.iters = iters;
    }
    if let Some(rho) = args.rho {
        cfg.rho = rho;
    }
    if let Some(grid) = args.lambda_grid {
        cfg.lambda_grid = grid;
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    if let Some(grid) = args.eta_grid {
        cfg.eta_grid = grid;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(window) = &args.window {
        cfg.window = Window::parse(window)?;
    }
    if let Some(seed) = args.master_seed {
        cfg.master_seed = seed;
    }
    if let Some(sweep) = &args.sweep {
        cfg.sweep = parse_sweep(sweep)?;
    }
    if args.no_diag_penalty {
        cfg.penalize_diagonal = false;
    }
    cfg.validate()?;

    std::fs::create_dir_all(&args.out_dir)?;
    if args.dry_run {
        let table = RocTable {
            rows: vec![],
            config: cfg,
        };
        let files = emit_outputs(&table, &args.out_dir)?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
        return Ok(());
    }

    // Stream rows as they complete so an interrupted run leaves a usable
    // prefix; the final emit rewrites the identical bytes plus manifest
    // and plot script.
    let csv_path = args.out_dir.join("roc.csv");
    let mut stream = BufWriter::new(File::create(&csv_path)?);
    writeln!(stream, "N,sweep_value,P_d,P_fa,M")?;
    let table = run_roc_with(&cfg, |row| {
        let _ = writeln!(
            stream,
            "{},{},{},{},{}",
            row.n, row.sweep_value, row.p_d, row.p_fa, row.runs
        );
        let _ = stream.flush();
    })?;
    drop(stream);

    let files = emit_outputs(&table, &args.out_dir)?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}
