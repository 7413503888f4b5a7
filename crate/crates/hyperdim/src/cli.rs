//! `hyperdim` subcommands.
//!
//! Every command produces one JSON document (stdout, or `--out`), optional CSV
//! side files next to `--out`, and diagnostics on stderr. Exit codes: 0 ok,
//! 1 output could not be written, 2 invalid configuration, 3 cap exceeded,
//! 4 inconclusive classification under `--require-verdict`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperdim_core::dimension::{
    bound_report, classify, expansion_rate, geometric_scales, horseshoe_for_target_dimension, invariant_set_points,
    minkowski_content_curve, proof_rho_schedule, srb_equivalence_report, BoundReport, Classification,
    DimensionEstimate, MinkowskiSample, DEFAULT_RATE_K_MAX,
};
use hyperdim_core::linalg::{PERRON_MAX_ITER, PERRON_TOLERANCE};
use hyperdim_core::models::{build_linear_horseshoe, CylinderGeometry, ModelKind, ModelSystem, PotentialLabel};
use hyperdim_core::pressure::{
    default_epsilon, pressure_from_partition_sums, pressure_from_spectrum, pressure_from_volume_growth, KWindow,
    PointCloud, PressureEstimate,
};
use hyperdim_core::symbolic::{default_delta, pressure_spectral};
use hyperdim_core::{Error, ESTIMATOR_TOLERANCE, EXACT_TOLERANCE, GRID_CELL_CAP, WORD_CAP_LOG2};
use serde::Serialize;
use serde_json::{json, Value};

use crate::csv;
use crate::io::{sibling, write_all_atomic};
use crate::model_file::load_model;
use crate::model_spec::{parse_model, DEFAULT_LAMBDA_S};
use crate::parallel::{self, Pool};

/// Stable-set sampling defaults.
pub const STABLE_EPSILON: f64 = 0.1;
pub const STABLE_DEPTH: usize = 10;
pub const STABLE_GRID: usize = 2048;
pub const STABLE_SCALES: &str = "2^-2..2^-9";
pub const SET_SCALES: &str = "2^-2..2^-10";

#[derive(Debug, Parser, Serialize)]
#[command(name = "hyperdim", version, about = "Pressure, expansion rate and dimension bounds for hyperbolic model systems")]
pub struct Cli {
    /// Seed for sampled computations; all current samplers are deterministic grids.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid sweeps; results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Write the JSON document here (CSV side files go next to it).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Exit with status 4 when the classification is inconclusive.
    #[arg(long, global = true)]
    pub require_verdict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Topological pressure by the spectral oracle or an estimator.
    Pressure(PressureArgs),
    /// Dimension bound n + P/s and attractor classification.
    Bound(BoundArgs),
    /// Box-counting dimension of a sampled set.
    Dimension(DimensionArgs),
    /// Bound, dimension and classification in one document; sweeps.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Built-in model: horseshoe[:lu[,ls]], doubling[:d], cantor[:slope,digits], catmap, golden.
    #[arg(long, conflicts_with = "model_file")]
    pub model: Option<String>,
    /// JSON model file.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialArg {
    PhiU,
    PhiS,
    Phi,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Spectral,
    Partition,
    Volume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetArg {
    Invariant,
    Stable,
    Repeller,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimatorArgs {
    /// Estimator method.
    #[arg(long, value_enum, default_value_t = MethodArg::Spectral)]
    pub method: MethodArg,
    /// Neighbourhood radius for the volume estimator.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest k (partition default 12, volume default 10).
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Smallest k of the volume window.
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,
    /// Grid cells per axis for the volume estimator.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Separation for partition sums (default half the branch separation).
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PressureArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Potential (default: the unstable one).
    #[arg(long, value_enum)]
    pub potential: Option<PotentialArg>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Add the attractor/SRB equivalence checks (spectral pressure).
    #[arg(long)]
    pub check_srb: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SetArgs {
    /// Which set to sample.
    #[arg(long, value_enum)]
    pub set: Option<SetArg>,
    /// Scales as `b^-i..b^-j` or a comma list.
    #[arg(long)]
    pub scales: Option<String>,
    /// Cylinder depth (invariant/repeller) or iterate count (stable).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Stable-set radius.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stable-set grid cells per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also emit the Minkowski-content curve at exponent t.
    #[arg(long)]
    pub minkowski: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub set: SetArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Horseshoe sweep `lambda_u=lo:hi:step`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Synthesize a horseshoe with this stable-set dimension.
    #[arg(long)]
    pub target_dim: Option<f64>,
    /// Emit (x, y) plot columns.
    #[arg(long)]
    pub plot_data: bool,
    #[command(flatten)]
    pub set: SetArgs,
}

// ---------------------------------------------------------------------------
// Failures and outcomes
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Cap(String),
    Output(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Output(_) => 1,
            Failure::Config(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Cap(m) | Failure::Output(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded(_) => Failure::Cap(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Result of one invocation, before anything touches the terminal.
#[derive(Debug, Default)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Outcome {
    result: Value,
    files: Vec<(&'static str, String)>,
    summary: String,
    verdict: Option<Classification>,
}

/// Parse and run; never exits the process.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => Execution { code: e.exit_code(), stdout: String::new(), stderr: e.render().to_string() },
    }
}

pub fn run(cli: &Cli) -> Execution {
    let pool = Pool::new(cli.threads);
    let outcome = match &cli.command {
        Command::Pressure(a) => cmd_pressure(&pool, a),
        Command::Bound(a) => cmd_bound(&pool, a),
        Command::Dimension(a) => cmd_dimension(&pool, a),
        Command::Report(a) => cmd_report(&pool, a),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(f) => {
            return Execution { code: f.code(), stdout: String::new(), stderr: format!("error: {}\n", f.message()) }
        }
    };
    let doc = document(cli, outcome.result);
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    let mut exec = Execution { code: 0, stdout: String::new(), stderr: outcome.summary };
    if let Some(out) = &cli.out {
        let mut files = vec![(out.clone(), text.into_bytes())];
        for (suffix, body) in outcome.files {
            files.push((sibling(out, suffix), body.into_bytes()));
        }
        if let Err(e) = write_all_atomic(&files) {
            exec.code = 1;
            exec.stderr.push_str(&format!("error: cannot write output: {e}\n"));
            return exec;
        }
    } else {
        exec.stdout = text;
    }
    if cli.require_verdict && outcome.verdict == Some(Classification::Inconclusive) {
        exec.code = 4;
        exec.stderr.push_str("classification inconclusive\n");
    }
    exec
}

fn document(cli: &Cli, result: Value) -> Value {
    json!({
        "tool": "hyperdim",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
        "tolerances": {
            "exact": EXACT_TOLERANCE,
            "estimator": ESTIMATOR_TOLERANCE,
            "perron": PERRON_TOLERANCE,
        },
        "caps": {
            "word_log2": WORD_CAP_LOG2,
            "grid_cells": GRID_CELL_CAP,
            "perron_iterations": PERRON_MAX_ITER,
        },
        "result": result,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn load(m: &ModelArgs) -> Result<ModelSystem, Failure> {
    match (&m.model, &m.model_file) {
        (Some(s), None) => parse_model(s).map_err(|e| config(e.to_string())),
        (None, Some(p)) => load_model(p).map_err(|e| config(e.to_string())),
        (None, None) => Err(config("one of --model or --model-file is required")),
        (Some(_), Some(_)) => Err(config("--model and --model-file are exclusive")),
    }
}

fn potential_of(model: &ModelSystem, p: Option<PotentialArg>) -> Result<hyperdim_core::models::Potential, Failure> {
    let label = match p {
        None => return Ok(model.unstable_potential()),
        Some(PotentialArg::Zero) => return Ok(hyperdim_core::models::Potential::zero(model.symbols())),
        Some(PotentialArg::PhiU) => PotentialLabel::PhiU,
        Some(PotentialArg::PhiS) => PotentialLabel::PhiS,
        Some(PotentialArg::Phi) => PotentialLabel::Phi,
    };
    Ok(model.potential(label)?)
}

fn default_grid(model: &ModelSystem) -> usize {
    match model.dim() {
        1 => 4096,
        2 => 1024,
        _ => 64,
    }
}

/// Pressure estimate by the chosen method, with the tolerance that goes with it.
fn estimate(
    pool: &Pool,
    model: &ModelSystem,
    potential: &hyperdim_core::models::Potential,
    args: &EstimatorArgs,
    unstable: bool,
) -> Result<(PressureEstimate, f64, Option<String>), Failure> {
    match args.method {
        MethodArg::Spectral => Ok((pressure_from_spectrum(model, potential)?, EXACT_TOLERANCE, None)),
        MethodArg::Partition => {
            let k_max = args.kmax.unwrap_or(12);
            let delta = args.delta.unwrap_or_else(|| default_delta(model));
            let e = pressure_from_partition_sums(model, potential, k_max, delta)?;
            let csv = csv::partition_curve(&e.raw);
            Ok((e, EXACT_TOLERANCE, Some(csv)))
        }
        MethodArg::Volume => {
            if !unstable {
                return Err(config("the volume estimator measures the unstable potential only"));
            }
            let eps = args.eps.unwrap_or_else(|| default_epsilon(model));
            let k_max = args.kmax.unwrap_or(10);
            let grid = args.grid.unwrap_or_else(|| default_grid(model));
            if args.kmin == 0 || args.kmin > k_max {
                return Err(config(format!("k window {}..{k_max} is empty", args.kmin)));
            }
            let curve = parallel::volume_curve(pool, model, eps, k_max, grid)?;
            let e = pressure_from_volume_growth(&curve, KWindow { lo: args.kmin, hi: k_max })?;
            Ok((e, ESTIMATOR_TOLERANCE, Some(csv::volume_curve(&curve))))
        }
    }
}

/// `b^-i..b^-j` or `s1,s2,...`.
pub fn parse_scales(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || config(format!("cannot parse scales `{s}` (expected b^-i..b^-j or a comma list)"));
    if let Some((a, b)) = s.split_once("..") {
        let side = |t: &str| -> Result<(f64, i32), Failure> {
            let (base, exp) = t.trim().split_once('^').ok_or_else(bad)?;
            let base: f64 = base.trim().parse().map_err(|_| bad())?;
            let exp: i32 = exp.trim().parse().map_err(|_| bad())?;
            Ok((base, exp))
        };
        let (b1, e1) = side(a)?;
        let (b2, e2) = side(b)?;
        if b1 != b2 || !(b1 > 1.0) || e1 >= 0 || e2 >= 0 {
            return Err(bad());
        }
        let (lo, hi) = ((-e1).min(-e2), (-e1).max(-e2));
        Ok(geometric_scales(b1, lo, hi))
    } else {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
struct SetSample {
    set: SetArg,
    points: usize,
    /// Cylinder depth or iterate count.
    depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
}

/// Per-step contraction of cylinder boxes, used to pick a depth that
/// resolves the finest scale.
fn box_contraction(model: &ModelSystem) -> f64 {
    let mut rate = 0.0f64;
    for b in &model.branches {
        for c in 0..model.dim() {
            let l = b.linear[(c, c)].abs();
            rate = rate.max(if l > 1.0 { 1.0 / l } else { l });
        }
    }
    rate
}

fn sample_set(
    pool: &Pool,
    model: &ModelSystem,
    args: &SetArgs,
    min_scale: f64,
) -> Result<(PointCloud, SetSample), Failure> {
    let set = args.set.unwrap_or(match model.kind {
        ModelKind::Expanding => SetArg::Repeller,
        ModelKind::Diffeomorphism => SetArg::Invariant,
    });
    match set {
        SetArg::Stable => {
            if model.kind != ModelKind::Diffeomorphism {
                return Err(config("--set stable needs a diffeomorphism; use --set repeller"));
            }
            let eps = args.eps.unwrap_or(STABLE_EPSILON);
            let depth = args.depth.unwrap_or(STABLE_DEPTH);
            let grid = args.grid.unwrap_or(STABLE_GRID);
            let cloud = parallel::sample_local_stable_set(pool, model, eps, depth, grid)?;
            let n = cloud.len();
            Ok((cloud, SetSample { set, points: n, depth, epsilon: Some(eps), grid: Some(grid) }))
        }
        SetArg::Invariant | SetArg::Repeller => {
            if set == SetArg::Repeller && model.kind != ModelKind::Expanding {
                return Err(config("--set repeller needs an expanding map; use --set invariant"));
            }
            if set == SetArg::Invariant && model.kind != ModelKind::Diffeomorphism {
                return Err(config("--set invariant needs a diffeomorphism; use --set repeller"));
            }
            let depth = match args.depth {
                Some(d) => d,
                None if model.cylinder_geometry()? == CylinderGeometry::Full => {
                    ((1.0 / min_scale).log2().ceil() as usize) + 1
                }
                None => {
                    let rate = box_contraction(model);
                    if !(rate > 0.0 && rate < 1.0) {
                        return Err(config("cannot choose a cylinder depth for this model; pass --depth"));
                    }
                    ((min_scale / 4.0).ln() / rate.ln()).ceil().max(1.0) as usize
                }
            };
            let cloud = invariant_set_points(model, depth)?;
            let n = cloud.len();
            Ok((cloud, SetSample { set, points: n, depth, epsilon: None, grid: None }))
        }
    }
}

/// Minkowski curve with the `r_k` schedule, truncated where the grid stops
/// resolving `rho`.
fn minkowski(model: &ModelSystem, cloud: &PointCloud, t: f64, eps: f64, grid: usize) -> Result<Vec<MinkowskiSample>, Failure> {
    let s = expansion_rate(model, DEFAULT_RATE_K_MAX.min(4))?.value;
    let h = 1.0 / grid as f64;
    let rhos: Vec<f64> = proof_rho_schedule(eps, s, 64).into_iter().take_while(|&r| h <= r / 4.0).collect();
    if rhos.is_empty() {
        return Err(config("grid too coarse for any rho in the schedule"));
    }
    Ok(minkowski_content_curve(cloud, t, &rhos, grid)?)
}

fn dimension_of(
    pool: &Pool,
    model: &ModelSystem,
    args: &SetArgs,
) -> Result<(DimensionEstimate, SetSample, Option<Vec<MinkowskiSample>>, PointCloud), Failure> {
    let stable = args.set == Some(SetArg::Stable);
    let scales = parse_scales(args.scales.as_deref().unwrap_or(if stable { STABLE_SCALES } else { SET_SCALES }))?;
    let min_scale = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_scale > 0.0) || scales.iter().any(|&s| s > 1.0) {
        return Err(config("scales must lie in (0, 1]"));
    }
    let (cloud, sample) = sample_set(pool, model, args, min_scale)?;
    if cloud.is_empty() {
        return Err(config("sampled set is empty"));
    }
    let est = parallel::cloud_dimension(pool, &cloud, &scales)?;
    let mink = match args.minkowski {
        Some(t) => {
            let eps = args.eps.unwrap_or(if stable { STABLE_EPSILON } else { default_epsilon(model) });
            Some(minkowski(model, &cloud, t, eps, args.grid.unwrap_or(STABLE_GRID))?)
        }
        None => None,
    };
    Ok((est, sample, mink, cloud))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_pressure(pool: &Pool, a: &PressureArgs) -> Result<Outcome, Failure> {
    let model = load(&a.model)?;
    let unstable = matches!(
        (a.potential, model.kind),
        (None, _) | (Some(PotentialArg::PhiU), ModelKind::Diffeomorphism) | (Some(PotentialArg::Phi), ModelKind::Expanding)
    );
    let potential = potential_of(&model, a.potential)?;
    let (est, tol, curve) = estimate(pool, &model, &potential, &a.estimator, unstable)?;
    let classification = unstable.then(|| classify(&est, tol));
    let summary = format!(
        "{}: P({}) = {} [{:?}, residual {}]\n",
        model.name,
        potential.label.as_str(),
        est.value,
        est.method,
        est.residual
    );
    let result = json!({
        "model": model.name,
        "potential": potential.label,
        "estimate": to_value(&est),
        "tolerance": tol,
        "classification": classification,
    });
    Ok(Outcome {
        result,
        files: curve.map(|c| vec![("curve.csv", c)]).unwrap_or_default(),
        summary,
        verdict: classification,
    })
}

fn cmd_bound(pool: &Pool, a: &BoundArgs) -> Result<Outcome, Failure> {
    let model = load(&a.model)?;
    let report = if a.check_srb {
        if a.estimator.method != MethodArg::Spectral {
            return Err(config("--check-srb uses the spectral pressure; drop --method"));
        }
        srb_equivalence_report(&model)?
    } else {
        let potential = model.unstable_potential();
        let (est, tol, _) = estimate(pool, &model, &potential, &a.estimator, true)?;
        bound_report(&model, est, tol, DEFAULT_RATE_K_MAX)?
    };
    let summary = bound_summary(&report);
    Ok(Outcome { verdict: Some(report.classification), result: to_value(&report), files: Vec::new(), summary })
}

fn bound_summary(r: &BoundReport) -> String {
    let mut s = format!(
        "{}: n = {}, P = {}, s = {}, bound = {}, {:?} (tolerance {})\n",
        r.model, r.n, r.pressure.value, r.s.value, r.bound, r.classification, r.tolerance
    );
    for c in &r.checks {
        let _ = writeln!(s, "  [{:?}] {}: {}", c.verdict, c.claim, c.detail);
    }
    s
}

fn cmd_dimension(pool: &Pool, a: &DimensionArgs) -> Result<Outcome, Failure> {
    let model = load(&a.model)?;
    let (est, sample, mink, _) = dimension_of(pool, &model, &a.set)?;
    let mut files = vec![("dimension.csv", csv::dimension(&est))];
    if let Some(m) = &mink {
        files.push(("minkowski.csv", csv::minkowski(m)));
    }
    let summary = format!(
        "{}: {:?} set, {} points, box dimension {} (residual {})\n",
        model.name, sample.set, sample.points, est.slope, est.residual
    );
    let result = json!({
        "model": model.name,
        "sample": to_value(&sample),
        "estimate": to_value(&est),
        "minkowski": mink.as_ref().map(to_value),
    });
    Ok(Outcome { result, files, summary, verdict: None })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    lambda_u: f64,
    pressure: f64,
    s: f64,
    bound: f64,
    measured: f64,
    residual: f64,
    classification: Classification,
}

fn parse_sweep(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || config(format!("cannot parse sweep `{s}` (expected lambda_u=lo:hi:step)"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    if name.trim() != "lambda_u" {
        return Err(config(format!("only lambda_u sweeps are supported, got `{name}`")));
    }
    let parts: Vec<f64> = range.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || hi < lo {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000 {
        return Err(Failure::Cap(format!("sweep of {n} rows exceeds 10000")));
    }
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Bound row with the measured stable-set dimension.
fn horseshoe_row(pool: &Pool, model: &ModelSystem, set: &SetArgs) -> Result<SweepRow, Failure> {
    let p = pressure_spectral(model, &model.unstable_potential())?;
    let report = bound_report(model, PressureEstimate::spectral(p), EXACT_TOLERANCE, DEFAULT_RATE_K_MAX)?;
    let stable = SetArgs { set: Some(SetArg::Stable), minkowski: None, ..set.clone() };
    let (est, _, _, _) = dimension_of(pool, model, &stable)?;
    Ok(SweepRow {
        lambda_u: model.lambda_u[0],
        pressure: p,
        s: report.s.value,
        bound: report.bound,
        measured: est.slope,
        residual: est.residual,
        classification: report.classification,
    })
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>10} {:>12} {:>10} {:>10} {:>10}\n", "lambda_u", "P(phi_u)", "s", "bound", "measured");
    for r in rows {
        let _ = writeln!(s, "{:>10.4} {:>12.6} {:>10.6} {:>10.6} {:>10.4}", r.lambda_u, r.pressure, r.s, r.bound, r.measured);
    }
    s
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut t = csv::Table::new(&["lambda_u", "pressure", "s", "bound", "measured", "residual"]);
    for r in rows {
        t.row(&[
            csv::Cell::F(r.lambda_u),
            csv::Cell::F(r.pressure),
            csv::Cell::F(r.s),
            csv::Cell::F(r.bound),
            csv::Cell::F(r.measured),
            csv::Cell::F(r.residual),
        ]);
    }
    t.finish()
}

fn xy_csv(x: &str, y: &str, pts: &[(f64, f64)]) -> String {
    let mut t = csv::Table::new(&[x, y]);
    for &(a, b) in pts {
        t.row(&[csv::Cell::F(a), csv::Cell::F(b)]);
    }
    t.finish()
}

impl Clone for SetArgs {
    fn clone(&self) -> Self {
        Self {
            set: self.set,
            scales: self.scales.clone(),
            depth: self.depth,
            eps: self.eps,
            grid: self.grid,
            minkowski: self.minkowski,
        }
    }
}

fn cmd_report(pool: &Pool, a: &ReportArgs) -> Result<Outcome, Failure> {
    if a.sweep.is_some() && a.target_dim.is_some() {
        return Err(config("--sweep and --target-dim are exclusive"));
    }
    let lambda_s = || -> Result<f64, Failure> {
        match (&a.model.model, &a.model.model_file) {
            (None, None) => Ok(DEFAULT_LAMBDA_S),
            (Some(_), None) => {
                let m = load(&a.model)?;
                if !m.name.starts_with("horseshoe") {
                    return Err(config("--sweep and --target-dim need a horseshoe model"));
                }
                Ok(m.lambda_s[0])
            }
            _ => Err(config("--sweep and --target-dim need a built-in horseshoe")),
        }
    };

    if let Some(spec) = &a.sweep {
        let ls = lambda_s()?;
        let mut rows = Vec::new();
        for lu in parse_sweep(spec)? {
            let model = build_linear_horseshoe(lu, ls)?;
            rows.push(horseshoe_row(pool, &model, &a.set)?);
        }
        let mut files = vec![("sweep.csv", sweep_csv(&rows))];
        let plot: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda_u, r.measured)).collect();
        let bound_plot: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda_u, r.bound)).collect();
        let mut result = json!({ "kind": "sweep", "lambda_s": ls, "rows": to_value(&rows) });
        if a.plot_data {
            files.push(("plot.measured.csv", xy_csv("lambda_u", "measured", &plot)));
            files.push(("plot.bound.csv", xy_csv("lambda_u", "bound", &bound_plot)));
            result["plot_data"] = json!({ "measured": plot, "bound": bound_plot });
        }
        return Ok(Outcome { result, files, summary: sweep_table(&rows), verdict: None });
    }

    if let Some(target) = a.target_dim {
        let ls = lambda_s()?;
        let model = if ls == DEFAULT_LAMBDA_S {
            horseshoe_for_target_dimension(target)?
        } else {
            let base = horseshoe_for_target_dimension(target)?;
            build_linear_horseshoe(base.lambda_u[0], ls)?
        };
        let row = horseshoe_row(pool, &model, &a.set)?;
        let verified = (row.bound - target).abs() <= 1e-12;
        let summary = format!(
            "target {target}: lambda_u = {}, bound = {} ({}), measured stable-set dimension {}\n",
            row.lambda_u,
            row.bound,
            if verified { "verified" } else { "MISMATCH" },
            row.measured
        );
        let mut files = vec![("sweep.csv", sweep_csv(std::slice::from_ref(&row)))];
        let mut result = json!({
            "kind": "target_dimension",
            "target": target,
            "model": model.name,
            "row": to_value(&row),
            "bound_matches_target": verified,
        });
        if a.plot_data {
            let pts = [(target, row.measured)];
            files.push(("plot.csv", xy_csv("target", "measured", &pts)));
            result["plot_data"] = json!({ "target_vs_measured": pts });
        }
        return Ok(Outcome { result, files, summary, verdict: Some(row.classification) });
    }

    let model = load(&a.model)?;
    let report = srb_equivalence_report(&model)?;
    let (est, sample, mink, _) = dimension_of(pool, &model, &a.set)?;
    let mut summary = bound_summary(&report);
    let _ = writeln!(
        summary,
        "  box dimension of {:?} set: {} (residual {}, {} points)",
        sample.set, est.slope, est.residual, sample.points
    );
    let mut files = vec![("dimension.csv", csv::dimension(&est))];
    if let Some(m) = &mink {
        files.push(("minkowski.csv", csv::minkowski(m)));
    }
    let mut result = json!({
        "kind": "model",
        "bound": to_value(&report),
        "dimension": { "sample": to_value(&sample), "estimate": to_value(&est) },
        "minkowski": mink.as_ref().map(to_value),
    });
    if a.plot_data {
        let pts: Vec<(f64, f64)> =
            est.scales.iter().zip(&est.counts).map(|(s, c)| (-s.ln(), (*c as f64).ln())).collect();
        files.push(("plot.csv", xy_csv("log_inv_scale", "log_count", &pts)));
        result["plot_data"] = json!({ "log_inv_scale_vs_log_count": pts });
    }
    Ok(Outcome { result, files, summary, verdict: Some(report.classification) })
}
