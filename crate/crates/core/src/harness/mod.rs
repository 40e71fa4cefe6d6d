//! Seeded Monte Carlo experiments.
//!
//! Every trial draws its points and weights from streams derived from
//! `(master_seed, trial)` alone, trials run on a rayon pool, and results are
//! collected in trial order, so the CSV output does not depend on the worker
//! count. Construction failures are recorded as data; violated deterministic
//! properties abort the experiment with [`HarnessError::Invariant`].

mod config;
mod records;
mod stats;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use config::{
    ExperimentConfig, GammaSource, LnRule, ModeKind, RadiusRule, DEFAULT_LN_MULT, DEFAULT_STAR_LENGTH,
};
pub use records::{
    csv_string, write_csv, DistanceRecord, LengthRecord, RecordKind, RggRecord, TrialRecord, WeightRecord,
};
pub use stats::{quantile, summarize, wilson_interval, Frequency, NumericSummary, SummaryStats, Z95};

use crate::bounds::{self, BoundsError};
use crate::geometry::{sample_points, DensitySpec, GeometryError, PointSet};
use crate::graphs::{build_gloc, build_rgg, check_distance_events, DetGraph, GLocGraph, GraphError};
use crate::relay::{build_relay_rgg, length_bounds, lower_bound_holds, RelayError};
use crate::streams::{stream_seed, trial_rng, StreamTag};
use crate::weights::{assign_weights, build_max_weight_relay_rgg, WeightError};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RELAY_RGG_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("summary over records of different kinds")]
    MixedRecords,
    #[error("trial {trial}: invariant violated: {message}")]
    Invariant { trial: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, HarnessError::Invariant { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub kind: RecordKind,
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
    /// Bound values and other experiment-specific diagnostics.
    pub extra: serde_json::Value,
    pub warnings: Vec<String>,
    /// Wall time of the run; kept out of every artifact.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl ExperimentOutput {
    pub fn csv(&self) -> Result<String, HarnessError> {
        csv_string(self.kind, &self.records)
    }
}

/// Worker count: the configured cap, else the environment variable, else all
/// cores.
pub fn worker_count(config: &ExperimentConfig) -> usize {
    config
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()))
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn run_trials<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> Result<T, HarnessError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..config.trials).into_par_iter().map(&f).collect())
}

/// Points of one trial: the fixed override or a fresh sample.
pub fn trial_points(config: &ExperimentConfig, density: &DensitySpec, trial: usize) -> Result<PointSet, HarnessError> {
    if let Some(points) = &config.fixed_points {
        return Ok(PointSet::new(points.clone()));
    }
    let mut rng = trial_rng(config.master_seed, trial as u64, StreamTag::Points);
    Ok(sample_points(config.n, density, &mut rng)?)
}

fn trial_gloc(config: &ExperimentConfig, density: &DensitySpec, gamma: &DetGraph, trial: usize) -> Result<GLocGraph, HarnessError> {
    let points = trial_points(config, density, trial)?;
    Ok(build_gloc(build_rgg(points, config.r_n())?, gamma.clone())?)
}

fn effective_n(config: &ExperimentConfig) -> usize {
    config.fixed_points.as_ref().map_or(config.n, Vec::len)
}

fn prepare(config: &ExperimentConfig) -> Result<(DetGraph, DensitySpec, Vec<String>), HarnessError> {
    config.validate()?;
    let gamma = config.gamma.load()?;
    let density = config.density()?;
    let warnings = config.regime_warnings(&gamma);
    Ok((gamma, density, warnings))
}

fn finish(
    experiment: &str,
    kind: RecordKind,
    records: Vec<TrialRecord>,
    extra: serde_json::Value,
    warnings: Vec<String>,
    start: Instant,
) -> Result<ExperimentOutput, HarnessError> {
    let summary = summarize(&records)?;
    Ok(ExperimentOutput {
        experiment: experiment.to_string(),
        kind,
        records,
        summary,
        extra,
        warnings,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Relay distance between the endpoints of backbone edge 0 and the events
/// `E_uv(eps)`, `F_uv` in every trial.
pub fn run_distance_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let start = Instant::now();
    let (gamma, density, warnings) = prepare(config)?;
    if gamma.e0() == 0 {
        return Err(HarnessError::Config("the backbone has no edge to measure".into()));
    }
    let (u, v) = gamma.edges()[0];
    let r_n = config.r_n();
    let n = effective_n(config);
    let records = run_trials(config, |trial| {
        let gloc = trial_gloc(config, &density, &gamma, trial)?;
        let out = check_distance_events(&gloc, u, v, config.eps)?;
        Ok(TrialRecord::Distance(DistanceRecord {
            trial,
            n,
            r_n,
            d_euclid: out.d_euclid,
            d_uv: out.d_uv,
            d_gr: out.d_gr,
            e_uv: out.e_uv,
            f_uv: out.f_uv,
        }))
    })?;
    let d = gamma.length(0);
    let nf = n as f64;
    let summary = summarize(&records)?;
    let fail_f = summary.frequency("f_uv").map_or(0.0, |f| 1.0 - f.estimate);
    let fail_e = summary.frequency("e_uv").map_or(0.0, |f| 1.0 - f.estimate);
    let extra = json!({
        "r_n": r_n,
        "d": d,
        "lemma1_ratio_bound": bounds::lemma1_ratio_bound(nf, r_n, config.constants.d)?,
        "lemma1_two_point_bound": bounds::lemma1_two_point_bound(nf, r_n, d, config.constants.d)?,
        "two_point_specialization_applies": bounds::two_point_specialization_applies(nf, r_n, d),
        "min_nonvacuous_two_point_constant": bounds::min_nonvacuous_two_point_constant(nf, r_n, d),
        "implied_ratio_constant": json_num(bounds::implied_constant(fail_e, nf * r_n * r_n)),
        "implied_two_point_constant": json_num(bounds::implied_constant(fail_f, nf * r_n.powi(4) / (d * d))),
    });
    finish("distance", RecordKind::Distance, records, extra, warnings, start)
}

fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(null)
    }
}

fn relay_failure_code(e: &RelayError) -> &'static str {
    match e {
        RelayError::ShortEdge { .. } | RelayError::RatioTooSmall { .. } => "short_edge",
        RelayError::DiskOutside { .. } => "disk_outside",
        RelayError::EmptyDisk { .. } => "empty_disk",
        RelayError::NoFeasibleChain { .. } | RelayError::BadEps(_) | RelayError::LengthMismatch { .. } => "parameters",
        RelayError::UnknownEdge(_) => "unknown_edge",
        RelayError::Invariant(_) => "invariant",
    }
}

/// Iterative disjoint relay graph per trial and its edge-count sandwich.
pub fn run_length_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let start = Instant::now();
    let (gamma, density, warnings) = prepare(config)?;
    let r_n = config.r_n();
    let mode = config.chain_mode();
    let e0 = gamma.e0() as f64;
    let records = run_trials(config, |trial| {
        let gloc = trial_gloc(config, &density, &gamma, trial)?;
        let lower = gamma.l_tot() / r_n;
        let record = match build_relay_rgg(&gloc, mode) {
            Ok(built) => {
                let est = length_bounds(Some(&built.rgg), &gamma, r_n, mode);
                let total = built.rgg.total_edges;
                if !lower_bound_holds(total, gamma.l_tot(), r_n) {
                    return Err(HarnessError::Invariant {
                        trial,
                        message: format!("{total} edges cannot span length {}", gamma.l_tot()),
                    });
                }
                if mode == crate::relay::ChainMode::TwoPoint && !est.within_additive {
                    return Err(HarnessError::Invariant {
                        trial,
                        message: format!("{total} edges exceed l_tot / r_n + 2 e0 = {}", lower + 2.0 * e0),
                    });
                }
                if est.within_ratio == Some(false) {
                    return Err(HarnessError::Invariant {
                        trial,
                        message: format!("{total} edges exceed (1 + eps) l_tot / r_n"),
                    });
                }
                LengthRecord {
                    trial,
                    success: true,
                    failure: String::new(),
                    lower,
                    total_edges: Some(total),
                    ratio: Some(total as f64 / lower),
                    within_additive: Some(est.within_additive),
                    within_ratio: est.within_ratio,
                    max_reuse: Some(built.max_reuse),
                }
            }
            Err(e) if e.is_invariant_violation() => {
                return Err(HarnessError::Invariant { trial, message: e.to_string() });
            }
            Err(e) => LengthRecord {
                trial,
                success: false,
                failure: relay_failure_code(&e).to_string(),
                lower,
                total_edges: None,
                ratio: None,
                within_additive: None,
                within_ratio: None,
                max_reuse: None,
            },
        };
        Ok(TrialRecord::Length(record))
    })?;
    let nf = effective_n(config) as f64;
    let tails = bounds::theorem_tail_calculators(nf, r_n, gamma.e0(), gamma.l_tot() / r_n, config.constants)?;
    let extra = json!({
        "r_n": r_n,
        "l_tot": gamma.l_tot(),
        "e0": gamma.e0(),
        "lower": gamma.l_tot() / r_n,
        "additive_upper": gamma.l_tot() / r_n + 2.0 * e0,
        "ratio_failure_bound": tails.ratio_failure,
        "two_point_failure_bound": tails.two_point_failure,
    });
    finish("length", RecordKind::Length, records, extra, warnings, start)
}

fn weight_failure_code(e: &WeightError) -> &'static str {
    match e {
        WeightError::EmptySquare { .. } => "empty_square",
        WeightError::SquareOutside { .. } => "square_outside",
        WeightError::LayoutInfeasible { .. } => "layout",
        WeightError::BudgetTooSmall { .. } => "budget",
        WeightError::SmallM(_) => "parameters",
        WeightError::OracleTooLarge(_) | WeightError::BadEndpoint(_) => "oracle",
        WeightError::Invariant(_) => "invariant",
    }
}

/// Greedy square-chain maximum-weight relay graph per trial.
pub fn run_weight_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let start = Instant::now();
    let (gamma, density, mut warnings) = prepare(config)?;
    warnings.extend(config.strip_warning(&gamma));
    let r_n = config.r_n();
    let l_n = config.l_n.resolve(gamma.l_up(), r_n);
    let n = effective_n(config);
    let log_n = (n as f64).ln();
    let e0 = gamma.e0() as f64;
    let delta_n = e0 * l_n as f64 * log_n;
    let upper_cert = e0 * config.m * l_n as f64 * log_n;
    let records = run_trials(config, |trial| {
        let gloc = trial_gloc(config, &density, &gamma, trial)?;
        let weights = assign_weights(stream_seed(config.master_seed, trial as u64, StreamTag::Weights));
        let base = WeightRecord {
            trial,
            success: false,
            failure: String::new(),
            l_n,
            delta_n,
            lower_achieved: None,
            upper_cert,
            lower_ratio: None,
            upper_ratio: upper_cert / delta_n,
            eup_holds: None,
            max_edge_weight: None,
            hops_min: None,
            hops_max: None,
            min_hop_weight: None,
            min_hop_over_log_n: None,
            min_occupancy: None,
            median_hop_weight: None,
        };
        let record = match build_max_weight_relay_rgg(&gloc, &weights, l_n, config.m) {
            Ok(built) => {
                if !lower_bound_holds(built.rgg.total_edges, gamma.l_tot(), r_n) {
                    return Err(HarnessError::Invariant {
                        trial,
                        message: format!("{} edges cannot span length {}", built.rgg.total_edges, gamma.l_tot()),
                    });
                }
                let est = built.estimate;
                let hops = built.rgg.paths.iter().map(|p| p.hops());
                let min_hop = built.greedy.iter().map(|g| g.min_hop_weight).fold(f64::INFINITY, f64::min);
                let first = &built.greedy[0];
                let interior = &first.hop_weights[..first.hop_weights.len() - 1];
                WeightRecord {
                    success: true,
                    lower_achieved: Some(est.lower_achieved),
                    lower_ratio: Some(est.lower_achieved / delta_n),
                    eup_holds: Some(est.eup_holds),
                    max_edge_weight: Some(est.max_edge_weight),
                    hops_min: hops.clone().min(),
                    hops_max: hops.max(),
                    min_hop_weight: Some(min_hop),
                    min_hop_over_log_n: Some(min_hop / log_n),
                    min_occupancy: built.greedy.iter().flat_map(|g| g.occupancy.iter().copied()).min(),
                    median_hop_weight: quantile(interior, 0.5),
                    ..base
                }
            }
            Err(e) if e.is_invariant_violation() => {
                return Err(HarnessError::Invariant { trial, message: e.to_string() });
            }
            Err(e) => WeightRecord { failure: weight_failure_code(&e).to_string(), ..base },
        };
        Ok(TrialRecord::Weight(record))
    })?;
    let tails = bounds::theorem_tail_calculators(n as f64, r_n, gamma.e0(), l_n as f64, config.constants)?;
    let lower_ratios: Vec<f64> = records
        .iter()
        .filter_map(|r| match r {
            TrialRecord::Weight(w) => w.lower_ratio,
            _ => None,
        })
        .collect();
    let extra = json!({
        "r_n": r_n,
        "l_n": l_n,
        "delta_n": delta_n,
        "upper_cert": upper_cert,
        "weight_failure_bound": tails.weight_failure,
        "lower_ratio_q05": quantile(&lower_ratios, 0.05),
        "lower_ratio_q95": quantile(&lower_ratios, 0.95),
        "strip_ratio": r_n * r_n * l_n as f64 / gamma.l0(),
    });
    finish("weight", RecordKind::Weight, records, extra, warnings, start)
}

/// Degree statistics of the plain random geometric graph.
pub fn run_rgg_stats(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let start = Instant::now();
    config.validate()?;
    let density = config.density()?;
    let r_n = config.r_n();
    let n = effective_n(config);
    let records = run_trials(config, |trial| {
        let rgg = build_rgg(trial_points(config, &density, trial)?, r_n)?;
        let degrees: Vec<usize> = (0..rgg.n()).map(|i| rgg.neighbors(i).len()).collect();
        let edges = degrees.iter().sum::<usize>() / 2;
        Ok(TrialRecord::Rgg(RggRecord {
            trial,
            n,
            r_n,
            edges,
            mean_degree: if n == 0 { 0.0 } else { 2.0 * edges as f64 / n as f64 },
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            isolated: degrees.iter().filter(|&&d| d == 0).count(),
        }))
    })?;
    let extra = json!({ "r_n": r_n, "expected_mean_degree_interior": (n as f64 - 1.0) * std::f64::consts::PI * r_n * r_n });
    finish("rgg-stats", RecordKind::Rgg, records, extra, Vec::new(), start)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendPoint {
    pub n: usize,
    pub r_n: f64,
    pub n_r2: f64,
    pub f_uv: Frequency,
    pub e_uv: Frequency,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendOutput {
    pub points: Vec<TrendPoint>,
    /// Each consecutive pair rises or has overlapping Wilson intervals.
    pub f_uv_non_decreasing: bool,
    pub e_uv_non_decreasing: bool,
    pub records: Vec<TrialRecord>,
    pub outputs: Vec<ExperimentOutput>,
}

impl TrendOutput {
    pub fn csv(&self) -> Result<String, HarnessError> {
        csv_string(RecordKind::Distance, &self.records)
    }
}

fn non_decreasing_within_ci(freqs: &[Frequency]) -> bool {
    freqs.windows(2).all(|w| w[1].estimate >= w[0].estimate || w[0].overlaps(&w[1]))
}

/// Distance experiments over configurations ordered by `n r_n^2`.
pub fn run_trend_experiment(configs: &[ExperimentConfig]) -> Result<TrendOutput, HarnessError> {
    if configs.len() < 2 {
        return Err(HarnessError::Config(format!("a trend needs at least 2 configurations, got {}", configs.len())));
    }
    let scale: Vec<f64> = configs.iter().map(|c| c.n as f64 * c.r_n().powi(2)).collect();
    if scale.windows(2).any(|w| w[1] < w[0]) {
        return Err(HarnessError::Config("trend configurations must be ordered by increasing n r_n^2".into()));
    }
    let mut points = Vec::new();
    let mut records = Vec::new();
    let mut outputs = Vec::new();
    for (c, s) in configs.iter().zip(scale) {
        let out = run_distance_experiment(c)?;
        let freq = |name: &str| out.summary.frequency(name).copied().unwrap_or(Frequency::new(0, 0));
        points.push(TrendPoint { n: c.n, r_n: c.r_n(), n_r2: s, f_uv: freq("f_uv"), e_uv: freq("e_uv") });
        records.extend(out.records.iter().cloned());
        outputs.push(out);
    }
    let f: Vec<Frequency> = points.iter().map(|p| p.f_uv).collect();
    let e: Vec<Frequency> = points.iter().map(|p| p.e_uv).collect();
    Ok(TrendOutput {
        f_uv_non_decreasing: non_decreasing_within_ci(&f),
        e_uv_non_decreasing: non_decreasing_within_ci(&e),
        points,
        records,
        outputs,
    })
}

/// One configuration per `trend_n` entry, sharing everything else.
pub fn trend_configs(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    base.trend_n
        .iter()
        .map(|&n| ExperimentConfig { n, ..base.clone() })
        .collect()
}

/// `<stem>-<seed>.csv` and `<stem>-<seed>.summary.json` inside `dir`.
pub fn artifact_paths(dir: &Path, stem: &str, seed: u64) -> (PathBuf, PathBuf) {
    (dir.join(format!("{stem}-{seed}.csv")), dir.join(format!("{stem}-{seed}.summary.json")))
}

/// Writes the CSV and the JSON sidecar. Returns both paths.
pub fn write_artifacts(
    dir: &Path,
    stem: &str,
    config: &ExperimentConfig,
    csv: &str,
    summary: serde_json::Value,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let (csv_path, json_path) = artifact_paths(dir, stem, config.master_seed);
    std::fs::write(&csv_path, csv)?;
    let doc = json!({ "experiment": stem, "config": config, "summary": summary });
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok((csv_path, json_path))
}
