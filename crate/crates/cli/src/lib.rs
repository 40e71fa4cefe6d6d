//! Command-line front end: `relay-rgg <subcommand> [--config FILE] [flags]`.
//!
//! Configuration files hold one `key = value` pair per line; `#` starts a
//! comment. Flags use the same keys (`--rn-scale` sets `rn_scale`) and win
//! over file values.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 a deterministic
//! invariant failed during an experiment.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use relay_rgg::bounds::{self, TheoremConstants};
use relay_rgg::harness::{
    self, ExperimentConfig, GammaSource, HarnessError, LnRule, ModeKind, RadiusRule, DEFAULT_LN_MULT,
};
use relay_rgg::relay::make_circle_chain_params;
use relay_rgg::weights::DEFAULT_M;
use relay_rgg::DensitySpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

/// Every accepted configuration key.
pub const KEYS: &[&str] = &[
    "n",
    "rn",
    "beta",
    "rn_scale",
    "gamma_file",
    "gamma_builtin",
    "mode",
    "eps",
    "Ln",
    "Ln_mult",
    "M",
    "trials",
    "seed",
    "out",
    "density_file",
    "alpha",
    "C",
    "D",
    "a",
    "d",
    "trend_n",
];

/// Keys of which at most one may be set; a later source replaces the others.
const EXCLUSIVE: &[&[&str]] = &[&["rn", "beta", "rn_scale"], &["gamma_file", "gamma_builtin"], &["Ln", "Ln_mult"]];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Harness(e) if e.is_invariant_violation() => EXIT_INVARIANT,
            _ => EXIT_CONFIG,
        }
    }
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "relay-rgg", version, about = "Relay random geometric graph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the sampled points of one trial.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Trial whose points are written.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Degree statistics of the random geometric graph.
    RggStats(CommonArgs),
    /// Relay hop distance between the endpoints of the first backbone edge.
    Distance(CommonArgs),
    /// Disjoint relay graph construction and its edge-count sandwich.
    Length(CommonArgs),
    /// Greedy maximum-weight relay graph.
    Weight(CommonArgs),
    /// Distance experiments over the sample sizes in `trend_n`.
    Trend(CommonArgs),
    /// Evaluate the closed-form bounds.
    Bounds(CommonArgs),
    /// Check a backbone graph and report its lengths.
    ValidateGamma(CommonArgs),
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    /// Explicit adjacency radius.
    #[arg(long)]
    rn: Option<String>,
    /// r_n = n^-beta.
    #[arg(long)]
    beta: Option<String>,
    /// r_n = scale * sqrt(log n / n).
    #[arg(long = "rn-scale")]
    rn_scale: Option<String>,
    #[arg(long = "gamma-file")]
    gamma_file: Option<String>,
    /// `segment D`, `star K [LEN]` or `parallel M`.
    #[arg(long = "gamma-builtin", num_args = 1..=3, value_delimiter = None)]
    gamma_builtin: Option<Vec<String>>,
    /// twopoint or ratio.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Explicit hop budget.
    #[arg(long = "Ln")]
    ln: Option<String>,
    /// Hop budget multiplier of ceil(l_up / r_n).
    #[arg(long = "Ln-mult")]
    ln_mult: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "density-file")]
    density_file: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long = "D")]
    d_const: Option<String>,
    #[arg(long = "a")]
    a: Option<String>,
    /// Separation for `bounds` without a backbone.
    #[arg(long = "d")]
    d: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long = "trend-n")]
    trend_n: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs: [(&str, Option<String>); 21] = [
            ("n", self.n.clone()),
            ("rn", self.rn.clone()),
            ("beta", self.beta.clone()),
            ("rn_scale", self.rn_scale.clone()),
            ("gamma_file", self.gamma_file.clone()),
            ("gamma_builtin", self.gamma_builtin.as_ref().map(|v| v.join(" "))),
            ("mode", self.mode.clone()),
            ("eps", self.eps.clone()),
            ("Ln", self.ln.clone()),
            ("Ln_mult", self.ln_mult.clone()),
            ("M", self.m.clone()),
            ("trials", self.trials.clone()),
            ("seed", self.seed.clone()),
            ("out", self.out.clone()),
            ("density_file", self.density_file.clone()),
            ("alpha", self.alpha.clone()),
            ("C", self.c.clone()),
            ("D", self.d_const.clone()),
            ("a", self.a.clone()),
            ("d", self.d.clone()),
            ("trend_n", self.trend_n.clone()),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect()
    }
}

/// What a subcommand needs from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub size: bool,
    pub radius: bool,
    pub gamma: bool,
}

impl Needs {
    pub const ALL: Needs = Needs { size: true, radius: true, gamma: true };
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    /// Whether a backbone was configured (a placeholder is used otherwise).
    pub has_gamma: bool,
    pub has_radius: bool,
}

/// Parses `key = value` lines. Duplicate keys keep the last value and add a
/// warning.
pub fn parse_pairs(text: &str, origin: &str) -> Result<(Vec<(String, String)>, Vec<String>), CliError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut warnings = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return cfg_err(format!("{origin}:{}: expected `key = value`, got `{line}`", lineno + 1));
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            return cfg_err(format!("{origin}:{}: unknown key `{k}`", lineno + 1));
        }
        if let Some(slot) = pairs.iter_mut().find(|(pk, _)| *pk == k) {
            warnings.push(format!("{origin}:{}: duplicate key `{k}`, the last value wins", lineno + 1));
            slot.1 = v;
        } else {
            pairs.push((k, v));
        }
    }
    Ok((pairs, warnings))
}

fn merge(map: &mut BTreeMap<String, String>, key: String, value: String) {
    if let Some(group) = EXCLUSIVE.iter().find(|g| g.contains(&key.as_str())) {
        for other in group.iter() {
            map.remove(*other);
        }
    }
    map.insert(key, value);
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map_or_else(|| cfg_err(format!("`{key}` expects a number, got `{v}`")), Ok)
}

fn parse_count(key: &str, v: &str) -> Result<u64, CliError> {
    if let Ok(x) = v.parse::<u64>() {
        return Ok(x);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => cfg_err(format!("`{key}` expects a non-negative integer, got `{v}`")),
    }
}

/// Loads a configuration file (if any) and applies `overrides` on top.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)], needs: Needs) -> Result<LoadedConfig, CliError> {
    let mut map = BTreeMap::new();
    let mut warnings = Vec::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        let (pairs, w) = parse_pairs(&text, &path.display().to_string())?;
        warnings.extend(w);
        for (k, v) in pairs {
            merge(&mut map, k, v);
        }
    }
    for (k, v) in overrides {
        if !KEYS.contains(&k.as_str()) {
            return cfg_err(format!("unknown key `{k}`"));
        }
        merge(&mut map, k.clone(), v.clone());
    }
    build_config(&map, needs, warnings)
}

fn build_config(map: &BTreeMap<String, String>, needs: Needs, mut warnings: Vec<String>) -> Result<LoadedConfig, CliError> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let n = match get("n") {
        Some(v) => parse_count("n", v)? as usize,
        None if needs.size => return cfg_err("missing required key `n`"),
        None => 0,
    };
    let radius = if let Some(v) = get("rn") {
        Some(RadiusRule::Explicit(parse_f64("rn", v)?))
    } else if let Some(v) = get("beta") {
        Some(RadiusRule::Beta(parse_f64("beta", v)?))
    } else if let Some(v) = get("rn_scale") {
        Some(RadiusRule::LogScale(parse_f64("rn_scale", v)?))
    } else {
        None
    };
    if radius.is_none() && needs.radius {
        return cfg_err("missing required radius: one of `rn`, `beta`, `rn_scale`");
    }
    let gamma = if let Some(v) = get("gamma_file") {
        Some(GammaSource::File(PathBuf::from(v)))
    } else if let Some(v) = get("gamma_builtin") {
        Some(GammaSource::parse_builtin(v)?)
    } else {
        None
    };
    if gamma.is_none() && needs.gamma {
        return cfg_err("missing required backbone: one of `gamma_file`, `gamma_builtin`");
    }
    let has_gamma = gamma.is_some();
    let has_radius = radius.is_some();
    let mut c = ExperimentConfig::new(
        n,
        radius.unwrap_or(RadiusRule::Explicit(0.1)),
        gamma.unwrap_or(GammaSource::Segment { d: 0.3 }),
    );
    if let Some(v) = get("mode") {
        c.mode = match v {
            "twopoint" | "two-point" => ModeKind::TwoPoint,
            "ratio" => ModeKind::Ratio,
            _ => return cfg_err(format!("`mode` expects `twopoint` or `ratio`, got `{v}`")),
        };
    }
    if let Some(v) = get("eps") {
        c.eps = parse_f64("eps", v)?;
    }
    c.l_n = match (get("Ln"), get("Ln_mult")) {
        (Some(v), _) => LnRule::Explicit(parse_count("Ln", v)?),
        (None, Some(v)) => LnRule::Multiplier(parse_f64("Ln_mult", v)?),
        (None, None) => LnRule::Multiplier(DEFAULT_LN_MULT),
    };
    c.m = get("M").map_or(Ok(DEFAULT_M), |v| parse_f64("M", v))?;
    if let Some(v) = get("trials") {
        c.trials = parse_count("trials", v)? as usize;
    }
    if let Some(v) = get("seed") {
        c.master_seed = parse_count("seed", v)?;
    }
    c.out = get("out").map(PathBuf::from);
    c.density_file = get("density_file").map(PathBuf::from);
    c.alpha = get("alpha").map(|v| parse_f64("alpha", v)).transpose()?;
    let mut k = TheoremConstants::default();
    if let Some(v) = get("C") {
        k.c = parse_f64("C", v)?;
    }
    if let Some(v) = get("D") {
        k.d = parse_f64("D", v)?;
    }
    if let Some(v) = get("a") {
        k.a = parse_f64("a", v)?;
    }
    c.constants = k;
    c.d = get("d").map(|v| parse_f64("d", v)).transpose()?;
    if let Some(v) = get("trend_n") {
        c.trend_n = v
            .split(',')
            .map(|s| parse_count("trend_n", s.trim()).map(|x| x as usize))
            .collect::<Result<_, _>>()?;
    }
    if needs.size && needs.radius {
        c.validate()?;
    }
    if has_gamma && has_radius && c.n > 0 {
        if let Ok(g) = c.gamma.load() {
            warnings.extend(c.regime_warnings(&g));
        }
    }
    Ok(LoadedConfig { config: c, warnings, has_gamma, has_radius })
}

/// Serialises a configuration back to `key = value` lines.
pub fn config_to_text(c: &ExperimentConfig) -> String {
    let mut lines = vec![format!("n = {}", c.n)];
    lines.push(match c.radius {
        RadiusRule::Explicit(r) => format!("rn = {r}"),
        RadiusRule::Beta(b) => format!("beta = {b}"),
        RadiusRule::LogScale(s) => format!("rn_scale = {s}"),
    });
    lines.push(match &c.gamma {
        GammaSource::File(p) => format!("gamma_file = {}", p.display()),
        other => format!("gamma_builtin = {}", other.builtin_text().unwrap_or_default()),
    });
    lines.push(format!("mode = {}", if c.mode == ModeKind::Ratio { "ratio" } else { "twopoint" }));
    lines.push(format!("eps = {}", c.eps));
    lines.push(match c.l_n {
        LnRule::Explicit(l) => format!("Ln = {l}"),
        LnRule::Multiplier(m) => format!("Ln_mult = {m}"),
    });
    lines.push(format!("M = {}", c.m));
    lines.push(format!("trials = {}", c.trials));
    lines.push(format!("seed = {}", c.master_seed));
    if let Some(p) = &c.out {
        lines.push(format!("out = {}", p.display()));
    }
    if let Some(p) = &c.density_file {
        lines.push(format!("density_file = {}", p.display()));
    }
    if let Some(a) = c.alpha {
        lines.push(format!("alpha = {a}"));
    }
    lines.push(format!("C = {}", c.constants.c));
    lines.push(format!("D = {}", c.constants.d));
    lines.push(format!("a = {}", c.constants.a));
    if let Some(d) = c.d {
        lines.push(format!("d = {d}"));
    }
    if !c.trend_n.is_empty() {
        let ns: Vec<String> = c.trend_n.iter().map(usize::to_string).collect();
        lines.push(format!("trend_n = {}", ns.join(",")));
    }
    lines.join("\n") + "\n"
}

/// Runs the command line and returns the process exit code. Output goes to
/// `out`, diagnostics to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run`] against the process's standard streams.
pub fn parse_and_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn load(common: &CommonArgs, needs: Needs, err: &mut dyn Write) -> Result<LoadedConfig, CliError> {
    let loaded = load_config(common.config.as_deref(), &common.overrides(), needs)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(loaded)
}

fn out_dir(c: &ExperimentConfig) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn io<T>(r: std::io::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Harness(HarnessError::Io(e)))
}

fn report(out: &mut dyn Write, o: &harness::ExperimentOutput) -> Result<(), CliError> {
    io(writeln!(out, "{}: {} trials", o.experiment, o.summary.count))?;
    for (name, f) in &o.summary.frequencies {
        io(writeln!(
            out,
            "  {name}: {}/{} = {:.4} [{:.4}, {:.4}]",
            f.successes, f.count, f.estimate, f.lower, f.upper
        ))?;
    }
    for (name, s) in &o.summary.numeric {
        io(writeln!(out, "  {name}: mean {:.6} var {:.6} min {} max {}", s.mean, s.variance, s.min, s.max))?;
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let size_radius = Needs { size: true, radius: true, gamma: false };
    match command {
        Command::Sample { common, trial } => {
            let c = load(&common, size_radius, err)?.config;
            let density = c.density()?;
            let points = harness::trial_points(&c, &density, trial)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_io = |e: csv::Error| CliError::Harness(HarnessError::Csv(e));
            w.write_record(["index", "x", "y"]).map_err(csv_io)?;
            for (i, p) in points.points().iter().enumerate() {
                w.write_record([i.to_string(), p.x.to_string(), p.y.to_string()]).map_err(csv_io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
            let dir = out_dir(&c);
            io(std::fs::create_dir_all(&dir))?;
            let path = dir.join(format!("sample-{}.csv", c.master_seed));
            io(std::fs::write(&path, bytes))?;
            io(writeln!(out, "wrote {} points to {}", points.len(), path.display()))?;
        }
        Command::RggStats(common) => {
            let c = load(&common, size_radius, err)?.config;
            let o = harness::run_rgg_stats(&c)?;
            emit(&c, "rgg-stats", &o, out)?;
        }
        Command::Distance(common) => {
            let c = load(&common, Needs::ALL, err)?.config;
            let o = harness::run_distance_experiment(&c)?;
            emit(&c, "distance", &o, out)?;
        }
        Command::Length(common) => {
            let c = load(&common, Needs::ALL, err)?.config;
            let o = harness::run_length_experiment(&c)?;
            emit(&c, "length", &o, out)?;
        }
        Command::Weight(common) => {
            let c = load(&common, Needs::ALL, err)?.config;
            let o = harness::run_weight_experiment(&c)?;
            emit(&c, "weight", &o, out)?;
        }
        Command::Trend(common) => {
            let mut needs = Needs::ALL;
            needs.size = false;
            let mut c = load(&common, needs, err)?.config;
            if c.trend_n.len() < 2 {
                return cfg_err("`trend_n` must list at least two sample sizes");
            }
            c.n = c.trend_n[0];
            let t = harness::run_trend_experiment(&harness::trend_configs(&c))?;
            for p in &t.points {
                io(writeln!(
                    out,
                    "n = {} r_n = {:.6} n r_n^2 = {:.3}: F_uv {:.4} [{:.4}, {:.4}]  E_uv {:.4} [{:.4}, {:.4}]",
                    p.n, p.r_n, p.n_r2, p.f_uv.estimate, p.f_uv.lower, p.f_uv.upper, p.e_uv.estimate, p.e_uv.lower,
                    p.e_uv.upper
                ))?;
            }
            io(writeln!(out, "F_uv non-decreasing within intervals: {}", t.f_uv_non_decreasing))?;
            io(writeln!(out, "E_uv non-decreasing within intervals: {}", t.e_uv_non_decreasing))?;
            let summary = serde_json::json!({
                "points": t.points,
                "f_uv_non_decreasing": t.f_uv_non_decreasing,
                "e_uv_non_decreasing": t.e_uv_non_decreasing,
            });
            let (csv, json) = harness::write_artifacts(&out_dir(&c), "trend", &c, &t.csv()?, summary)?;
            io(writeln!(out, "wrote {} and {}", csv.display(), json.display()))?;
        }
        Command::Bounds(common) => {
            let loaded = load(&common, size_radius, err)?;
            bounds_report(&loaded, out)?;
        }
        Command::ValidateGamma(common) => {
            let needs = Needs { size: false, radius: false, gamma: true };
            let loaded = load(&common, needs, err)?;
            validate_gamma(&loaded, out)?;
        }
    }
    Ok(())
}

fn emit(c: &ExperimentConfig, stem: &str, o: &harness::ExperimentOutput, out: &mut dyn Write) -> Result<(), CliError> {
    report(out, o)?;
    let summary = serde_json::json!({
        "summary": o.summary,
        "bounds": o.extra,
        "warnings": o.warnings,
    });
    let (csv, json) = harness::write_artifacts(&out_dir(c), stem, c, &o.csv()?, summary)?;
    io(writeln!(out, "wrote {} and {}", csv.display(), json.display()))?;
    Ok(())
}

fn bounds_report(loaded: &LoadedConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let c = &loaded.config;
    let n = c.n as f64;
    let r = c.r_n();
    let k = c.constants;
    let gamma = if loaded.has_gamma { Some(c.gamma.load()?) } else { None };
    let d = c.d.or_else(|| gamma.as_ref().filter(|g| g.e0() > 0).map(|g| g.length(0)));
    let b = |e: bounds::BoundsError| CliError::Harness(HarnessError::Bounds(e));
    io(writeln!(out, "n = {} r_n = {r}", c.n))?;
    io(writeln!(out, "ratio bound exp(-D n r^2) = {:e}", bounds::lemma1_ratio_bound(n, r, k.d).map_err(b)?))?;
    if let Some(d) = d {
        let v = bounds::lemma1_two_point_bound(n, r, d, k.d).map_err(b)?;
        io(writeln!(out, "two-point bound (2d/r) exp(-D n r^4 / d^2) at d = {d}: {v:e}"))?;
        io(writeln!(
            out,
            "  d <= r^2 sqrt(n) / log n: {}",
            bounds::two_point_specialization_applies(n, r, d)
        ))?;
        io(writeln!(
            out,
            "  smallest D making it non-vacuous: {}",
            bounds::min_nonvacuous_two_point_constant(n, r, d)
        ))?;
    }
    let (e0, l_n) = match &gamma {
        Some(g) => (g.e0(), c.l_n.resolve(g.l_up(), r) as f64),
        None => (1, match c.l_n {
            LnRule::Explicit(l) => l as f64,
            LnRule::Multiplier(m) => m,
        }),
    };
    let t = bounds::theorem_tail_calculators(n, r, e0, l_n, k).map_err(b)?;
    io(writeln!(out, "exp(-C n r^2) = {:e}", t.ratio_failure))?;
    io(writeln!(out, "exp(-D n r^4) = {:e}", t.two_point_failure))?;
    io(writeln!(out, "n^-(1+a) = {:e}", t.weight_failure))?;
    io(writeln!(out, "delta_n = e0 L_n log n = {} (e0 = {e0}, L_n = {l_n})", t.delta_n))?;
    Ok(())
}

fn validate_gamma(loaded: &LoadedConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let c = &loaded.config;
    let g = c.gamma.load()?;
    io(writeln!(out, "v0 = {} e0 = {}", g.v0(), g.e0()))?;
    io(writeln!(out, "l0 = {} l_up = {} l_tot = {}", g.l0(), g.l_up(), g.l_tot()))?;
    if c.density_file.is_some() {
        let dens: DensitySpec = c.density()?;
        io(writeln!(out, "density bounds: [{}, {}]", dens.eps1(), dens.eps2()))?;
    }
    if loaded.has_radius {
        let r = c.r_n();
        for f in 0..g.e0() {
            let k = g.length(f) / r;
            match make_circle_chain_params(k, c.chain_mode()) {
                Ok(p) => io(writeln!(out, "edge {f}: K = {k:.6} W = {} delta = {:.6}", p.w, p.delta))?,
                Err(e) => io(writeln!(out, "edge {f}: K = {k:.6} no circle chain ({e})"))?,
            }
        }
    }
    io(writeln!(out, "ok"))?;
    Ok(())
}
