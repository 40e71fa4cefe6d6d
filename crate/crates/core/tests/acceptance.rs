//! End-to-end acceptance checks. Each criterion prints one line; the process
//! exits non-zero if any of them fails.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relay_rgg::bounds::{chernoff_upper, exact_two_sided_tail, BernoulliSumSpec};
use relay_rgg::geometry::{sample_points, DensitySpec, GridIndex, Point, PointSet};
use relay_rgg::graphs::{build_gloc, build_rgg, relay_distance, DetGraph, GLocGraph, Vertex};
use relay_rgg::harness::{
    run_distance_experiment, run_length_experiment, run_trend_experiment, run_weight_experiment, trend_configs,
    trial_points, ExperimentConfig, ExperimentOutput, GammaSource, LengthRecord, LnRule, NumericSummary,
    RadiusRule, TrialRecord, WeightRecord,
};
use relay_rgg::relay::{make_circle_chain_params, ChainMode};
use relay_rgg::streams::{stream_seed, StreamTag};
use relay_rgg::weights::{
    assign_weights, build_greedy_max_weight_path, oracle_max_weight_path, square_chain_layout, EdgeWeights,
};

/// Sizes used where the listed `n` leaves the construction disks or squares
/// nearly empty.
const C4_N: usize = 2_000_000;
const C5_N: usize = 6_000_000;
const C8_N: usize = 50_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn length_records(out: &ExperimentOutput) -> Vec<&LengthRecord> {
    out.records
        .iter()
        .filter_map(|r| match r {
            TrialRecord::Length(l) => Some(l),
            _ => None,
        })
        .collect()
}

fn weight_records(out: &ExperimentOutput) -> Vec<&WeightRecord> {
    out.records
        .iter()
        .filter_map(|r| match r {
            TrialRecord::Weight(w) => Some(w),
            _ => None,
        })
        .collect()
}

fn success_line(out: &ExperimentOutput) -> String {
    let f = out.summary.frequency("success").expect("success frequency");
    format!("{}/{} [{:.3}, {:.3}]", f.successes, f.count, f.lower, f.upper)
}

fn config(n: usize, r: f64, gamma: GammaSource, trials: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(n, RadiusRule::Explicit(r), gamma);
    c.trials = trials;
    c
}

/// Every experiment run by this suite, kept for the lower-bound sweep.
#[derive(Default)]
struct Runs {
    length: Vec<(f64, f64, ExperimentOutput)>,
    weight: Vec<(f64, f64, ExperimentOutput)>,
}

impl Runs {
    fn length(&mut self, c: &ExperimentConfig) -> &ExperimentOutput {
        let out = run_length_experiment(c).expect("length experiment");
        let l_tot = c.gamma.load().unwrap().l_tot();
        self.length.push((c.r_n(), l_tot, out));
        &self.length.last().unwrap().2
    }

    fn weight(&mut self, c: &ExperimentConfig) -> &ExperimentOutput {
        let out = run_weight_experiment(c).expect("weight experiment");
        let l_tot = c.gamma.load().unwrap().l_tot();
        self.weight.push((c.r_n(), l_tot, out));
        &self.weight.last().unwrap().2
    }
}

fn grid_vs_brute_force() -> Outcome {
    let mut queries = 0;
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = sample_points(500, &DensitySpec::Uniform, &mut rng).unwrap();
        let cell = rng.gen_range(0.01..0.3);
        let grid = GridIndex::build(&points, cell).unwrap();
        for _ in 0..50 {
            let center = Point::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let radius = rng.gen_range(0.0..0.4);
            let brute: Vec<usize> = (0..points.len())
                .filter(|&i| points.points()[i].dist2(&center) <= radius * radius)
                .collect();
            queries += 1;
            if grid.neighbors_within(center, radius) != brute {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{queries} queries over 100 seeds, {mismatches} mismatches"))
}

/// Shortest relay path by enumerating every simple path.
fn exhaustive_relay_distance(gloc: &GLocGraph, u: usize, v: usize) -> Option<usize> {
    fn dfs(gloc: &GLocGraph, at: Vertex, target: Vertex, used: &mut [bool], depth: usize, best: &mut Option<usize>) {
        if gloc.adjacent(at, target) {
            let hops = depth + 1;
            *best = Some(best.map_or(hops, |b| b.min(hops)));
        }
        for i in 0..gloc.n() {
            if !used[i] && gloc.adjacent(at, Vertex::Relay(i)) {
                used[i] = true;
                dfs(gloc, Vertex::Relay(i), target, used, depth + 1, best);
                used[i] = false;
            }
        }
    }
    let mut best = None;
    let mut used = vec![false; gloc.n()];
    dfs(gloc, Vertex::Backbone(u), Vertex::Backbone(v), &mut used, 0, &mut best);
    best
}

fn bfs_vs_enumeration() -> Outcome {
    let mut mismatches = 0;
    let mut reachable = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let d = rng.gen_range(0.15..0.4);
        let r = rng.gen_range(0.06..0.2);
        let k = rng.gen_range(0..=10);
        let pts: Vec<Point> = (0..k)
            .map(|_| Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.1..0.1)))
            .collect();
        let gloc = build_gloc(build_rgg(PointSet::new(pts), r).unwrap(), DetGraph::segment(d).unwrap()).unwrap();
        let fast = relay_distance(&gloc, 0, 1).unwrap();
        let slow = exhaustive_relay_distance(&gloc, 0, 1);
        reachable += usize::from(slow.is_some());
        if fast != slow {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("100 instances ({reachable} connected), {mismatches} mismatches"))
}

fn lower_bound_sweep(runs: &Runs) -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for (r, l_tot, out) in &runs.length {
        for rec in length_records(out) {
            if let Some(total) = rec.total_edges {
                checked += 1;
                violations += usize::from((total as f64) * r < l_tot - 1e-9);
            }
        }
    }
    for (r, l_tot, out) in &runs.weight {
        for rec in weight_records(out) {
            // single-edge backbones only, so the one path is the whole graph
            if let Some(total) = rec.hops_min {
                checked += 1;
                violations += usize::from((total as f64) * r < l_tot - 1e-9);
            }
        }
    }
    outcome(checked > 0 && violations == 0, format!("{checked} constructed relay graphs, {violations} violations"))
}

fn two_point_chain(runs: &mut Runs) -> Outcome {
    let (d, r) = (0.32, 0.08);
    let params = make_circle_chain_params(d / r, ChainMode::TwoPoint).unwrap();
    let listed = success_line(runs.length(&config(20_000, r, GammaSource::Segment { d }, 100)));
    let out = runs.length(&config(C4_N, r, GammaSource::Segment { d }, 100));
    let freq = out.summary.frequency("success").unwrap().estimate;
    let hops: Vec<usize> = length_records(out).iter().filter_map(|l| l.total_edges).collect();
    let in_set = hops.iter().all(|h| *h == 5 || *h == 6);
    let exact = hops.iter().all(|h| *h == 5);
    let params_ok = params.w == 5 && (params.delta - 0.2).abs() < 1e-12;
    let mut counts = BTreeMap::new();
    for h in &hops {
        *counts.entry(*h).or_insert(0) += 1;
    }
    outcome(
        freq >= 0.9 && in_set && exact && params_ok,
        format!(
            "W = {}, delta = {:.3}; n = 20000: {listed}; n = {C4_N}: {}, hop counts {counts:?}",
            params.w,
            params.delta,
            success_line(out)
        ),
    )
}

fn star_sandwich(runs: &mut Runs) -> Outcome {
    let gamma = GammaSource::Star { k: 5, len: 0.3 };
    let listed = success_line(runs.length(&config(30_000, 0.06, gamma.clone(), 100)));
    let out = runs.length(&config(C5_N, 0.06, gamma, 100));
    let upper = 1.5 / 0.06 + 10.0;
    let built: Vec<usize> = length_records(out).iter().filter_map(|l| l.total_edges).collect();
    let within = built.iter().filter(|&&t| t as f64 <= upper + 1e-9).count();
    let freq = out.summary.frequency("success").unwrap().estimate;
    outcome(
        freq >= 0.8 && within == built.len() && !built.is_empty(),
        format!(
            "n = 30000: {listed}; n = {C5_N}: {}; {within} of {} within l_tot / r_n + 2 e0 = {upper}",
            success_line(out),
            built.len()
        ),
    )
}

fn parallel_impossibility(runs: &mut Runs) -> Outcome {
    let out = runs.length(&config(400, 0.9 / 40.0, GammaSource::Parallel { m: 20 }, 100));
    let freq = out.summary.frequency("success").unwrap().estimate;
    let mut codes: Vec<&str> = length_records(out).iter().map(|l| l.failure.as_str()).collect();
    codes.sort_unstable();
    codes.dedup();
    outcome(freq <= 0.05, format!("success {}, failure codes {codes:?}", success_line(out)))
}

fn chernoff_grid() -> Outcome {
    let mut cases = 0;
    let mut violations = Vec::new();
    for m in 1..=30 {
        for p in [0.2, 0.5, 0.8] {
            for eps in [0.1, 0.25, 0.5] {
                let spec = BernoulliSumSpec::uniform(m, p).unwrap();
                let exact = exact_two_sided_tail(&spec, eps).unwrap();
                let bound = chernoff_upper(spec.mu(), eps).unwrap();
                cases += 1;
                if exact > bound {
                    violations.push((m, p, eps, exact, bound));
                }
            }
        }
    }
    let mut detail = format!("{cases} cases, {} violations", violations.len());
    if let Some(largest) = violations.iter().map(|v| v.0).max() {
        let v = violations[0];
        detail += &format!(
            " (largest m = {largest}; e.g. m = {} p = {} eps = {}: exact {:.4} > {:.4})",
            v.0, v.1, v.2, v.3, v.4
        );
    }
    outcome(violations.is_empty(), detail)
}

/// Rebuilds the greedy paths of a weight run and checks them directly.
fn weight_scaling_at(runs: &mut Runs, n: usize) -> (bool, String) {
    let (l, r) = (0.32, 0.08);
    let mut c = config(n, r, GammaSource::Segment { d: l }, 50);
    c.l_n = LnRule::Multiplier(16.0);
    let out = runs.weight(&c).clone();
    let l_n = c.l_n.resolve(l, r);
    let gamma = c.gamma.load().unwrap();
    let lo = l_n.div_ceil(16) as usize;
    let log_n = (n as f64).ln();
    let cert = gamma.e0() as f64 * c.m * l_n as f64 * log_n;

    let mut violations = Vec::new();
    let mut ratios = Vec::new();
    for rec in weight_records(&out).into_iter().filter(|w| w.success) {
        let points = trial_points(&c, &DensitySpec::Uniform, rec.trial).unwrap();
        let gloc = build_gloc(build_rgg(points, r).unwrap(), gamma.clone()).unwrap();
        let weights = assign_weights(stream_seed(c.master_seed, rec.trial as u64, StreamTag::Weights));
        let layout = square_chain_layout(&gloc, 0, l_n).unwrap();
        let g = build_greedy_max_weight_path(&gloc, &weights, &layout, &vec![false; gloc.n()]).unwrap();
        let hops = g.path.hops();
        if hops < lo || hops as u64 > l_n {
            violations.push(format!("trial {}: {hops} hops", rec.trial));
        }
        let pts: Vec<Point> = g.path.vertices.iter().map(|&v| gloc.pos(v)).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i].dist(&pts[j]) < 0.3 * r - 1e-12 {
                    violations.push(format!("trial {}: vertices {i}, {j} too close", rec.trial));
                }
            }
        }
        let recomputed: f64 = g.path.vertices.windows(2).map(|w| weights.weight(w[0], w[1])).sum();
        if rec.lower_achieved.map_or(true, |x| (x - recomputed).abs() > 1e-9 * x) {
            violations.push(format!("trial {}: weight {recomputed} differs from record", rec.trial));
        }
        if rec.eup_holds == Some(true) && recomputed > cert {
            violations.push(format!("trial {}: weight above certificate {cert}", rec.trial));
        }
        ratios.extend(rec.lower_ratio);
    }
    let cv = NumericSummary::of(&ratios).map(|s| s.coefficient_of_variation());
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let moments_ok = ratios.len() >= 2 && cv.is_some_and(|v| v <= 0.5) && min > 0.0;
    let detail = format!(
        "n = {n}, L_n = {l_n}: {}, cv {}, min ratio {min:.5}, {} violations{}",
        success_line(&out),
        cv.map_or("NA".into(), |v| format!("{v:.3}")),
        violations.len(),
        violations.first().map(|v| format!(" ({v})")).unwrap_or_default()
    );
    (violations.is_empty() && moments_ok, detail)
}

fn weight_scaling(runs: &mut Runs) -> Outcome {
    let (listed_ok, listed) = weight_scaling_at(runs, 20_000);
    let (calibrated_ok, calibrated) = weight_scaling_at(runs, C8_N);
    outcome(listed_ok && calibrated_ok, format!("{listed}; {calibrated}"))
}

fn greedy_vs_oracle() -> Outcome {
    let (d, r, l_n) = (0.1, 0.08, 16u64);
    let gamma = DetGraph::segment(d).unwrap();
    let probe = build_gloc(build_rgg(PointSet::new(vec![Point::new(0.0, 0.3)]), r).unwrap(), gamma.clone()).unwrap();
    let template = square_chain_layout(&probe, 0, l_n).unwrap();
    let half = template.a / 2.0 * 0.98;
    let mut above = 0;
    let mut greedy_failed = 0;
    let mut max_relays = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
        let mut pts: Vec<Point> = (1..=template.n_interior)
            .map(|j| {
                template.centers[j]
                    .add_scaled(template.direction, rng.gen_range(-half..half))
                    .add_scaled(template.normal, rng.gen_range(-half..half))
            })
            .collect();
        let extra = rng.gen_range(0..=12 - pts.len());
        pts.extend((0..extra).map(|_| Point::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.06..0.06))));
        max_relays = max_relays.max(pts.len());
        let gloc = build_gloc(build_rgg(PointSet::new(pts), r).unwrap(), gamma.clone()).unwrap();
        let weights = assign_weights(seed);
        let layout = square_chain_layout(&gloc, 0, l_n).unwrap();
        let Ok(g) = build_greedy_max_weight_path(&gloc, &weights, &layout, &vec![false; gloc.n()]) else {
            greedy_failed += 1;
            continue;
        };
        let best = oracle_max_weight_path(&gloc, &weights, 0, 1, l_n).unwrap().total();
        if best.map_or(true, |b| g.total > b) {
            above += 1;
        }
    }
    outcome(
        above == 0 && greedy_failed == 0,
        format!("200 instances with up to {max_relays} relays, {above} above the oracle, {greedy_failed} greedy failures"),
    )
}

fn trend() -> Outcome {
    let mut base = ExperimentConfig::new(2000, RadiusRule::LogScale(20f64.sqrt()), GammaSource::Segment { d: 0.3 });
    base.trials = 200;
    base.trend_n = vec![2000, 8000, 32000];
    let t = run_trend_experiment(&trend_configs(&base)).expect("trend experiment");
    let points: Vec<String> = t
        .points
        .iter()
        .map(|p| format!("n = {} F = {}/{} [{:.3}, {:.3}]", p.n, p.f_uv.successes, p.f_uv.count, p.f_uv.lower, p.f_uv.upper))
        .collect();
    outcome(t.f_uv_non_decreasing, points.join(", "))
}

type Runner = fn(&ExperimentConfig) -> ExperimentOutput;

fn determinism() -> Outcome {
    let cases: Vec<(&str, ExperimentConfig, Runner)> = vec![
        ("distance", config(20_000, 0.05, GammaSource::Segment { d: 0.3 }, 40), |c| {
            run_distance_experiment(c).unwrap()
        }),
        ("length", config(300_000, 0.12, GammaSource::Star { k: 3, len: 0.3 }, 12), |c| {
            run_length_experiment(c).unwrap()
        }),
        ("weight", config(50_000, 0.08, GammaSource::Segment { d: 0.32 }, 8), |c| {
            run_weight_experiment(c).unwrap()
        }),
    ];
    let mut differ = Vec::new();
    for (name, mut c, run) in cases {
        c.threads = Some(1);
        let one = run(&c).csv().unwrap();
        c.threads = Some(8);
        let eight = run(&c).csv().unwrap();
        if one != eight {
            differ.push(name);
        }
    }
    outcome(differ.is_empty(), format!("distance, length, weight at 1 and 8 workers; differing: {differ:?}"))
}

fn weight_marginals() -> Outcome {
    let w = assign_weights(20_260_101);
    let values: Vec<f64> = (0..100_000).map(|i| w.weight(Vertex::Relay(i), Vertex::Relay(i + 1))).collect();
    let s = NumericSummary::of(&values).unwrap();
    outcome(
        (s.mean - 1.0).abs() <= 0.02 && (s.variance - 1.0).abs() <= 0.05 && s.min > 0.0,
        format!("mean {:.4}, variance {:.4}, min {:.2e}", s.mean, s.variance, s.min),
    )
}

fn main() {
    let mut runs = Runs::default();
    let mut failed = Vec::new();
    let mut total = 0;
    let mut check = |id: u32, name: &str, o: Outcome, start: Instant| {
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id:>2} {} {name} ({secs:.1} s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        total += 1;
        if !o.pass {
            failed.push(id);
        }
    };
    let t = Instant::now();
    check(1, "grid index equals brute force", grid_vs_brute_force(), t);
    let t = Instant::now();
    check(2, "relay distance equals path enumeration", bfs_vs_enumeration(), t);
    let t = Instant::now();
    check(4, "two-point circle chain", two_point_chain(&mut runs), t);
    let t = Instant::now();
    check(5, "star backbone length sandwich", star_sandwich(&mut runs), t);
    let t = Instant::now();
    check(6, "parallel-edge backbone infeasible", parallel_impossibility(&mut runs), t);
    let t = Instant::now();
    check(7, "Chernoff bound on the exact grid", chernoff_grid(), t);
    let t = Instant::now();
    check(8, "weight scaling", weight_scaling(&mut runs), t);
    let t = Instant::now();
    check(3, "lower bound on every construction above", lower_bound_sweep(&runs), t);
    let t = Instant::now();
    check(9, "greedy weight below the exact oracle", greedy_vs_oracle(), t);
    let t = Instant::now();
    check(10, "F_uv trend", trend(), t);
    let t = Instant::now();
    check(11, "thread-count determinism", determinism(), t);
    let t = Instant::now();
    check(12, "weight marginals", weight_marginals(), t);

    println!("acceptance: {} of {total} criteria pass", total - failed.len());
    if !failed.is_empty() {
        println!("failing: {failed:?}");
        std::process::exit(1);
    }
}
