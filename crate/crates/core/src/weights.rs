//! Exponential edge weights and the greedy square-chain maximum-weight path.
//!
//! Weights are a pure function of `(seed, vertex pair)`, so no weight table is
//! ever stored and edges that are never queried cost nothing.
//!
//! The square chain for an edge `f = (u, v)` uses `a x a` squares with
//! `a = r_n / 10`. In the frame with `u` at the origin and `v = (l, 0)` the
//! squares sit in columns along the edge, four sides apart, and each column
//! climbs along the inward normal. Columns are walked alternately up and down
//! so the chain starts in the square centred at `u` and ends in the one centred
//! at `v`. Consecutive squares are `4a` apart except for one jump into the
//! column at `x = l`, which lies in `[4a, 8a)`. When the hop budget is too
//! small for one square per `4a` of edge, a single row with uniform spacing in
//! `[4a, 8a]` is used instead.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, HALF};
use crate::graphs::{GLocGraph, Vertex};
use crate::relay::{edge_frame, validate_relay_rgg, RelayPath, RelayRgg, GEOM_SLACK};
use crate::streams::{hash_words, open_unit};
use crate::{ceil_snapped, next_integer_above};

/// Largest relay count accepted by [`oracle_max_weight_path`].
pub const ORACLE_MAX_RELAYS: usize = 12;

/// Default `M` for the `Y <= M log n` certificate.
pub const DEFAULT_M: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("M must exceed 2, got {0}")]
    SmallM(f64),
    #[error("hop budget {l_n} is below l_up / r_n = {needed}")]
    BudgetTooSmall { l_n: u64, needed: f64 },
    #[error("edge {edge}: square chain cannot be laid out ({reason})")]
    LayoutInfeasible { edge: usize, reason: String },
    #[error("edge {edge}: square {square} leaves the unit square")]
    SquareOutside { edge: usize, square: usize },
    #[error("edge {edge}: square {square} holds no eligible relay point")]
    EmptySquare { edge: usize, square: usize },
    #[error("oracle needs at most {ORACLE_MAX_RELAYS} relay points, got {0}")]
    OracleTooLarge(usize),
    #[error("{0} is not a backbone vertex of this graph")]
    BadEndpoint(Vertex),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl WeightError {
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, WeightError::Invariant(_))
    }
}

/// Symmetric positive weights on vertex pairs.
pub trait EdgeWeights {
    fn weight(&self, a: Vertex, b: Vertex) -> f64;
}

fn vertex_key(v: Vertex) -> u64 {
    match v {
        Vertex::Relay(i) => 2 * i as u64,
        Vertex::Backbone(i) => 2 * i as u64 + 1,
    }
}

/// Unit-mean exponential weights derived from a hash of `(seed, pair)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub seed: u64,
}

pub fn assign_weights(seed: u64) -> WeightAssignment {
    WeightAssignment { seed }
}

impl EdgeWeights for WeightAssignment {
    fn weight(&self, a: Vertex, b: Vertex) -> f64 {
        let (ka, kb) = (vertex_key(a), vertex_key(b));
        let (lo, hi) = if ka <= kb { (ka, kb) } else { (kb, ka) };
        -open_unit(hash_words(&[self.seed, lo, hi])).ln()
    }
}

/// Explicit weights with a fallback for unlisted pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixedWeights {
    map: HashMap<(Vertex, Vertex), f64>,
    pub default: f64,
}

impl FixedWeights {
    pub fn new(default: f64) -> Self {
        Self { map: HashMap::new(), default }
    }

    pub fn set(&mut self, a: Vertex, b: Vertex, w: f64) {
        self.map.insert(if a <= b { (a, b) } else { (b, a) }, w);
    }
}

impl EdgeWeights for FixedWeights {
    fn weight(&self, a: Vertex, b: Vertex) -> f64 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.map.get(&key).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareChainLayout {
    pub edge: usize,
    /// Square side, `r_n / 10`.
    pub a: f64,
    /// Tallest column, in squares.
    pub rows: usize,
    pub columns: usize,
    /// Squares strictly between the ones holding `u` and `v`.
    pub n_interior: usize,
    /// All square centres in walk order, first at `u`, last at `v`.
    pub centers: Vec<Point>,
    /// Centres in the edge frame: along the edge, along the inward normal.
    pub local: Vec<(f64, f64)>,
    /// Usual centre spacing, `4a` unless the single-row fallback is used.
    pub spacing: f64,
    /// `j` such that centres `j` and `j + 1` are further apart than `spacing`.
    pub irregular_gap_index: Option<usize>,
    pub direction: (f64, f64),
    pub normal: (f64, f64),
}

impl SquareChainLayout {
    /// Whether `p` lies in the closed square `j`.
    pub fn contains(&self, j: usize, p: Point) -> bool {
        let c = self.centers[j];
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let s = dx * self.direction.0 + dy * self.direction.1;
        let t = dx * self.normal.0 + dy * self.normal.1;
        let h = self.a / 2.0 * (1.0 + 1e-12);
        s.abs() <= h && t.abs() <= h
    }

    pub fn corners(&self, j: usize) -> [Point; 4] {
        let c = self.centers[j];
        let h = self.a / 2.0;
        let (e, n) = (self.direction, self.normal);
        let at = |s: f64, t: f64| Point::new(c.x + s * e.0 + t * n.0, c.y + s * e.1 + t * n.1);
        [at(-h, -h), at(h, -h), at(h, h), at(-h, h)]
    }

    /// Geometric self-check: disjoint squares inside the unit square, every
    /// consecutive centre gap between `3a + a` and `8a`, and a point in a square
    /// always within `r_n` of any point in the next.
    pub fn validate(&self) -> Result<(), WeightError> {
        let a = self.a;
        let fail = |reason: String| Err(WeightError::Invariant(format!("edge {}: {reason}", self.edge)));
        for j in 0..self.centers.len() {
            if self.corners(j).iter().any(|q| q.x.abs() > HALF || q.y.abs() > HALF) {
                return fail(format!("square {j} leaves the unit square"));
            }
        }
        for i in 0..self.local.len() {
            for j in i + 1..self.local.len() {
                let (p, q) = (self.local[i], self.local[j]);
                let cheb = (p.0 - q.0).abs().max((p.1 - q.1).abs());
                if cheb < 4.0 * a * (1.0 - 1e-9) {
                    return fail(format!("squares {i} and {j} are closer than 4a"));
                }
            }
        }
        for (j, w) in self.local.windows(2).enumerate() {
            let gap = ((w[0].0 - w[1].0).powi(2) + (w[0].1 - w[1].1).powi(2)).sqrt();
            if gap > 8.0 * a * (1.0 + 1e-9) {
                return fail(format!("gap {j} is {gap}, above 8a"));
            }
        }
        Ok(())
    }
}

/// Lays out the square chain for backbone edge `f` with hop budget `l_n`.
/// The interior count `N` is the largest achievable value not above
/// `floor(l_n / 8)`, and must reach `ceil(l_n / 16)`.
pub fn square_chain_layout(gloc: &GLocGraph, f: usize, l_n: u64) -> Result<SquareChainLayout, WeightError> {
    let gamma = gloc.gamma();
    let r_n = gloc.r_n();
    let needed = gamma.l_up() / r_n;
    if (l_n as f64) < needed && ceil_snapped(needed) > l_n {
        return Err(WeightError::BudgetTooSmall { l_n, needed });
    }
    let (u, v) = gamma.edge_points(f);
    let l = gamma.length(f);
    let a = r_n / 10.0;
    let hi = (l_n / 8) as usize;
    let lo = l_n.div_ceil(16) as usize;
    let infeasible = |reason: String| WeightError::LayoutInfeasible { edge: f, reason };

    // regular columns
    let columns = next_integer_above(l / (4.0 * a)) as usize;
    let base = columns % 2;
    let pairs = columns / 2;
    let budget = (hi + 2).saturating_sub(base) / 2;

    let mut local = Vec::new();
    let (spacing, rows, used_columns);
    if budget >= pairs && pairs >= 1 {
        let column_x = |c: usize| if c + 1 == columns { l } else { 4.0 * a * c as f64 };
        let heights: Vec<usize> = (0..pairs).map(|p| budget / pairs + usize::from(p < budget % pairs)).collect();
        if base == 1 {
            local.push((0.0, 0.0));
        }
        for (p, &h) in heights.iter().enumerate() {
            let up = base + 2 * p;
            for k in 0..h {
                local.push((column_x(up), 4.0 * a * k as f64));
            }
            for k in (0..h).rev() {
                local.push((column_x(up + 1), 4.0 * a * k as f64));
            }
        }
        spacing = 4.0 * a;
        rows = heights.iter().copied().max().unwrap_or(1);
        used_columns = columns;
    } else {
        // one row, uniform spacing
        if hi == 0 {
            return Err(infeasible(format!("budget {l_n} leaves no interior square")));
        }
        let s = l / (hi + 1) as f64;
        if s > 8.0 * a * (1.0 + 1e-12) || s < 4.0 * a * (1.0 - 1e-12) {
            return Err(infeasible(format!("row spacing {s} outside [4a, 8a] for a = {a}")));
        }
        for k in 0..hi + 2 {
            let x = if k == hi + 1 { l } else { s * k as f64 };
            local.push((x, 0.0));
        }
        spacing = s;
        rows = 1;
        used_columns = hi + 2;
    }

    let n_interior = local.len() - 2;
    if n_interior < lo || n_interior > hi {
        return Err(infeasible(format!("{n_interior} interior squares outside [{lo}, {hi}]")));
    }
    let (direction, normal) = edge_frame(u, v);
    let centers: Vec<Point> = local
        .iter()
        .map(|&(s, t)| u.add_scaled(direction, s).add_scaled(normal, t))
        .collect();
    let irregular_gap_index = local.windows(2).position(|w| {
        let gap = ((w[0].0 - w[1].0).powi(2) + (w[0].1 - w[1].1).powi(2)).sqrt();
        gap > spacing * (1.0 + 1e-9)
    });
    let layout = SquareChainLayout {
        edge: f,
        a,
        rows,
        columns: used_columns,
        n_interior,
        centers,
        local,
        spacing,
        irregular_gap_index,
        direction,
        normal,
    };
    for j in 0..layout.centers.len() {
        if layout.corners(j).iter().any(|q| q.x.abs() > HALF || q.y.abs() > HALF) {
            return Err(WeightError::SquareOutside { edge: f, square: j });
        }
    }
    layout.validate()?;
    Ok(layout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyPathResult {
    pub path: RelayPath,
    /// Weight of every hop, in path order; the last hop ends at `v`.
    pub hop_weights: Vec<f64>,
    pub total: f64,
    pub min_hop_weight: f64,
    /// Eligible candidates seen in each interior square.
    pub occupancy: Vec<usize>,
}

/// Walks the layout from `u`: in each interior square, among the eligible
/// relay points within `r_n` of the current vertex, takes the one whose edge
/// from the current vertex is heaviest (lowest index on ties); then steps to
/// `v`.
pub fn build_greedy_max_weight_path<W: EdgeWeights + ?Sized>(
    gloc: &GLocGraph,
    weights: &W,
    layout: &SquareChainLayout,
    forbidden: &[bool],
) -> Result<GreedyPathResult, WeightError> {
    let f = layout.edge;
    let (a_idx, b_idx) = gloc.gamma().edges()[f];
    let r_n = gloc.r_n();
    let r2 = r_n * r_n;
    let probe = layout.a / std::f64::consts::SQRT_2 * (1.0 + 1e-9);

    let mut current = Vertex::Backbone(a_idx);
    let mut vertices = vec![current];
    let mut hop_weights = Vec::with_capacity(layout.n_interior + 1);
    let mut occupancy = Vec::with_capacity(layout.n_interior);
    for j in 1..=layout.n_interior {
        let here = gloc.pos(current);
        let mut best: Option<(usize, f64)> = None;
        let mut seen = 0;
        for i in gloc.relays_within(layout.centers[j], probe) {
            let p = gloc.rgg().points()[i];
            if forbidden.get(i).copied().unwrap_or(false) || !layout.contains(j, p) || p.dist2(&here) > r2 {
                continue;
            }
            seen += 1;
            let w = weights.weight(current, Vertex::Relay(i));
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        let (i, w) = best.ok_or(WeightError::EmptySquare { edge: f, square: j - 1 })?;
        occupancy.push(seen);
        hop_weights.push(w);
        current = Vertex::Relay(i);
        vertices.push(current);
    }
    let end = Vertex::Backbone(b_idx);
    hop_weights.push(weights.weight(current, end));
    vertices.push(end);

    let total = hop_weights.iter().sum();
    let min_hop_weight = hop_weights.iter().copied().fold(f64::INFINITY, f64::min);
    let result = GreedyPathResult { path: RelayPath { vertices }, hop_weights, total, min_hop_weight, occupancy };
    check_greedy_path(gloc, &result, f)?;
    Ok(result)
}

fn check_greedy_path(gloc: &GLocGraph, g: &GreedyPathResult, f: usize) -> Result<(), WeightError> {
    let r_n = gloc.r_n();
    let vs = &g.path.vertices;
    let pts: Vec<Point> = vs.iter().map(|&v| gloc.pos(v)).collect();
    for (h, w) in pts.windows(2).enumerate() {
        if w[0].dist2(&w[1]) > r_n * r_n {
            return Err(WeightError::Invariant(format!("edge {f}: hop {h} longer than r_n")));
        }
    }
    let spacing = 0.3 * r_n - GEOM_SLACK;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].dist(&pts[j]) < spacing {
                return Err(WeightError::Invariant(format!(
                    "edge {f}: path vertices {} and {} closer than 3 r_n / 10",
                    vs[i], vs[j]
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EupCheck {
    pub holds: bool,
    pub max_weight: f64,
}

/// Whether every edge of `G_loc` has weight at most `M log n`.
pub fn check_eup<W: EdgeWeights + ?Sized>(gloc: &GLocGraph, weights: &W, m: f64, n: usize) -> Result<EupCheck, WeightError> {
    if !(m > 2.0) {
        return Err(WeightError::SmallM(m));
    }
    let mut max_weight = 0.0f64;
    gloc.for_each_edge(|a, b| max_weight = max_weight.max(weights.weight(a, b)));
    Ok(EupCheck { holds: max_weight <= m * (n as f64).ln(), max_weight })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    /// `e0 L_n log n`.
    pub delta_n: f64,
    pub lower_achieved: f64,
    /// `e0 M L_n log n`.
    pub upper_cert: f64,
    pub eup_holds: bool,
    pub max_edge_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxWeightConstruction {
    pub rgg: RelayRgg,
    pub greedy: Vec<GreedyPathResult>,
    pub layouts: Vec<SquareChainLayout>,
    pub estimate: WeightEstimate,
}

/// Builds one greedy path per backbone edge in ascending order, never reusing
/// relay points of earlier paths.
pub fn build_max_weight_relay_rgg<W: EdgeWeights + ?Sized>(
    gloc: &GLocGraph,
    weights: &W,
    l_n: u64,
    m: f64,
) -> Result<MaxWeightConstruction, WeightError> {
    if !(m > 2.0) {
        return Err(WeightError::SmallM(m));
    }
    let gamma = gloc.gamma();
    let layouts = (0..gamma.e0())
        .map(|f| square_chain_layout(gloc, f, l_n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut forbidden = vec![false; gloc.n()];
    let mut greedy = Vec::with_capacity(layouts.len());
    let lo = l_n.div_ceil(16) as usize;
    for layout in &layouts {
        let g = build_greedy_max_weight_path(gloc, weights, layout, &forbidden)?;
        let hops = g.path.hops();
        if hops < lo || hops as u64 > l_n {
            return Err(WeightError::Invariant(format!(
                "edge {}: {hops} hops outside [{lo}, {l_n}]",
                layout.edge
            )));
        }
        for v in g.path.interior() {
            if let Vertex::Relay(i) = v {
                forbidden[*i] = true;
            }
        }
        greedy.push(g);
    }
    let rgg = RelayRgg::new(greedy.iter().map(|g| g.path.clone()).collect());
    let report = validate_relay_rgg(&rgg, gloc);
    if !report.is_valid() {
        return Err(WeightError::Invariant(format!("relay graph fails validation: {:?}", report.violations)));
    }

    let n = gloc.n();
    let eup = check_eup(gloc, weights, m, n)?;
    let log_n = (n as f64).ln();
    let e0 = gamma.e0() as f64;
    let lower_achieved: f64 = greedy.iter().map(|g| g.total).sum();
    let upper_cert = e0 * m * l_n as f64 * log_n;
    if eup.holds && lower_achieved > upper_cert * (1.0 + 1e-12) {
        return Err(WeightError::Invariant(format!(
            "weight {lower_achieved} exceeds certificate {upper_cert} although all edges are below M log n"
        )));
    }
    let estimate = WeightEstimate {
        delta_n: e0 * l_n as f64 * log_n,
        lower_achieved,
        upper_cert,
        eup_holds: eup.holds,
        max_edge_weight: eup.max_weight,
    };
    Ok(MaxWeightConstruction { rgg, greedy, layouts, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleOutcome {
    Path { total: f64, vertices: Vec<Vertex> },
    /// No relay path with at most `L_n` edges joins the endpoints.
    NoPath,
}

impl OracleOutcome {
    pub fn total(&self) -> Option<f64> {
        match self {
            OracleOutcome::Path { total, .. } => Some(*total),
            OracleOutcome::NoPath => None,
        }
    }
}

/// Exact maximum total weight over simple paths from backbone vertex `u` to
/// backbone vertex `v` through relay points with at most `l_n` edges. Dynamic
/// programming over (visited set, last vertex).
pub fn oracle_max_weight_path<W: EdgeWeights + ?Sized>(
    gloc: &GLocGraph,
    weights: &W,
    u: usize,
    v: usize,
    l_n: u64,
) -> Result<OracleOutcome, WeightError> {
    let k = gloc.n();
    if k > ORACLE_MAX_RELAYS {
        return Err(WeightError::OracleTooLarge(k));
    }
    for b in [u, v] {
        if !gloc.contains(Vertex::Backbone(b)) {
            return Err(WeightError::BadEndpoint(Vertex::Backbone(b)));
        }
    }
    let (bu, bv) = (Vertex::Backbone(u), Vertex::Backbone(v));
    let relay = Vertex::Relay;
    let states = 1usize << k;
    let mut best = vec![f64::NEG_INFINITY; states * k.max(1)];
    let mut parent = vec![usize::MAX; states * k.max(1)];
    for i in 0..k {
        if gloc.adjacent(bu, relay(i)) {
            best[(1 << i) * k + i] = weights.weight(bu, relay(i));
        }
    }
    let mut answer: Option<(f64, usize, usize)> = None;
    for mask in 1..states {
        let edges_so_far = mask.count_ones() as u64;
        for last in 0..k {
            let here = best[mask * k + last];
            if here == f64::NEG_INFINITY {
                continue;
            }
            if edges_so_far < l_n && gloc.adjacent(relay(last), bv) {
                let total = here + weights.weight(relay(last), bv);
                if answer.map_or(true, |(t, _, _)| total > t) {
                    answer = Some((total, mask, last));
                }
            }
            if edges_so_far + 1 >= l_n {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 || !gloc.adjacent(relay(last), relay(next)) {
                    continue;
                }
                let slot = (mask | 1 << next) * k + next;
                let cand = here + weights.weight(relay(last), relay(next));
                if cand > best[slot] {
                    best[slot] = cand;
                    parent[slot] = last;
                }
            }
        }
    }
    Ok(match answer {
        None => OracleOutcome::NoPath,
        Some((total, mut mask, mut last)) => {
            let mut rev = vec![bv];
            loop {
                rev.push(relay(last));
                let p = parent[mask * k + last];
                mask &= !(1 << last);
                if p == usize::MAX {
                    break;
                }
                last = p;
            }
            rev.push(bu);
            rev.reverse();
            OracleOutcome::Path { total, vertices: rev }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;
    use crate::graphs::{build_gloc, build_rgg, DetGraph};
    use approx::assert_relative_eq;

    fn gloc_with(gamma: DetGraph, points: Vec<Point>, r: f64) -> GLocGraph {
        build_gloc(build_rgg(PointSet::new(points), r).unwrap(), gamma).unwrap()
    }

    #[test]
    fn weights_are_deterministic_and_symmetric() {
        let w = assign_weights(11);
        let (a, b) = (Vertex::Relay(4), Vertex::Backbone(0));
        assert_eq!(w.weight(a, b), w.weight(a, b));
        assert_eq!(w.weight(a, b), w.weight(b, a));
        assert_ne!(w.weight(a, b), assign_weights(12).weight(a, b));
        assert_ne!(w.weight(Vertex::Relay(0), Vertex::Relay(1)), w.weight(Vertex::Relay(0), Vertex::Relay(2)));
    }

    #[test]
    fn weight_moments() {
        let w = assign_weights(3);
        let xs: Vec<f64> = (0..100_000).map(|i| w.weight(Vertex::Relay(i), Vertex::Relay(i + 1))).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "variance {var}");
        assert!(xs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn layout_for_large_budget() {
        let g = gloc_with(DetGraph::segment(0.32).unwrap(), vec![], 0.08);
        let layout = square_chain_layout(&g, 0, 320).unwrap();
        assert!((20..=40).contains(&layout.n_interior), "N = {}", layout.n_interior);
        assert_eq!(layout.n_interior, 39);
        assert_relative_eq!(layout.a, 0.008);
        let (u, v) = g.gamma().edge_points(0);
        assert!(layout.contains(0, u));
        assert!(layout.contains(layout.centers.len() - 1, v));
        assert_eq!(layout.irregular_gap_index, None);
        layout.validate().unwrap();
    }

    #[test]
    fn layout_with_irregular_gap() {
        // l / 4a = 3.75: the last column sits 0.75 * 4a + 4a past the previous one
        let g = gloc_with(DetGraph::segment(0.3).unwrap(), vec![], 0.2);
        let layout = square_chain_layout(&g, 0, 32).unwrap();
        let j = layout.irregular_gap_index.expect("one irregular gap");
        let (p, q) = (layout.local[j], layout.local[j + 1]);
        let gap = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
        assert!(gap > 4.0 * layout.a && gap < 8.0 * layout.a);
        let others = layout.local.windows(2).enumerate().filter(|(i, _)| *i != j);
        for (_, w) in others {
            let d = ((w[0].0 - w[1].0).powi(2) + (w[0].1 - w[1].1).powi(2)).sqrt();
            assert_relative_eq!(d, 4.0 * layout.a, epsilon = 1e-12);
        }
    }

    #[test]
    fn layout_at_minimum_budget() {
        let g = gloc_with(DetGraph::segment(0.1).unwrap(), vec![], 0.08);
        let layout = square_chain_layout(&g, 0, 16).unwrap();
        assert!((1..=2).contains(&layout.n_interior));
        layout.validate().unwrap();
    }

    #[test]
    fn layout_single_row_fallback() {
        let g = gloc_with(DetGraph::segment(0.32).unwrap(), vec![], 0.08);
        let layout = square_chain_layout(&g, 0, 64).unwrap();
        assert_eq!(layout.n_interior, 8);
        assert_eq!(layout.rows, 1);
        assert_relative_eq!(layout.spacing, 0.32 / 9.0, epsilon = 1e-15);
        layout.validate().unwrap();
    }

    #[test]
    fn layout_rejects_small_budget_and_strip_outside() {
        let g = gloc_with(DetGraph::segment(0.32).unwrap(), vec![], 0.08);
        assert!(matches!(square_chain_layout(&g, 0, 3), Err(WeightError::BudgetTooSmall { .. })));
        let edge = DetGraph::new(vec![Point::new(-0.4, 0.498), Point::new(-0.08, 0.498)], vec![(0, 1)]).unwrap();
        let g = gloc_with(edge, vec![], 0.08);
        assert!(matches!(square_chain_layout(&g, 0, 64), Err(WeightError::SquareOutside { edge: 0, square: 0 })));
    }

    /// One point at the centre of each interior square.
    fn forced(l: f64, r: f64, l_n: u64) -> (GLocGraph, SquareChainLayout) {
        let gamma = DetGraph::segment(l).unwrap();
        let probe = gloc_with(gamma.clone(), vec![], r);
        let layout = square_chain_layout(&probe, 0, l_n).unwrap();
        let pts = layout.centers[1..layout.centers.len() - 1].to_vec();
        (gloc_with(gamma, pts, r), layout)
    }

    #[test]
    fn forced_greedy_path_sums_pair_weights() {
        let (g, layout) = forced(0.32, 0.08, 64);
        let w = assign_weights(5);
        let res = build_greedy_max_weight_path(&g, &w, &layout, &[]).unwrap();
        assert_eq!(res.path.hops(), 9);
        let expected: f64 = res.path.vertices.windows(2).map(|p| w.weight(p[0], p[1])).sum();
        assert_relative_eq!(res.total, expected, epsilon = 1e-12);
        assert_eq!(res.occupancy, vec![1; 8]);
    }

    #[test]
    fn greedy_picks_heavier_edge() {
        let gamma = DetGraph::segment(0.1).unwrap();
        let probe = gloc_with(gamma.clone(), vec![], 0.08);
        let layout = square_chain_layout(&probe, 0, 16).unwrap();
        let c = layout.centers[1];
        let mut pts = vec![Point::new(c.x - 0.001, c.y), Point::new(c.x + 0.001, c.y)];
        pts.extend(layout.centers[2..layout.centers.len() - 1].iter().copied());
        let g = gloc_with(gamma, pts, 0.08);
        let mut w = FixedWeights::new(1.0);
        w.set(Vertex::Backbone(0), Vertex::Relay(0), 0.3);
        w.set(Vertex::Backbone(0), Vertex::Relay(1), 2.1);
        let res = build_greedy_max_weight_path(&g, &w, &layout, &[]).unwrap();
        assert_eq!(res.path.vertices[1], Vertex::Relay(1));
        assert_eq!(res.hop_weights[0], 2.1);
        let blocked = build_greedy_max_weight_path(&g, &w, &layout, &[true, true]).unwrap_err();
        assert_eq!(blocked, WeightError::EmptySquare { edge: 0, square: 0 });
    }

    #[test]
    fn eup_thresholds() {
        let (g, _) = forced(0.32, 0.08, 64);
        let low = FixedWeights::new(0.5);
        assert!(check_eup(&g, &low, 3.0, 100).unwrap().holds);
        let mut high = FixedWeights::new(0.5);
        high.set(Vertex::Relay(0), Vertex::Relay(1), 3.0 * (100f64).ln() + 1.0);
        let res = check_eup(&g, &high, 3.0, 100).unwrap();
        assert!(!res.holds);
        assert_eq!(check_eup(&g, &low, 2.0, 100).unwrap_err(), WeightError::SmallM(2.0));
    }

    #[test]
    fn single_edge_rgg_matches_greedy() {
        let (g, layout) = forced(0.32, 0.08, 64);
        let w = assign_weights(9);
        let single = build_greedy_max_weight_path(&g, &w, &layout, &[]).unwrap();
        let built = build_max_weight_relay_rgg(&g, &w, 64, 3.0).unwrap();
        assert_eq!(built.rgg.paths[0], single.path);
        assert_relative_eq!(built.estimate.lower_achieved, single.total);
        let log_n = (g.n() as f64).ln();
        assert_relative_eq!(built.estimate.delta_n, 64.0 * log_n);
        assert_relative_eq!(built.estimate.upper_cert / built.estimate.delta_n, 3.0);
    }

    #[test]
    fn oracle_single_path_and_no_path() {
        let gamma = DetGraph::segment(0.12).unwrap();
        let pts = vec![Point::new(-0.01, 0.0)];
        let g = gloc_with(gamma, pts, 0.08);
        let mut w = FixedWeights::new(1.0);
        w.set(Vertex::Backbone(0), Vertex::Relay(0), 0.7);
        match oracle_max_weight_path(&g, &w, 0, 1, 2).unwrap() {
            OracleOutcome::Path { total, vertices } => {
                assert_relative_eq!(total, 1.7);
                assert_eq!(vertices, vec![Vertex::Backbone(0), Vertex::Relay(0), Vertex::Backbone(1)]);
            }
            OracleOutcome::NoPath => panic!("path expected"),
        }
        assert_eq!(oracle_max_weight_path(&g, &w, 0, 1, 1).unwrap(), OracleOutcome::NoPath);
    }

    #[test]
    fn oracle_prefers_longer_heavier_route() {
        let gamma = DetGraph::segment(0.12).unwrap();
        let pts = vec![Point::new(-0.01, 0.0), Point::new(-0.02, 0.03), Point::new(0.02, 0.03)];
        let g = gloc_with(gamma, pts, 0.08);
        let mut w = FixedWeights::new(0.1);
        w.set(Vertex::Backbone(0), Vertex::Relay(1), 5.0);
        w.set(Vertex::Relay(1), Vertex::Relay(2), 5.0);
        w.set(Vertex::Relay(2), Vertex::Backbone(1), 5.0);
        let out = oracle_max_weight_path(&g, &w, 0, 1, 10).unwrap();
        assert_relative_eq!(out.total().unwrap(), 15.0);
        // two hops only reach v through relay 0
        let capped = oracle_max_weight_path(&g, &w, 0, 1, 2).unwrap();
        assert_relative_eq!(capped.total().unwrap(), 0.2);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let pts = (0..13).map(|i| Point::new(-0.4 + 0.01 * i as f64, -0.4)).collect();
        let g = gloc_with(DetGraph::segment(0.12).unwrap(), pts, 0.08);
        assert_eq!(
            oracle_max_weight_path(&g, &FixedWeights::new(1.0), 0, 1, 5).unwrap_err(),
            WeightError::OracleTooLarge(13)
        );
    }
}
