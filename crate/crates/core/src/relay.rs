//! Circle-chain relay paths and iteratively built vertex-disjoint relay graphs.
//!
//! For a backbone edge `f = (u, v)` with `K = l(f) / r_n > 1`, the chain places
//! `W - 1` small disks with centres spaced `r_n (1 - delta)` apart along `f`,
//! all shifted by `delta r_n / L` towards the inside of the square, where
//! `W = K / (1 - delta)` is an integer. Picking one relay point per disk gives
//! a relay path of exactly `W` hops whose consecutive points are within `r_n`
//! of each other.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, HALF};
use crate::graphs::{DetGraph, GLocGraph, Vertex};
use crate::{next_integer_above, RATIO_SLACK};

/// Disk-scale constant `L`; disk radius is `delta r_n / L`. Must exceed 16.
pub const DISK_SCALE: f64 = 17.0;

/// Absolute slack for geometric distance assertions.
pub const GEOM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChainMode {
    /// `gamma = 1/2`: every path has `alpha(K)` or `alpha(K) + 1` hops.
    TwoPoint,
    /// `gamma = K eps`: every path has at most `K (1 + eps) + 1` hops.
    Ratio { eps: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelayError {
    #[error("ratio K = {k} must exceed 1")]
    RatioTooSmall { k: f64 },
    #[error("ratio mode needs eps > 0, got {0}")]
    BadEps(f64),
    #[error("no integer chain length for K = {k}, gamma = {gamma}")]
    NoFeasibleChain { k: f64, gamma: f64 },
    #[error("edge length {length} does not match K r_n = {expected}")]
    LengthMismatch { length: f64, expected: f64 },
    #[error("backbone edge {edge} has ratio {k} <= 1")]
    ShortEdge { edge: usize, k: f64 },
    #[error("disk {disk} of edge {edge} leaves the unit square")]
    DiskOutside { edge: usize, disk: usize },
    #[error("disk {disk} of edge {edge} holds no eligible relay point")]
    EmptyDisk { edge: usize, disk: usize },
    #[error("edge {0} does not exist")]
    UnknownEdge(usize),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl RelayError {
    /// Deterministic invariant failures, as opposed to a construction that
    /// simply did not find enough points.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, RelayError::Invariant(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleChainParams {
    /// `d(u, v) / r_n`.
    pub k: f64,
    pub gamma: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub delta: f64,
    /// Hop count of the chain.
    pub w: usize,
}

/// Chooses the smallest integer `W` with `delta = 1 - K / W` in
/// `(eta1, eta2]`. Since `eta1 = gamma / (K + gamma)` and
/// `eta2 = (1 + gamma) / (1 + gamma + K)` this window is
/// `K + gamma < W <= K + gamma + 1`.
pub fn make_circle_chain_params(k: f64, mode: ChainMode) -> Result<CircleChainParams, RelayError> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(RelayError::RatioTooSmall { k });
    }
    let gamma = match mode {
        ChainMode::TwoPoint => 0.5,
        ChainMode::Ratio { eps } if eps > 0.0 && eps.is_finite() => k * eps,
        ChainMode::Ratio { eps } => return Err(RelayError::BadEps(eps)),
    };
    let eta1 = gamma / (k + gamma);
    let eta2 = (1.0 + gamma) / (1.0 + gamma + k);
    let w = next_integer_above(k + gamma);
    let delta = 1.0 - k / w as f64;
    let ok = delta > eta1 - RATIO_SLACK && delta <= eta2 + RATIO_SLACK && w >= 2;
    if !ok || w > usize::MAX as u64 {
        return Err(RelayError::NoFeasibleChain { k, gamma });
    }
    Ok(CircleChainParams { k, gamma, eta1, eta2, delta, w: w as usize })
}

impl CircleChainParams {
    pub fn disk_radius(&self, r_n: f64) -> f64 {
        self.delta * r_n / DISK_SCALE
    }

    /// Upper bound on consecutive chain distances, `r_n (1 - delta) + 2 delta r_n / L`.
    pub fn max_hop(&self, r_n: f64) -> f64 {
        r_n * (1.0 - self.delta) + 2.0 * self.disk_radius(r_n)
    }

    /// Lower bound on distances between chain points, `r_n (1 - 3 delta / 2)`.
    pub fn min_spacing(&self, r_n: f64) -> f64 {
        r_n * (1.0 - 1.5 * self.delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskChain {
    pub centers: Vec<Point>,
    pub radius: f64,
    /// Unit vector from `u` to `v`.
    pub direction: (f64, f64),
    /// Unit normal along which the centres are offset.
    pub normal: (f64, f64),
}

/// Unit direction of `u -> v` and the unit normal pointing towards the centre
/// of the square (left normal when the edge's line passes through the centre).
pub(crate) fn edge_frame(u: Point, v: Point) -> ((f64, f64), (f64, f64)) {
    let len = u.dist(&v);
    let e = ((v.x - u.x) / len, (v.y - u.y) / len);
    let left = (-e.1, e.0);
    let mid = Point::new((u.x + v.x) / 2.0, (u.y + v.y) / 2.0);
    let towards_center = -(left.0 * mid.x + left.1 * mid.y);
    let normal = if towards_center < -GEOM_SLACK { (-left.0, -left.1) } else { left };
    (e, normal)
}

/// Lays out the `W - 1` disks of the chain for edge `u -> v`. `edge` is only
/// used to label errors.
pub fn disk_chain(
    u: Point,
    v: Point,
    params: &CircleChainParams,
    r_n: f64,
    edge: usize,
) -> Result<DiskChain, RelayError> {
    let length = u.dist(&v);
    let expected = params.k * r_n;
    if (length - expected).abs() > RATIO_SLACK * expected.max(1e-300) {
        return Err(RelayError::LengthMismatch { length, expected });
    }
    let (direction, normal) = edge_frame(u, v);
    let radius = params.disk_radius(r_n);
    let step = r_n * (1.0 - params.delta);
    let mut centers = Vec::with_capacity(params.w - 1);
    for i in 1..params.w {
        let c = u.add_scaled(direction, i as f64 * step).add_scaled(normal, radius);
        if c.x.abs() + radius > HALF || c.y.abs() + radius > HALF {
            return Err(RelayError::DiskOutside { edge, disk: i - 1 });
        }
        centers.push(c);
    }
    Ok(DiskChain { centers, radius, direction, normal })
}

/// A relay path: backbone endpoints, relay interior.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayPath {
    pub vertices: Vec<Vertex>,
}

impl RelayPath {
    pub fn hops(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn interior(&self) -> &[Vertex] {
        let n = self.vertices.len();
        if n < 2 {
            &[]
        } else {
            &self.vertices[1..n - 1]
        }
    }
}

/// Relay paths indexed by backbone edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayRgg {
    pub paths: Vec<RelayPath>,
    pub total_edges: usize,
}

impl RelayRgg {
    pub fn new(paths: Vec<RelayPath>) -> Self {
        let total_edges = paths.iter().map(RelayPath::hops).sum();
        Self { paths, total_edges }
    }
}

const FREE: u32 = u32::MAX;

/// Relay points used so far, with the backbone edge that used them.
pub(crate) struct Owners(Vec<u32>);

impl Owners {
    pub(crate) fn new(n: usize) -> Self {
        Owners(vec![FREE; n])
    }

    pub(crate) fn owner(&self, i: usize) -> Option<usize> {
        self.0.get(i).and_then(|&o| (o != FREE).then_some(o as usize))
    }

    pub(crate) fn claim(&mut self, path: &RelayPath, edge: usize) {
        for v in path.interior() {
            if let Vertex::Relay(i) = v {
                self.0[*i] = edge as u32;
            }
        }
    }
}

/// Builds the chain path for edge `f`, skipping relay points for which
/// `forbidden` is true (indices past the end of `forbidden` are allowed).
/// Within a disk the lowest eligible index wins.
pub fn build_relay_path(
    gloc: &GLocGraph,
    f: usize,
    params: &CircleChainParams,
    forbidden: &[bool],
) -> Result<RelayPath, RelayError> {
    let blocked = |i: usize| forbidden.get(i).copied().unwrap_or(false);
    chain_path(gloc, f, params, blocked, |_| Ok(()))
}

fn chain_path<B, C>(
    gloc: &GLocGraph,
    f: usize,
    params: &CircleChainParams,
    blocked: B,
    mut inspect_disk: C,
) -> Result<RelayPath, RelayError>
where
    B: Fn(usize) -> bool,
    C: FnMut(&[usize]) -> Result<(), RelayError>,
{
    let gamma = gloc.gamma();
    if f >= gamma.e0() {
        return Err(RelayError::UnknownEdge(f));
    }
    let (a, b) = gamma.edges()[f];
    let (u, v) = gamma.edge_points(f);
    let r_n = gloc.r_n();
    let chain = disk_chain(u, v, params, r_n, f)?;

    let mut vertices = Vec::with_capacity(params.w + 1);
    vertices.push(Vertex::Backbone(a));
    for (disk, c) in chain.centers.iter().enumerate() {
        let candidates = gloc.relays_within(*c, chain.radius);
        inspect_disk(&candidates)?;
        let pick = candidates
            .into_iter()
            .find(|&i| !blocked(i))
            .ok_or(RelayError::EmptyDisk { edge: f, disk })?;
        vertices.push(Vertex::Relay(pick));
    }
    vertices.push(Vertex::Backbone(b));
    let path = RelayPath { vertices };
    check_chain_path(gloc, f, &path, params)?;
    Ok(path)
}

/// Deterministic properties of a successfully built chain path.
fn check_chain_path(gloc: &GLocGraph, f: usize, path: &RelayPath, params: &CircleChainParams) -> Result<(), RelayError> {
    let r_n = gloc.r_n();
    if path.hops() != params.w {
        return Err(RelayError::Invariant(format!("edge {f}: {} hops, expected {}", path.hops(), params.w)));
    }
    let max_hop = params.max_hop(r_n);
    for (h, pair) in path.vertices.windows(2).enumerate() {
        let d = gloc.pos(pair[0]).dist(&gloc.pos(pair[1]));
        if d > max_hop + GEOM_SLACK || d > r_n {
            return Err(RelayError::Invariant(format!("edge {f}: hop {h} has length {d} > {max_hop}")));
        }
    }
    let spacing = params.min_spacing(r_n);
    let interior = path.interior();
    for i in 0..interior.len() {
        for j in i + 1..interior.len() {
            let d = gloc.pos(interior[i]).dist(&gloc.pos(interior[j]));
            if d < spacing - GEOM_SLACK {
                return Err(RelayError::Invariant(format!(
                    "edge {f}: interior vertices {} and {} are {d} apart, below {spacing}",
                    interior[i], interior[j]
                )));
            }
        }
    }
    Ok(())
}

/// A relay graph together with construction diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayConstruction {
    pub rgg: RelayRgg,
    /// Largest number of points of one earlier path found in one later disk.
    pub max_reuse: usize,
}

/// Builds one chain path per backbone edge in ascending edge order. Relay
/// points used by earlier paths are unavailable to later ones; shared backbone
/// endpoints are reused. The result is re-validated before it is returned.
pub fn build_relay_rgg(gloc: &GLocGraph, mode: ChainMode) -> Result<RelayConstruction, RelayError> {
    let gamma = gloc.gamma();
    let r_n = gloc.r_n();
    let params = (0..gamma.e0())
        .map(|f| {
            let k = gamma.length(f) / r_n;
            if !(k > 1.0) {
                return Err(RelayError::ShortEdge { edge: f, k });
            }
            make_circle_chain_params(k, mode)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut owners = Owners::new(gloc.n());
    let mut paths = Vec::with_capacity(gamma.e0());
    let mut max_reuse = 0usize;
    for (f, p) in params.iter().enumerate() {
        let path = {
            let owners_ref = &owners;
            let mut per_path: HashMap<usize, usize> = HashMap::new();
            chain_path(
                gloc,
                f,
                p,
                |i| owners_ref.owner(i).is_some(),
                |candidates| {
                    per_path.clear();
                    for &i in candidates {
                        if let Some(o) = owners_ref.owner(i) {
                            *per_path.entry(o).or_default() += 1;
                        }
                    }
                    let worst = per_path.values().copied().max().unwrap_or(0);
                    max_reuse = max_reuse.max(worst);
                    if worst > 1 {
                        return Err(RelayError::Invariant(format!(
                            "edge {f}: a disk holds {worst} points of one earlier path"
                        )));
                    }
                    Ok(())
                },
            )?
        };
        owners.claim(&path, f);
        paths.push(path);
    }

    let rgg = RelayRgg::new(paths);
    let report = validate_relay_rgg(&rgg, gloc);
    if !report.is_valid() {
        return Err(RelayError::Invariant(format!("relay graph fails validation: {:?}", report.violations)));
    }
    if !lower_bound_holds(rgg.total_edges, gamma.l_tot(), r_n) {
        return Err(RelayError::Invariant(format!(
            "{} edges of length <= {r_n} cannot cover total length {}",
            rgg.total_edges,
            gamma.l_tot()
        )));
    }
    Ok(RelayConstruction { rgg, max_reuse })
}

/// `total_edges * r_n >= l_tot` up to `1e-9`.
pub fn lower_bound_holds(total_edges: usize, l_tot: f64, r_n: f64) -> bool {
    total_edges as f64 * r_n >= l_tot - 1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    PathCount { expected: usize, found: usize },
    EndpointMismatch { edge: usize },
    UnknownVertex { edge: usize, vertex: Vertex },
    BackboneInterior { edge: usize, vertex: Vertex },
    RepeatedVertex { edge: usize, vertex: Vertex },
    HopTooLong { edge: usize, hop: usize, length: f64 },
    /// Paths of edges without a common endpoint share a vertex.
    SharedVertex { edges: (usize, usize), vertex: Vertex },
    /// Paths of edges with a common endpoint share some other vertex.
    ExtraSharedVertex { edges: (usize, usize), vertex: Vertex },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the relay graph conditions: each path joins the endpoints of its
/// edge through relay points with hops of length at most `r_n`; paths of
/// edges without a common endpoint are vertex-disjoint; paths of edges with a
/// common endpoint share exactly that endpoint.
pub fn validate_relay_rgg(rr: &RelayRgg, gloc: &GLocGraph) -> ValidationReport {
    let gamma = gloc.gamma();
    let r2 = gloc.r_n() * gloc.r_n();
    let mut violations = Vec::new();
    if rr.paths.len() != gamma.e0() {
        violations.push(Violation::PathCount { expected: gamma.e0(), found: rr.paths.len() });
    }
    let mut users: HashMap<Vertex, Vec<usize>> = HashMap::new();
    for (edge, path) in rr.paths.iter().enumerate().take(gamma.e0()) {
        let vs = &path.vertices;
        let (a, b) = gamma.edges()[edge];
        let ends_ok = vs.len() >= 2
            && ((vs[0] == Vertex::Backbone(a) && vs[vs.len() - 1] == Vertex::Backbone(b))
                || (vs[0] == Vertex::Backbone(b) && vs[vs.len() - 1] == Vertex::Backbone(a)));
        if !ends_ok {
            violations.push(Violation::EndpointMismatch { edge });
        }
        let mut unknown = false;
        for (pos, &vertex) in vs.iter().enumerate() {
            if !gloc.contains(vertex) {
                violations.push(Violation::UnknownVertex { edge, vertex });
                unknown = true;
            } else if pos > 0 && pos + 1 < vs.len() && vertex.is_backbone() {
                violations.push(Violation::BackboneInterior { edge, vertex });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &vertex in vs {
            if !seen.insert(vertex) {
                violations.push(Violation::RepeatedVertex { edge, vertex });
            } else {
                users.entry(vertex).or_default().push(edge);
            }
        }
        if unknown {
            continue;
        }
        for (hop, pair) in vs.windows(2).enumerate() {
            let d2 = gloc.pos(pair[0]).dist2(&gloc.pos(pair[1]));
            let bb = pair[0].is_backbone() && pair[1].is_backbone();
            if d2 > r2 || bb {
                violations.push(Violation::HopTooLong { edge, hop, length: d2.sqrt() });
            }
        }
    }
    let mut shared: Vec<(Vertex, Vec<usize>)> = users.into_iter().filter(|(_, e)| e.len() > 1).collect();
    shared.sort_by_key(|(v, _)| *v);
    for (vertex, edges) in shared {
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (f, g) = (edges[i], edges[j]);
                match gamma.shared_endpoint(f, g) {
                    Some(c) if vertex == Vertex::Backbone(c) => {}
                    Some(_) => violations.push(Violation::ExtraSharedVertex { edges: (f, g), vertex }),
                    None => violations.push(Violation::SharedVertex { edges: (f, g), vertex }),
                }
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    /// `l_tot / r_n`.
    pub lower: f64,
    /// Total edge count of the constructed relay graph, infinite on failure.
    pub achieved: f64,
    /// `alpha(K_f)` per backbone edge.
    pub per_edge_targets: Vec<u64>,
    /// `achieved <= lower + 2 e0`.
    pub within_additive: bool,
    /// `achieved <= lower (1 + eps)`; only evaluated in ratio mode.
    pub within_ratio: Option<bool>,
}

pub fn length_bounds(rr: Option<&RelayRgg>, gamma: &DetGraph, r_n: f64, mode: ChainMode) -> LengthEstimate {
    let lower = gamma.l_tot() / r_n;
    let achieved = rr.map_or(f64::INFINITY, |r| r.total_edges as f64);
    let per_edge_targets = (0..gamma.e0()).map(|f| next_integer_above(gamma.length(f) / r_n)).collect();
    let within_additive = achieved <= lower + 2.0 * gamma.e0() as f64;
    let within_ratio = match mode {
        ChainMode::TwoPoint => None,
        ChainMode::Ratio { eps } => Some(achieved <= lower * (1.0 + eps) * (1.0 + RATIO_SLACK)),
    };
    LengthEstimate { lower, achieved, per_edge_targets, within_additive, within_ratio }
}
