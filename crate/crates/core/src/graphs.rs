//! Backbone graphs, random geometric graphs and the combined graph `G_loc`.
//!
//! `G_loc` has two kinds of vertices: backbone vertices of the deterministic
//! graph and relay vertices (the sampled points). Relay vertices are adjacent
//! when they are at distance at most `r_n`; a backbone vertex is adjacent to
//! every relay vertex within `r_n`. Two backbone vertices are never adjacent.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, GridIndex, Point, PointSet};
use crate::{next_integer_above, RATIO_SLACK};

/// Affine shrink applied to the parallel-edge example so that it fits in the
/// open square.
pub const PARALLEL_SHRINK: f64 = 0.9;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("backbone vertex {index} at ({x}, {y}) is not inside the open unit square")]
    VertexOutside { index: usize, x: f64, y: f64 },
    #[error("backbone vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("edge {edge} refers to vertex {vertex}, which does not exist")]
    UnknownEdgeVertex { edge: usize, vertex: usize },
    #[error("edge {0} repeats an earlier edge")]
    DuplicateEdge(usize),
    #[error("backbone graph has no edges")]
    NoEdges,
    #[error("adjacency distance must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("vertex {0} does not exist")]
    InvalidVertex(Vertex),
    #[error("relay distance needs two distinct backbone vertices")]
    SameEndpoints,
    #[error("parallel example needs at least 2 edges, got {0}")]
    TooFewParallelEdges(usize),
    #[error("backbone file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A vertex of `G_loc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    /// Vertex of the deterministic backbone graph.
    Backbone(usize),
    /// Sampled point of the random geometric graph.
    Relay(usize),
}

impl Vertex {
    pub fn is_relay(&self) -> bool {
        matches!(self, Vertex::Relay(_))
    }

    pub fn is_backbone(&self) -> bool {
        matches!(self, Vertex::Backbone(_))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Backbone(i) => write!(f, "B{i}"),
            Vertex::Relay(i) => write!(f, "R{i}"),
        }
    }
}

/// The deterministic backbone graph with straight-segment edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetGraph {
    vertices: Vec<Point>,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
}

impl DetGraph {
    pub fn new(vertices: Vec<Point>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        for (index, p) in vertices.iter().enumerate() {
            if !p.in_open_square() || !p.x.is_finite() || !p.y.is_finite() {
                return Err(GraphError::VertexOutside { index, x: p.x, y: p.y });
            }
        }
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                if vertices[i] == vertices[j] {
                    return Err(GraphError::DuplicateVertex(i, j));
                }
            }
        }
        if edges.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let mut seen = HashSet::new();
        for (k, &(a, b)) in edges.iter().enumerate() {
            for vertex in [a, b] {
                if vertex >= vertices.len() {
                    return Err(GraphError::UnknownEdgeVertex { edge: k, vertex });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(k));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(GraphError::DuplicateEdge(k));
            }
        }
        let lengths = edges.iter().map(|&(a, b)| vertices[a].dist(&vertices[b])).collect();
        Ok(Self { vertices, edges, lengths })
    }

    /// Parses the backbone text format: `v <x> <y>` declares the next vertex,
    /// `e <i> <j>` an edge between 1-based vertex numbers; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| GraphError::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields.as_slice() {
                ["v", x, y] => {
                    let x: f64 = x.parse().map_err(|_| err(format!("bad coordinate `{x}`")))?;
                    let y: f64 = y.parse().map_err(|_| err(format!("bad coordinate `{y}`")))?;
                    vertices.push(Point::new(x, y));
                }
                ["e", i, j] => {
                    let i: usize = i.parse().map_err(|_| err(format!("bad vertex number `{i}`")))?;
                    let j: usize = j.parse().map_err(|_| err(format!("bad vertex number `{j}`")))?;
                    if i == 0 || j == 0 {
                        return Err(err("vertex numbers start at 1".into()));
                    }
                    edges.push((i - 1, j - 1));
                }
                _ => return Err(err(format!("unrecognised line `{content}`"))),
            }
        }
        Self::new(vertices, edges)
    }

    /// Renders the graph in the text format accepted by [`DetGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            s.push_str(&format!("v {} {}\n", p.x, p.y));
        }
        for &(a, b) in &self.edges {
            s.push_str(&format!("e {} {}\n", a + 1, b + 1));
        }
        s
    }

    /// Horizontal segment of length `d` centred at the origin.
    pub fn segment(d: f64) -> Result<Self, GraphError> {
        if !(d > 0.0) {
            return Err(GraphError::NonPositive("segment length"));
        }
        Self::new(vec![Point::new(-d / 2.0, 0.0), Point::new(d / 2.0, 0.0)], vec![(0, 1)])
    }

    /// Star with `k` rays of length `len` from the origin; ray `j` points at
    /// angle `2 pi j / k`.
    pub fn star(k: usize, len: f64) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::NoEdges);
        }
        if !(len > 0.0) {
            return Err(GraphError::NonPositive("star ray length"));
        }
        let mut vertices = vec![Point::new(0.0, 0.0)];
        for j in 0..k {
            let theta = std::f64::consts::TAU * j as f64 / k as f64;
            vertices.push(Point::new(len * theta.cos(), len * theta.sin()));
        }
        Self::new(vertices, (1..=k).map(|j| (0, j)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn edge_points(&self, f: usize) -> (Point, Point) {
        let (a, b) = self.edges[f];
        (self.vertices[a], self.vertices[b])
    }

    /// Euclidean length `l(f)`.
    pub fn length(&self, f: usize) -> f64 {
        self.lengths[f]
    }

    pub fn v0(&self) -> usize {
        self.vertices.len()
    }

    pub fn e0(&self) -> usize {
        self.edges.len()
    }

    /// Minimum edge length.
    pub fn l0(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Maximum edge length.
    pub fn l_up(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of edge lengths.
    pub fn l_tot(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Whether edges `f` and `g` share an endpoint; returns that endpoint.
    pub fn shared_endpoint(&self, f: usize, g: usize) -> Option<usize> {
        let (a, b) = self.edges[f];
        let (c, d) = self.edges[g];
        [a, b].into_iter().find(|x| *x == c || *x == d)
    }
}

/// `m` vertical parallel edges `((i-1)/m, 0) -- ((i-1)/m, 2/m)`, translated by
/// `(-1/2, -1/m)` and shrunk by [`PARALLEL_SHRINK`] about the origin so every
/// vertex lies in the open square. Spacing becomes `0.9/m`, length `1.8/m`.
pub fn gamma_parallel_example(m: usize) -> Result<DetGraph, GraphError> {
    if m < 2 {
        return Err(GraphError::TooFewParallelEdges(m));
    }
    let mf = m as f64;
    let place = |x: f64, y: f64| Point::new(PARALLEL_SHRINK * (x - 0.5), PARALLEL_SHRINK * (y - 1.0 / mf));
    let mut vertices = Vec::with_capacity(2 * m);
    let mut edges = Vec::with_capacity(m);
    for i in 0..m {
        let x = i as f64 / mf;
        vertices.push(place(x, 0.0));
        vertices.push(place(x, 2.0 / mf));
        edges.push((2 * i, 2 * i + 1));
    }
    DetGraph::new(vertices, edges)
}

/// The random geometric graph on a point set with adjacency distance `r_n`.
#[derive(Debug, Clone)]
pub struct RggInstance {
    points: PointSet,
    r_n: f64,
    index: GridIndex,
}

/// Builds `G(r_n)`; the grid index uses cells of side `r_n`.
pub fn build_rgg(points: PointSet, r_n: f64) -> Result<RggInstance, GraphError> {
    if !(r_n > 0.0) || !r_n.is_finite() {
        return Err(GraphError::NonPositiveRadius(r_n));
    }
    let index = GridIndex::build(&points, r_n)?;
    Ok(RggInstance { points, r_n, index })
}

impl RggInstance {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn r_n(&self) -> f64 {
        self.r_n
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Neighbours of point `i`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = self.index.neighbors_within(self.points[i], self.r_n);
        out.retain(|&j| j != i);
        out
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.points[i].dist2(&self.points[j]) <= self.r_n * self.r_n
    }

    /// Calls `f(i, j)` once for every edge with `i < j`.
    pub fn for_each_edge<F: FnMut(usize, usize)>(&self, mut f: F) {
        for i in 0..self.n() {
            self.index.for_each_within(self.points[i], self.r_n, |j, _| {
                if i < j {
                    f(i, j)
                }
            });
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        self.for_each_edge(|_, _| c += 1);
        c
    }
}

/// The combined graph `G_loc`.
#[derive(Debug, Clone)]
pub struct GLocGraph {
    rgg: RggInstance,
    gamma: DetGraph,
    backbone_index: GridIndex,
}

pub fn build_gloc(rgg: RggInstance, gamma: DetGraph) -> Result<GLocGraph, GraphError> {
    let backbone_index = GridIndex::build(&PointSet::new(gamma.vertices().to_vec()), rgg.r_n)?;
    Ok(GLocGraph { rgg, gamma, backbone_index })
}

impl GLocGraph {
    pub fn rgg(&self) -> &RggInstance {
        &self.rgg
    }

    pub fn gamma(&self) -> &DetGraph {
        &self.gamma
    }

    pub fn r_n(&self) -> f64 {
        self.rgg.r_n
    }

    pub fn n(&self) -> usize {
        self.rgg.n()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        match v {
            Vertex::Backbone(i) => i < self.gamma.v0(),
            Vertex::Relay(i) => i < self.rgg.n(),
        }
    }

    pub fn position(&self, v: Vertex) -> Result<Point, GraphError> {
        match v {
            Vertex::Backbone(i) if i < self.gamma.v0() => Ok(self.gamma.vertex(i)),
            Vertex::Relay(i) if i < self.rgg.n() => Ok(self.rgg.points[i]),
            _ => Err(GraphError::InvalidVertex(v)),
        }
    }

    /// Position of a vertex known to exist.
    pub fn pos(&self, v: Vertex) -> Point {
        match v {
            Vertex::Backbone(i) => self.gamma.vertex(i),
            Vertex::Relay(i) => self.rgg.points[i],
        }
    }

    /// Relay points in the closed ball around `center`, ascending.
    pub fn relays_within(&self, center: Point, radius: f64) -> Vec<usize> {
        self.rgg.index.neighbors_within(center, radius)
    }

    pub fn adjacent(&self, a: Vertex, b: Vertex) -> bool {
        match (a, b) {
            (Vertex::Backbone(_), Vertex::Backbone(_)) => false,
            _ if a == b => false,
            _ => self.pos(a).dist2(&self.pos(b)) <= self.r_n() * self.r_n(),
        }
    }

    fn for_each_neighbor<F: FnMut(Vertex)>(&self, v: Vertex, mut f: F) {
        let p = self.pos(v);
        let r = self.r_n();
        if let Vertex::Relay(i) = v {
            self.backbone_index.for_each_within(p, r, |b, _| f(Vertex::Backbone(b)));
            self.rgg.index.for_each_within(p, r, |j, _| {
                if j != i {
                    f(Vertex::Relay(j))
                }
            });
        } else {
            self.rgg.index.for_each_within(p, r, |j, _| f(Vertex::Relay(j)));
        }
    }

    /// Neighbours of `v`, backbone vertices first, each group ascending.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::InvalidVertex(v));
        }
        let mut out = Vec::new();
        self.for_each_neighbor(v, |w| out.push(w));
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f(a, b)` once for every edge: relay pairs with `a < b`, then
    /// every backbone-relay pair with the backbone vertex first.
    pub fn for_each_edge<F: FnMut(Vertex, Vertex)>(&self, mut f: F) {
        self.rgg.for_each_edge(|i, j| f(Vertex::Relay(i), Vertex::Relay(j)));
        for b in 0..self.gamma.v0() {
            self.rgg
                .index
                .for_each_within(self.gamma.vertex(b), self.r_n(), |j, _| f(Vertex::Backbone(b), Vertex::Relay(j)));
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        self.for_each_edge(|_, _| c += 1);
        c
    }

    /// Number of backbone-relay edges.
    pub fn backbone_link_count(&self) -> usize {
        (0..self.gamma.v0())
            .map(|b| {
                let mut c = 0;
                self.rgg.index.for_each_within(self.gamma.vertex(b), self.r_n(), |_, _| c += 1);
                c
            })
            .sum()
    }
}

/// Minimum hop count between `s` and `t` in `G_loc`, or `None` when `t` is
/// unreachable. Paths may pass through backbone vertices.
pub fn graph_distance(gloc: &GLocGraph, s: Vertex, t: Vertex) -> Result<Option<usize>, GraphError> {
    for v in [s, t] {
        if !gloc.contains(v) {
            return Err(GraphError::InvalidVertex(v));
        }
    }
    if s == t {
        return Ok(Some(0));
    }
    let slot = |v: Vertex| match v {
        Vertex::Backbone(i) => i,
        Vertex::Relay(i) => gloc.gamma.v0() + i,
    };
    let mut dist = vec![usize::MAX; gloc.gamma.v0() + gloc.n()];
    dist[slot(s)] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        let d = dist[slot(v)];
        let mut found = false;
        gloc.for_each_neighbor(v, |w| {
            let k = slot(w);
            if dist[k] == usize::MAX {
                dist[k] = d + 1;
                if w == t {
                    found = true;
                }
                queue.push_back(w);
            }
        });
        if found {
            return Ok(Some(d + 1));
        }
    }
    Ok(None)
}

/// Minimum hop count over relay paths from backbone vertex `u` to backbone
/// vertex `v`: every interior vertex is a relay point. `None` if no relay path
/// exists.
///
/// The search is a layered BFS over relay points that removes points from the
/// grid as they are reached, so each point is discovered once and cells that
/// have been exhausted cost nothing on later scans.
pub fn relay_distance(gloc: &GLocGraph, u: usize, v: usize) -> Result<Option<usize>, GraphError> {
    for b in [u, v] {
        if b >= gloc.gamma.v0() {
            return Err(GraphError::InvalidVertex(Vertex::Backbone(b)));
        }
    }
    if u == v {
        return Err(GraphError::SameEndpoints);
    }
    let r = gloc.r_n();
    let r2 = r * r;
    let pu = gloc.gamma.vertex(u);
    let pv = gloc.gamma.vertex(v);
    let index = gloc.rgg.index();
    let mut table = index.bucket_table();

    let mut take_within = |center: Point, out: &mut Vec<Point>| {
        let ((x0, y0), (x1, y1)) = index.cell_span(center, r);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                let Some(slot) = table.slot((cx, cy)) else { continue };
                let list = &mut table.lists[slot];
                let mut j = 0;
                while j < list.len() {
                    let (_, p) = index.stored(list[j]);
                    if p.dist2(&center) <= r2 {
                        out.push(p);
                        list.swap_remove(j);
                    } else {
                        j += 1;
                    }
                }
            }
        }
    };

    let mut frontier = Vec::new();
    take_within(pu, &mut frontier);
    let mut hops = 1;
    loop {
        if frontier.is_empty() {
            return Ok(None);
        }
        if frontier.iter().any(|p| p.dist2(&pv) <= r2) {
            return Ok(Some(hops + 1));
        }
        let mut next = Vec::new();
        for p in &frontier {
            take_within(*p, &mut next);
        }
        frontier = next;
        hops += 1;
    }
}

/// `d_{u,v}`: the smallest integer strictly larger than `d / r_n`.
pub fn two_point_target(d: f64, r_n: f64) -> Result<u64, GraphError> {
    if !(d > 0.0) {
        return Err(GraphError::NonPositive("distance"));
    }
    if !(r_n > 0.0) {
        return Err(GraphError::NonPositiveRadius(r_n));
    }
    Ok(next_integer_above(d / r_n))
}

/// Outcome of the two distance events for one backbone pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEventOutcome {
    /// Relay hop distance; `None` when unreachable.
    pub d_gr: Option<usize>,
    pub d_euclid: f64,
    pub d_uv: u64,
    /// `d_gr <= (d / r_n) (1 + eps)`.
    pub e_uv: bool,
    /// `d_gr` is `d_uv` or `d_uv + 1`.
    pub f_uv: bool,
}

impl DistanceEventOutcome {
    pub fn evaluate(d_gr: Option<usize>, d_euclid: f64, r_n: f64, eps: f64) -> Result<Self, GraphError> {
        if !(eps > 0.0) {
            return Err(GraphError::NonPositive("eps"));
        }
        let d_uv = two_point_target(d_euclid, r_n)?;
        let ratio = d_euclid / r_n;
        let (e_uv, f_uv) = match d_gr {
            None => (false, false),
            Some(h) => {
                let h = h as f64;
                (
                    h <= ratio * (1.0 + eps) * (1.0 + RATIO_SLACK),
                    h == d_uv as f64 || h == (d_uv + 1) as f64,
                )
            }
        };
        Ok(Self { d_gr, d_euclid, d_uv, e_uv, f_uv })
    }
}

/// Computes the relay distance between backbone vertices `u` and `v` and
/// evaluates both distance events.
pub fn check_distance_events(
    gloc: &GLocGraph,
    u: usize,
    v: usize,
    eps: f64,
) -> Result<DistanceEventOutcome, GraphError> {
    let d_gr = relay_distance(gloc, u, v)?;
    let d = gloc.gamma.vertex(u).dist(&gloc.gamma.vertex(v));
    DistanceEventOutcome::evaluate(d_gr, d, gloc.r_n(), eps)
}
