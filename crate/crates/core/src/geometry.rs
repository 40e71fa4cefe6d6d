//! Points in the unit square, bounded densities, sampling and a uniform grid
//! index for fixed-radius queries.
//!
//! Point indices are zero-based and stable: the `i`-th sampled point keeps
//! index `i` in every structure built from the set.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half the side of the unit square `S = [-1/2, 1/2]^2`.
pub const HALF: f64 = 0.5;

/// Densities read from text are accepted when they integrate to one within
/// this tolerance, then rescaled exactly.
pub const DENSITY_FILE_TOLERANCE: f64 = 1e-6;

/// Tolerance of the in-memory density invariant.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

/// Rejection sampling gives up after this many proposals per requested point.
pub const REJECTION_CAP_PER_POINT: u64 = 1_000_000;

/// Cells per side above which [`GridIndex`] switches to sparse storage.
const DENSE_GRID_MAX_CELLS: i64 = 1 << 22;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("rejection sampling exceeded {cap} proposals; the density is malformed")]
    MalformedDensity { cap: u64 },
    #[error("cell size must be positive, got {0}")]
    NonPositiveCellSize(f64),
    #[error("density file: {0}")]
    DensityFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Inside the closed square `S`.
    pub fn in_square(&self) -> bool {
        self.x.abs() <= HALF && self.y.abs() <= HALF
    }

    /// Inside the open square `(-1/2, 1/2)^2`.
    pub fn in_open_square(&self) -> bool {
        self.x.abs() < HALF && self.y.abs() < HALF
    }

    pub fn add_scaled(&self, dir: (f64, f64), t: f64) -> Point {
        Point::new(self.x + dir.0 * t, self.y + dir.1 * t)
    }
}

/// Piecewise-constant density on an `rows x cols` grid of equal cells.
///
/// Row 0 is the top row (largest `y`), matching the order rows appear in a
/// density file; column 0 is the leftmost column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensitySpec {
    Uniform,
    Grid(GridDensity),
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec::Uniform
    }
}

impl DensitySpec {
    /// Builds a grid density whose cell values must average to one within
    /// [`DENSITY_TOLERANCE`].
    pub fn grid(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, GeometryError> {
        Self::grid_with_tolerance(rows, cols, values, DENSITY_TOLERANCE)
    }

    fn grid_with_tolerance(
        rows: usize,
        cols: usize,
        mut values: Vec<f64>,
        tol: f64,
    ) -> Result<Self, GeometryError> {
        if rows == 0 || cols == 0 {
            return Err(GeometryError::InvalidDensity("grid must have at least one cell".into()));
        }
        if values.len() != rows * cols {
            return Err(GeometryError::InvalidDensity(format!(
                "expected {} cell values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(GeometryError::InvalidDensity(format!(
                "cell values must be finite and strictly positive, found {v}"
            )));
        }
        let integral = values.iter().sum::<f64>() / (rows * cols) as f64;
        if (integral - 1.0).abs() > tol {
            return Err(GeometryError::InvalidDensity(format!(
                "density integrates to {integral}, not 1"
            )));
        }
        if integral != 1.0 {
            for v in &mut values {
                *v /= integral;
            }
        }
        Ok(DensitySpec::Grid(GridDensity { rows, cols, values }))
    }

    /// Parses the text density format: a header `grid R C` followed by `R*C`
    /// whitespace-separated cell values in row-major order. Lines starting with
    /// `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let bad = |m: &str| GeometryError::DensityFile(m.to_string());
        if tokens.next() != Some("grid") {
            return Err(bad("first token must be `grid`"));
        }
        let rows: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing or invalid row count"))?;
        let cols: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing or invalid column count"))?;
        let values = tokens
            .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("invalid cell value `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::grid_with_tolerance(rows, cols, values, DENSITY_FILE_TOLERANCE)
    }

    /// Lower bound `eps1` of the density.
    pub fn eps1(&self) -> f64 {
        match self {
            DensitySpec::Uniform => 1.0,
            DensitySpec::Grid(g) => g.values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper bound `eps2` of the density; the rejection envelope.
    pub fn eps2(&self) -> f64 {
        match self {
            DensitySpec::Uniform => 1.0,
            DensitySpec::Grid(g) => g.values.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn value_at(&self, p: Point) -> f64 {
        match self {
            DensitySpec::Uniform => 1.0,
            DensitySpec::Grid(g) => {
                let col = (((p.x + HALF) * g.cols as f64) as usize).min(g.cols - 1);
                let row = (((HALF - p.y) * g.rows as f64) as usize).min(g.rows - 1);
                g.values[row * g.cols + col]
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Point> {
        self.points.get(i).copied()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

impl std::ops::Index<usize> for PointSet {
    type Output = Point;
    fn index(&self, i: usize) -> &Point {
        &self.points[i]
    }
}

/// Draws `n` i.i.d. points from `density` by rejection against the constant
/// envelope `eps2` with uniform proposals on `S`.
pub fn sample_points<R: Rng + ?Sized>(
    n: usize,
    density: &DensitySpec,
    rng: &mut R,
) -> Result<PointSet, GeometryError> {
    let mut points = Vec::with_capacity(n);
    let envelope = density.eps2();
    let cap = REJECTION_CAP_PER_POINT.saturating_mul(n as u64);
    let mut proposals = 0u64;
    while points.len() < n {
        if proposals >= cap {
            return Err(GeometryError::MalformedDensity { cap });
        }
        proposals += 1;
        let p = Point::new(rng.gen::<f64>() - HALF, rng.gen::<f64>() - HALF);
        let accept = match density {
            DensitySpec::Uniform => true,
            DensitySpec::Grid(_) => rng.gen::<f64>() * envelope <= density.value_at(p),
        };
        if accept {
            points.push(p);
        }
    }
    Ok(PointSet::new(points))
}

pub type Cell = (i64, i64);

#[derive(Debug, Clone)]
enum Buckets {
    /// Bucket of cell `(cx, cy)` is `members[offsets[k]..offsets[k + 1]]`
    /// with `k = cx * dims + cy`.
    Dense { offsets: Vec<u32> },
    /// Sorted occupied cells; bucket `k` as above.
    Sparse { keys: Vec<Cell>, offsets: Vec<u32> },
}

/// Uniform grid over `S` with square cells of side `cell_size`.
///
/// A point `p` lives in the bucket
/// `(floor((p.x + 1/2) / cell_size), floor((p.y + 1/2) / cell_size))`.
/// Coordinates are stored again in bucket order so that radius queries scan
/// contiguous memory.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell_size: f64,
    dims: i64,
    buckets: Buckets,
    members: Vec<u32>,
    coords: Vec<Point>,
}

impl GridIndex {
    pub fn build(points: &PointSet, cell_size: f64) -> Result<Self, GeometryError> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(GeometryError::NonPositiveCellSize(cell_size));
        }
        let dims = ((1.0 / cell_size).floor() as i64).saturating_add(1).max(1);
        let cells: Vec<Cell> = points.points().iter().map(|p| cell_of(*p, cell_size)).collect();
        let n = points.len();

        if dims.saturating_mul(dims) <= DENSE_GRID_MAX_CELLS.max(4 * n as i64) {
            let slots = (dims * dims) as usize;
            let mut offsets = vec![0u32; slots + 1];
            let slot = |c: Cell| (c.0.clamp(0, dims - 1) * dims + c.1.clamp(0, dims - 1)) as usize;
            for &c in &cells {
                offsets[slot(c) + 1] += 1;
            }
            for k in 0..slots {
                offsets[k + 1] += offsets[k];
            }
            let mut cursor = offsets.clone();
            let mut members = vec![0u32; n];
            for (i, &c) in cells.iter().enumerate() {
                let s = slot(c);
                members[cursor[s] as usize] = i as u32;
                cursor[s] += 1;
            }
            let coords = members.iter().map(|&i| points[i as usize]).collect();
            Ok(Self { cell_size, dims, buckets: Buckets::Dense { offsets }, members, coords })
        } else {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by_key(|&i| (cells[i as usize], i));
            let mut keys = Vec::new();
            let mut offsets = Vec::new();
            for (pos, &i) in order.iter().enumerate() {
                let c = cells[i as usize];
                if keys.last() != Some(&c) {
                    keys.push(c);
                    offsets.push(pos as u32);
                }
            }
            offsets.push(n as u32);
            let coords = order.iter().map(|&i| points[i as usize]).collect();
            Ok(Self { cell_size, dims, buckets: Buckets::Sparse { keys, offsets }, members: order, coords })
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cell_of(&self, p: Point) -> Cell {
        cell_of(p, self.cell_size)
    }

    fn bucket_range(&self, cell: Cell) -> std::ops::Range<usize> {
        match &self.buckets {
            Buckets::Dense { offsets } => {
                if cell.0 < 0 || cell.1 < 0 || cell.0 >= self.dims || cell.1 >= self.dims {
                    return 0..0;
                }
                let k = (cell.0 * self.dims + cell.1) as usize;
                offsets[k] as usize..offsets[k + 1] as usize
            }
            Buckets::Sparse { keys, offsets } => match keys.binary_search(&cell) {
                Ok(k) => offsets[k] as usize..offsets[k + 1] as usize,
                Err(_) => 0..0,
            },
        }
    }

    /// Point indices stored in `cell`, ascending.
    pub fn bucket(&self, cell: Cell) -> &[u32] {
        &self.members[self.bucket_range(cell)]
    }

    /// All non-empty buckets.
    pub fn buckets(&self) -> Vec<(Cell, &[u32])> {
        match &self.buckets {
            Buckets::Dense { offsets } => (0..self.dims * self.dims)
                .filter_map(|k| {
                    let r = offsets[k as usize] as usize..offsets[k as usize + 1] as usize;
                    (!r.is_empty()).then(|| ((k / self.dims, k % self.dims), &self.members[r]))
                })
                .collect(),
            Buckets::Sparse { keys, offsets } => keys
                .iter()
                .enumerate()
                .map(|(k, &c)| (c, &self.members[offsets[k] as usize..offsets[k + 1] as usize]))
                .collect(),
        }
    }

    /// Inclusive cell range overlapped by the bounding box of the ball.
    pub(crate) fn cell_span(&self, center: Point, radius: f64) -> (Cell, Cell) {
        let lo = cell_of(Point::new(center.x - radius, center.y - radius), self.cell_size);
        let hi = cell_of(Point::new(center.x + radius, center.y + radius), self.cell_size);
        let clamp = |v: i64| v.clamp(0, self.dims - 1);
        ((clamp(lo.0), clamp(lo.1)), (clamp(hi.0), clamp(hi.1)))
    }

    /// Calls `f(index, point)` for every stored point at distance at most
    /// `radius` from `center`, in no particular order.
    pub fn for_each_within<F: FnMut(usize, Point)>(&self, center: Point, radius: f64, mut f: F) {
        if self.members.is_empty() || radius < 0.0 {
            return;
        }
        let r2 = radius * radius;
        let ((x0, y0), (x1, y1)) = self.cell_span(center, radius);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                let range = self.bucket_range((cx, cy));
                for k in range {
                    let p = self.coords[k];
                    if p.dist2(&center) <= r2 {
                        f(self.members[k] as usize, p);
                    }
                }
            }
        }
    }

    /// Indices of all points in the closed ball of `radius` around `center`,
    /// ascending.
    pub fn neighbors_within(&self, center: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Copies each bucket into its own vector; used by searches that consume
    /// points as they are visited.
    pub(crate) fn bucket_table(&self) -> BucketTable {
        let dims = self.dims;
        match &self.buckets {
            Buckets::Dense { offsets } => BucketTable {
                dims,
                sparse_keys: None,
                lists: (0..(dims * dims) as usize)
                    .map(|k| (offsets[k] as usize..offsets[k + 1] as usize).collect())
                    .collect(),
            },
            Buckets::Sparse { keys, offsets } => BucketTable {
                dims,
                sparse_keys: Some(keys.clone()),
                lists: (0..keys.len())
                    .map(|k| (offsets[k] as usize..offsets[k + 1] as usize).collect())
                    .collect(),
            },
        }
    }

    /// Point index and coordinates at storage position `k`.
    #[inline]
    pub(crate) fn stored(&self, k: usize) -> (usize, Point) {
        (self.members[k] as usize, self.coords[k])
    }
}

/// Mutable per-cell lists of storage positions into a [`GridIndex`].
pub(crate) struct BucketTable {
    dims: i64,
    sparse_keys: Option<Vec<Cell>>,
    pub(crate) lists: Vec<Vec<usize>>,
}

impl BucketTable {
    pub(crate) fn slot(&self, cell: Cell) -> Option<usize> {
        match &self.sparse_keys {
            None => (cell.0 >= 0 && cell.1 >= 0 && cell.0 < self.dims && cell.1 < self.dims)
                .then(|| (cell.0 * self.dims + cell.1) as usize),
            Some(keys) => keys.binary_search(&cell).ok(),
        }
    }
}

#[inline]
fn cell_of(p: Point, cell_size: f64) -> Cell {
    (((p.x + HALF) / cell_size).floor() as i64, ((p.y + HALF) / cell_size).floor() as i64)
}
