//! Relay random geometric graphs.
//!
//! A deterministic backbone graph drawn with straight edges inside the unit
//! square `[-1/2, 1/2]^2` is realised through a random geometric graph: every
//! backbone edge becomes a multi-hop path of random relay points, and paths of
//! different backbone edges are vertex-disjoint except at shared endpoints.
//!
//! The crate is split into:
//!
//! - [`geometry`]: points, bounded densities, i.i.d. sampling, grid index.
//! - [`graphs`]: the backbone, the RGG, the combined graph `G_loc`, BFS hop
//!   distances and the two-point distance events.
//! - [`relay`]: the circle-chain relay path construction, iterative disjoint
//!   relay graphs and their edge-count sandwich.
//! - [`weights`]: exponential edge weights and the greedy square-chain
//!   maximum-weight construction with an exhaustive oracle.
//! - [`bounds`]: closed-form tail bounds and exact Bernoulli tails.
//! - [`harness`]: seeded Monte Carlo experiments with CSV/JSON output.

pub mod bounds;
pub mod geometry;
pub mod graphs;
pub mod harness;
pub mod relay;
pub mod streams;
pub mod weights;

pub use geometry::{DensitySpec, GridIndex, Point, PointSet};
pub use graphs::{DetGraph, GLocGraph, RggInstance, Vertex};
pub use relay::{CircleChainParams, ChainMode, RelayPath, RelayRgg};
pub use weights::{EdgeWeights, WeightAssignment};

/// Relative slack used when a real ratio such as `d / r_n` is compared with an
/// integer. `0.3 / 0.1` evaluates to `2.9999999999999996` in binary floating
/// point, which must still count as the integer 3.
pub const RATIO_SLACK: f64 = 1e-9;

/// Smallest integer strictly larger than `x`, treating values within
/// [`RATIO_SLACK`] (relative) of an integer as that integer.
pub fn next_integer_above(x: f64) -> u64 {
    let rounded = x.round();
    let snapped = if (x - rounded).abs() <= RATIO_SLACK * rounded.abs().max(1.0) {
        rounded
    } else {
        x
    };
    snapped.floor() as u64 + 1
}

/// Smallest integer greater than or equal to `x`, with the same snapping rule
/// as [`next_integer_above`].
pub fn ceil_snapped(x: f64) -> u64 {
    let rounded = x.round();
    if (x - rounded).abs() <= RATIO_SLACK * rounded.abs().max(1.0) {
        rounded as u64
    } else {
        x.ceil() as u64
    }
}
