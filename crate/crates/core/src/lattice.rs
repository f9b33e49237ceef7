//! Rectangle crossing events of the square-lattice renormalisation and their
//! Monte Carlo estimation.
//!
//! For a horizontal lattice edge `a` from `(x, y)` to `(x + d, y)` the
//! rectangle `R_a` is `[x - d/4, x + d + d/4] x [y - d/4, y + d/4]` (3d/2 by
//! d/2), its end squares are the leftmost and rightmost `d/2 x d/2` squares,
//! and `R'_a` is `R_a` grown by 1 on every side. Vertical edges use the same
//! layout rotated by 90 degrees.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Q0;
use crate::covering::{build_covering, covering_density, CoveringGraph};
use crate::error::{invalid, Result};
use crate::failure::apply_iid_link_failures;
use crate::geometry::{sample_poisson, Boundary, Point, Region};
use crate::graph::{build_rgg, PlanarStructure};
use crate::rng::derive_seed;
use crate::stats::{wilson_interval, Z95};

/// Crossing margin for node graphs.
pub const NODE_MARGIN: f64 = 0.5;
/// Crossing margin for covering graphs.
pub const COVERING_MARGIN: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Rectangle {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self> {
        if !(x1 < x2 && y1 < y2) {
            return invalid(format!("degenerate rectangle [{x1}, {x2}] x [{y1}, {y2}]"));
        }
        Ok(Rectangle { x1, x2, y1, y2 })
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }

    pub fn grow(&self, by: f64) -> Rectangle {
        Rectangle {
            x1: self.x1 - by,
            x2: self.x2 + by,
            y1: self.y1 - by,
            y2: self.y2 + by,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LeftRight,
    TopBottom,
}

/// Whether a chain of adjacent nodes inside `rect` runs from within `margin`
/// of one side to within `margin` of the opposite side.
pub fn crossed<S: PlanarStructure + ?Sized>(structure: &S, rect: &Rectangle, margin: f64, dir: Direction) -> bool {
    let coord = |p: Point| match dir {
        Direction::LeftRight => p.x,
        Direction::TopBottom => p.y,
    };
    let (lo, hi) = match dir {
        Direction::LeftRight => (rect.x1, rect.x2),
        Direction::TopBottom => (rect.y1, rect.y2),
    };
    let n = structure.node_count();
    let inside: Vec<bool> = (0..n).map(|i| rect.contains(structure.position(i))).collect();
    let is_start = |i: usize| {
        let c = coord(structure.position(i)) - lo;
        0.0 < c && c < margin
    };
    let is_end = |i: usize| {
        let c = hi - coord(structure.position(i));
        0.0 < c && c < margin
    };
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| inside[i] && is_start(i)).collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        if is_end(i) {
            return true;
        }
        for &j in structure.neighbors(i) {
            if inside[j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Edge of the lattice `d Z^2` starting at `origin`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeEdge {
    pub origin: Point,
    pub orientation: Orientation,
}

impl LatticeEdge {
    pub fn horizontal(origin: Point) -> Self {
        LatticeEdge {
            origin,
            orientation: Orientation::Horizontal,
        }
    }

    pub fn vertical(origin: Point) -> Self {
        LatticeEdge {
            origin,
            orientation: Orientation::Vertical,
        }
    }

    pub fn rectangle(&self, d: f64) -> Rectangle {
        let (x, y, q) = (self.origin.x, self.origin.y, d / 4.0);
        match self.orientation {
            Orientation::Horizontal => Rectangle {
                x1: x - q,
                x2: x + d + q,
                y1: y - q,
                y2: y + q,
            },
            Orientation::Vertical => Rectangle {
                x1: x - q,
                x2: x + q,
                y1: y - q,
                y2: y + d + q,
            },
        }
    }

    /// The two `d/2 x d/2` squares at the ends of the rectangle.
    pub fn end_squares(&self, d: f64) -> (Rectangle, Rectangle) {
        let r = self.rectangle(d);
        let h = d / 2.0;
        match self.orientation {
            Orientation::Horizontal => (Rectangle { x2: r.x1 + h, ..r }, Rectangle { x1: r.x2 - h, ..r }),
            Orientation::Vertical => (Rectangle { y2: r.y1 + h, ..r }, Rectangle { y1: r.y2 - h, ..r }),
        }
    }

    /// `R'_a`: the rectangle extended by 1 in all directions.
    pub fn extended(&self, d: f64) -> Rectangle {
        self.rectangle(d).grow(1.0)
    }

    fn long_direction(&self) -> Direction {
        match self.orientation {
            Orientation::Horizontal => Direction::LeftRight,
            Orientation::Vertical => Direction::TopBottom,
        }
    }

    fn short_direction(&self) -> Direction {
        match self.orientation {
            Orientation::Horizontal => Direction::TopBottom,
            Orientation::Vertical => Direction::LeftRight,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: f64,
    pub margin: f64,
}

impl LatticeSpec {
    pub const Q0: f64 = Q0;

    pub fn new(d: f64, margin: f64) -> Result<Self> {
        if !(d > 4.0 && d.is_finite()) {
            return invalid(format!("lattice edge length must exceed 4, got {d}"));
        }
        if margin != NODE_MARGIN && margin != COVERING_MARGIN {
            return invalid(format!("crossing margin must be 1/2 or 1, got {margin}"));
        }
        Ok(LatticeSpec { d, margin })
    }

    pub fn for_nodes(d: f64) -> Result<Self> {
        LatticeSpec::new(d, NODE_MARGIN)
    }

    pub fn for_covering(d: f64) -> Result<Self> {
        LatticeSpec::new(d, COVERING_MARGIN)
    }
}

/// `R_a` crossed the long way.
pub fn crossing_event<S: PlanarStructure + ?Sized>(structure: &S, edge: &LatticeEdge, spec: &LatticeSpec) -> bool {
    crossed(structure, &edge.rectangle(spec.d), spec.margin, edge.long_direction())
}

/// `R_a` crossed the long way and both end squares crossed the short way.
pub fn complete_event<S: PlanarStructure + ?Sized>(structure: &S, edge: &LatticeEdge, spec: &LatticeSpec) -> bool {
    if !crossing_event(structure, edge, spec) {
        return false;
    }
    let (a, b) = edge.end_squares(spec.d);
    let dir = edge.short_direction();
    crossed(structure, &a, spec.margin, dir) && crossed(structure, &b, spec.margin, dir)
}

/// Fewer than `k1` covering nodes in `R'_a`.
pub fn efficient_event(covering: &CoveringGraph, edge: &LatticeEdge, spec: &LatticeSpec, k1: f64) -> bool {
    let ext = edge.extended(spec.d);
    let count = covering.nodes.iter().filter(|p| ext.contains(**p)).count();
    (count as f64) < k1
}

/// `2 (d/2 + 2)(3d/2 + 2) lambda'`: twice the mean covering-node count of `R'_a`.
pub fn k1_formula(d: f64, lambda_prime: f64) -> f64 {
    2.0 * (d / 2.0 + 2.0) * (3.0 * d / 2.0 + 2.0) * lambda_prime
}

/// Chebyshev slack `1 / ((d/2 + 2)(3d/2 + 2) lambda')`.
pub fn efficiency_slack(d: f64, lambda_prime: f64) -> f64 {
    1.0 / ((d / 2.0 + 2.0) * (3.0 * d / 2.0 + 2.0) * lambda_prime)
}

/// Lower bound on the efficient-event probability.
pub fn efficient_lower_bound(d: f64, lambda_prime: f64) -> f64 {
    1.0 - efficiency_slack(d, lambda_prime)
}

/// The lattice-scale inequality `p_complete - slack(d) > 1 - q0`.
pub fn scale_condition(p_complete: f64, d: f64, lambda_prime: f64) -> bool {
    p_complete - efficiency_slack(d, lambda_prime) > 1.0 - Q0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingEvent {
    /// Long-way crossing of `R_a`.
    Crossing,
    /// Crossing plus both end squares crossed.
    Complete,
    /// Fewer than `k1` covering nodes in `R'_a`.
    Efficient,
    /// Complete and efficient.
    Open,
}

impl CrossingEvent {
    pub const ALL: [CrossingEvent; 4] = [
        CrossingEvent::Crossing,
        CrossingEvent::Complete,
        CrossingEvent::Efficient,
        CrossingEvent::Open,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CrossingEvent::Crossing => "crossing",
            CrossingEvent::Complete => "complete",
            CrossingEvent::Efficient => "efficient",
            CrossingEvent::Open => "open",
        }
    }
}

/// Monte Carlo estimate with a 95% Wilson score interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub d: f64,
    pub event: CrossingEvent,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CrossingEstimate {
    pub fn from_counts(d: f64, event: CrossingEvent, successes: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        let p_hat = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        CrossingEstimate {
            d,
            event,
            trials,
            successes,
            p_hat,
            ci_low,
            ci_high,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// What the crossing events are evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CrossingSource {
    /// Unit-disk graph at intensity `lambda`, node margin 1/2. The efficient
    /// event uses its covering graph.
    Site { lambda: f64 },
    /// Covering graph of the unit-disk graph at `lambda` after i.i.d. link
    /// failures with survival `lambda1 / lambda`, covering margin 1. The
    /// efficient event uses the covering graph of the unfailed graph.
    ThinnedCovering { lambda: f64, lambda1: f64 },
}

impl CrossingSource {
    fn lambda(&self) -> f64 {
        match *self {
            CrossingSource::Site { lambda } | CrossingSource::ThinnedCovering { lambda, .. } => lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CrossingSource::Site { lambda } if lambda > 0.0 => Ok(()),
            CrossingSource::ThinnedCovering { lambda, lambda1 } if lambda1 > 0.0 && lambda > lambda1 => Ok(()),
            other => invalid(format!("invalid crossing source {other:?}")),
        }
    }
}

/// Hard-wall box holding `R'_a` plus a one-unit halo, and the horizontal edge
/// centred in it.
pub fn trial_layout(d: f64) -> (Region, LatticeEdge) {
    let region = Region {
        width: 1.5 * d + 4.0,
        height: 0.5 * d + 4.0,
        boundary: Boundary::HardWall,
    };
    let edge = LatticeEdge::horizontal(Point::new(2.0 + d / 4.0, 2.0 + d / 4.0));
    (region, edge)
}

/// One fresh sample; returns the outcome of each event in [`CrossingEvent::ALL`] order.
pub fn crossing_trial(source: &CrossingSource, d: f64, seed: u64) -> Result<[bool; 4]> {
    let (region, edge) = trial_layout(d);
    let lambda = source.lambda();
    let graph = build_rgg(sample_poisson(lambda, region, seed)?, 1.0)?;
    let full_cover = build_covering(&graph);
    let lambda_prime = covering_density(lambda);
    let k1 = k1_formula(d, lambda_prime);
    let (crossing, complete, margin) = match *source {
        CrossingSource::Site { .. } => {
            let spec = LatticeSpec::for_nodes(d)?;
            (
                crossing_event(&graph, &edge, &spec),
                complete_event(&graph, &edge, &spec),
                spec.margin,
            )
        }
        CrossingSource::ThinnedCovering { lambda, lambda1 } => {
            let survivor = apply_iid_link_failures(&graph, 1.0 - lambda1 / lambda, seed)?.to_graph();
            let cover = build_covering(&survivor);
            let spec = LatticeSpec::for_covering(d)?;
            (
                crossing_event(&cover, &edge, &spec),
                complete_event(&cover, &edge, &spec),
                spec.margin,
            )
        }
    };
    let efficient = efficient_event(&full_cover, &edge, &LatticeSpec::new(d, margin)?, k1);
    Ok([crossing, complete, efficient, complete && efficient])
}

/// Estimates all four event probabilities at one lattice scale. Trial `t`
/// uses seed `derive_seed(seed, [t])`; results do not depend on thread count.
pub fn estimate_crossings(source: &CrossingSource, d: f64, trials: usize, seed: u64) -> Result<Vec<CrossingEstimate>> {
    source.validate()?;
    if !(d > 4.0) {
        return invalid(format!("lattice edge length must exceed 4, got {d}"));
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let outcomes: Vec<[bool; 4]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| crossing_trial(source, d, derive_seed(seed, &[t])))
        .collect::<Result<_>>()?;
    Ok(CrossingEvent::ALL
        .iter()
        .enumerate()
        .map(|(i, &event)| {
            let hits = outcomes.iter().filter(|o| o[i]).count();
            CrossingEstimate::from_counts(d, event, hits, trials)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    /// Smallest grid `d` whose complete-event lower confidence bound satisfies
    /// the lattice-scale inequality. A statistical estimate, not an exact value.
    pub d_star: Option<f64>,
    pub rows: Vec<CrossingEstimate>,
}

/// Searches `d_grid` for the smallest lattice scale at which the thinned
/// covering graph's complete-event probability clears `1 - q0` plus slack.
pub fn estimate_d(lambda: f64, lambda1: f64, trials: usize, d_grid: &[f64], seed: u64) -> Result<ScaleEstimate> {
    if d_grid.is_empty() {
        return invalid("empty d grid");
    }
    if d_grid.iter().any(|&d| !(d > 4.0)) || d_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("d grid must be increasing with every value above 4");
    }
    let source = CrossingSource::ThinnedCovering { lambda, lambda1 };
    source.validate()?;
    let lambda_prime = covering_density(lambda);
    let mut rows = Vec::new();
    let mut d_star = None;
    for (i, &d) in d_grid.iter().enumerate() {
        let est = estimate_crossings(&source, d, trials, derive_seed(seed, &[i as u64]))?;
        let complete = &est[1];
        if d_star.is_none() && scale_condition(complete.ci_low, d, lambda_prime) {
            d_star = Some(d);
        }
        rows.extend(est);
    }
    Ok(ScaleEstimate { d_star, rows })
}
