//! One-shot random link and node failures.
//!
//! Every edge (or node) consumes exactly one uniform from a counter-based
//! stream, in canonical order, and fails iff that uniform is below its failure
//! probability. Rules applied with the same seed are therefore coupled: a
//! pointwise larger rule removes a superset of edges.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::PointSample;
use crate::graph::{ComponentReport, GeometricGraph};
use crate::rng::{uniforms, Stream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
    #[default]
    None,
}

/// Link failure probability `q(k)` as a function of link degree `k`:
/// `table[k]` for `k <= table.len() - 1`, `tail` beyond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct DegreeFailureRule {
    table: Vec<f64>,
    tail: f64,
    monotonicity: Monotonicity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    #[serde(default)]
    table: Vec<f64>,
    tail: f64,
    #[serde(default)]
    monotonicity: Monotonicity,
}

impl TryFrom<RawRule> for DegreeFailureRule {
    type Error = crate::Error;

    fn try_from(raw: RawRule) -> Result<Self> {
        DegreeFailureRule::new(raw.table, raw.tail, raw.monotonicity)
    }
}

impl From<DegreeFailureRule> for RawRule {
    fn from(r: DegreeFailureRule) -> Self {
        RawRule {
            table: r.table,
            tail: r.tail,
            monotonicity: r.monotonicity,
        }
    }
}

fn is_probability(q: f64) -> bool {
    (0.0..=1.0).contains(&q)
}

impl DegreeFailureRule {
    /// Validates probabilities and the declared monotonicity over `table` followed by `tail`.
    pub fn new(table: Vec<f64>, tail: f64, monotonicity: Monotonicity) -> Result<Self> {
        if let Some((k, q)) = table.iter().enumerate().find(|(_, q)| !is_probability(**q)) {
            return invalid(format!("table[{k}] = {q} is not a probability"));
        }
        if !is_probability(tail) {
            return invalid(format!("tail = {tail} is not a probability"));
        }
        let rule = DegreeFailureRule {
            table,
            tail,
            monotonicity,
        };
        let holds = match monotonicity {
            Monotonicity::NonDecreasing => rule.is_non_decreasing(),
            Monotonicity::NonIncreasing => rule.is_non_increasing(),
            Monotonicity::None => true,
        };
        if !holds {
            return invalid(format!("declared monotonicity {monotonicity:?} does not hold"));
        }
        Ok(rule)
    }

    pub fn constant(q: f64) -> Result<Self> {
        DegreeFailureRule::new(Vec::new(), q, Monotonicity::None)
    }

    /// Tabulates `f(k)` for `1 <= k <= k_max` and sets `q(0) = q(1)`.
    pub fn from_degree_fn(
        k_max: usize,
        tail: f64,
        monotonicity: Monotonicity,
        f: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        if k_max == 0 {
            return invalid("k_max must be at least 1");
        }
        let mut table: Vec<f64> = (1..=k_max).map(&f).collect();
        table.insert(0, table[0]);
        DegreeFailureRule::new(table, tail, monotonicity)
    }

    #[inline]
    pub fn q(&self, k: usize) -> f64 {
        self.table.get(k).copied().unwrap_or(self.tail)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.table.iter().copied().chain(std::iter::once(self.tail))
    }

    pub fn is_constant(&self) -> bool {
        self.values().all(|q| q == self.tail)
    }

    pub fn is_non_decreasing(&self) -> bool {
        let v: Vec<f64> = self.values().collect();
        v.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_non_increasing(&self) -> bool {
        let v: Vec<f64> = self.values().collect();
        v.windows(2).all(|w| w[0] >= w[1])
    }

    /// Degrees past which `q` is constant: every `k >= settled_from()` maps to `tail`.
    pub fn settled_from(&self) -> usize {
        self.table.len()
    }
}

/// A base graph together with the edges (and, in node mode, nodes) that survived.
#[derive(Clone, Debug)]
pub struct SurvivingGraph<'a> {
    pub base: &'a GeometricGraph,
    edge_alive: Vec<bool>,
    node_alive: Option<Vec<bool>>,
}

impl<'a> SurvivingGraph<'a> {
    pub fn edge_alive(&self) -> &[bool] {
        &self.edge_alive
    }

    pub fn node_alive(&self) -> Option<&[bool]> {
        self.node_alive.as_deref()
    }

    pub fn surviving_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.base
            .edges()
            .iter()
            .zip(&self.edge_alive)
            .filter(|(_, &a)| a)
            .map(|(&e, _)| e)
    }

    pub fn surviving_edge_count(&self) -> usize {
        self.edge_alive.iter().filter(|&&a| a).count()
    }

    pub fn surviving_node_count(&self) -> usize {
        match &self.node_alive {
            Some(alive) => alive.iter().filter(|&&a| a).count(),
            None => self.base.sample.len(),
        }
    }

    /// Components over all base nodes; failed nodes appear as singletons, so
    /// the largest fraction is relative to the base node count.
    pub fn components(&self) -> ComponentReport {
        ComponentReport::from_edges(self.base.sample.len(), self.surviving_edges())
    }

    pub fn largest_fraction(&self) -> f64 {
        self.components().largest_fraction
    }

    /// Mean degree over surviving nodes.
    pub fn mean_degree(&self) -> f64 {
        let n = self.surviving_node_count();
        if n == 0 {
            return 0.0;
        }
        2.0 * self.surviving_edge_count() as f64 / n as f64
    }

    /// Materialises the survivor as a graph. Node failures drop the failed
    /// points and re-index the rest in order; link failures keep every point.
    pub fn to_graph(&self) -> GeometricGraph {
        let base = self.base;
        match &self.node_alive {
            None => GeometricGraph::from_edges(base.sample.clone(), base.radius, self.surviving_edges().collect())
                .expect("subset of a valid edge list"),
            Some(alive) => {
                let mut new_id = vec![usize::MAX; alive.len()];
                let mut points = Vec::new();
                for (i, _) in alive.iter().enumerate().filter(|(_, &a)| a) {
                    new_id[i] = points.len();
                    points.push(base.sample.points[i]);
                }
                let sample = PointSample {
                    points,
                    ..base.sample.clone()
                };
                let edges = self.surviving_edges().map(|(u, v)| (new_id[u], new_id[v])).collect();
                GeometricGraph::from_edges(sample, base.radius, edges).expect("subset of a valid edge list")
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !is_probability(p) {
        return invalid(format!("failure probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// Each edge of link degree `k` (in the original graph) fails independently
/// with probability `rule.q(k)`.
pub fn apply_degree_dependent_link_failures<'a>(
    graph: &'a GeometricGraph,
    rule: &DegreeFailureRule,
    seed: u64,
) -> SurvivingGraph<'a> {
    let u = uniforms(seed, Stream::LinkFailure, graph.edge_count());
    let edge_alive = (0..graph.edge_count())
        .map(|e| u[e] >= rule.q(graph.link_degree_of(e)))
        .collect();
    SurvivingGraph {
        base: graph,
        edge_alive,
        node_alive: None,
    }
}

pub fn apply_iid_link_failures(graph: &GeometricGraph, p: f64, seed: u64) -> Result<SurvivingGraph<'_>> {
    check_probability(p)?;
    let edge_alive = uniforms(seed, Stream::LinkFailure, graph.edge_count())
        .into_iter()
        .map(|u| u >= p)
        .collect();
    Ok(SurvivingGraph {
        base: graph,
        edge_alive,
        node_alive: None,
    })
}

/// Each node fails with probability `p`, taking its links with it.
pub fn apply_iid_node_failures(graph: &GeometricGraph, p: f64, seed: u64) -> Result<SurvivingGraph<'_>> {
    check_probability(p)?;
    let node_alive: Vec<bool> = uniforms(seed, Stream::NodeFailure, graph.sample.len())
        .into_iter()
        .map(|u| u >= p)
        .collect();
    let edge_alive = graph
        .edges()
        .iter()
        .map(|&(u, v)| node_alive[u] && node_alive[v])
        .collect();
    Ok(SurvivingGraph {
        base: graph,
        edge_alive,
        node_alive: Some(node_alive),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_poisson, Boundary, Region};
    use crate::graph::build_rgg;
    use crate::stats::Summary;

    fn torus(lambda: f64, side: f64, seed: u64) -> GeometricGraph {
        let region = Region::new(side, side, Boundary::Torus).unwrap();
        build_rgg(sample_poisson(lambda, region, seed).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn rule_validation() {
        assert!(DegreeFailureRule::new(vec![0.1, 1.2], 0.5, Monotonicity::None).is_err());
        assert!(DegreeFailureRule::new(vec![0.1], -0.1, Monotonicity::None).is_err());
        assert!(DegreeFailureRule::new(vec![0.1, 0.3], 0.2, Monotonicity::NonDecreasing).is_err());
        assert!(DegreeFailureRule::new(vec![0.1, 0.3], 0.4, Monotonicity::NonDecreasing).is_ok());
        assert!(DegreeFailureRule::new(vec![0.5, 0.3], 0.4, Monotonicity::NonIncreasing).is_err());
        let r = DegreeFailureRule::from_degree_fn(3, 1.0, Monotonicity::NonDecreasing, |k| k as f64 / 4.0).unwrap();
        assert_eq!(r.table(), &[0.25, 0.25, 0.5, 0.75]);
        assert_eq!(r.q(0), r.q(1));
        assert_eq!(r.q(100), 1.0);
    }

    #[test]
    fn rule_json_shape() {
        let r: DegreeFailureRule =
            serde_json::from_str(r#"{"table": [0.1, 0.1, 0.2], "tail": 0.3, "monotonicity": "non-decreasing"}"#)
                .unwrap();
        assert_eq!(r.q(2), 0.2);
        assert_eq!(r.q(9), 0.3);
        let back: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(back["monotonicity"], "non-decreasing");
        assert!(serde_json::from_str::<DegreeFailureRule>(
            r#"{"table": [0.3, 0.1], "tail": 0.3, "monotonicity": "non-decreasing"}"#
        )
        .is_err());
    }

    #[test]
    fn extreme_rules() {
        let g = torus(2.0, 20.0, 1);
        let none = apply_degree_dependent_link_failures(&g, &DegreeFailureRule::constant(0.0).unwrap(), 5);
        assert_eq!(none.surviving_edge_count(), g.edge_count());
        let all = apply_degree_dependent_link_failures(&g, &DegreeFailureRule::constant(1.0).unwrap(), 5);
        assert_eq!(all.surviving_edge_count(), 0);
    }

    #[test]
    fn half_rule_fraction() {
        let g = torus(2.0, 100.0, 11);
        let s = apply_degree_dependent_link_failures(&g, &DegreeFailureRule::constant(0.5).unwrap(), 3);
        let m = g.edge_count() as f64;
        let se = (0.25 / m).sqrt();
        let frac = s.surviving_edge_count() as f64 / m;
        assert!((frac - 0.5).abs() <= 3.0 * se, "{frac}");
    }

    #[test]
    fn iid_link_matches_constant_rule() {
        let g = torus(3.2, 30.0, 2);
        let p = 1.0 - 1.6 / 3.2;
        assert_eq!(p, 0.5);
        let a = apply_iid_link_failures(&g, p, 9).unwrap();
        let b = apply_degree_dependent_link_failures(&g, &DegreeFailureRule::constant(p).unwrap(), 9);
        assert_eq!(a.edge_alive(), b.edge_alive());
        assert_eq!(
            apply_iid_link_failures(&g, 0.0, 9).unwrap().surviving_edge_count(),
            g.edge_count()
        );
        assert!(apply_iid_link_failures(&g, 1.5, 9).is_err());
        assert!(apply_iid_node_failures(&g, -0.1, 9).is_err());
    }

    #[test]
    fn node_failure_extremes() {
        let g = torus(2.0, 20.0, 4);
        let keep = apply_iid_node_failures(&g, 0.0, 1).unwrap();
        assert_eq!(keep.surviving_edge_count(), g.edge_count());
        assert_eq!(keep.to_graph().edges(), g.edges());
        let gone = apply_iid_node_failures(&g, 1.0, 1).unwrap();
        assert_eq!(gone.surviving_edge_count(), 0);
        assert_eq!(gone.to_graph().sample.len(), 0);
    }

    #[test]
    fn node_failures_never_leave_dangling_edges() {
        let g = torus(2.0, 30.0, 8);
        let s = apply_iid_node_failures(&g, 0.3, 2).unwrap();
        let alive = s.node_alive().unwrap();
        assert!(s.surviving_edges().all(|(u, v)| alive[u] && alive[v]));
        let h = s.to_graph();
        assert_eq!(h.sample.len(), s.surviving_node_count());
        assert_eq!(h.edge_count(), s.surviving_edge_count());
    }

    #[test]
    fn node_thinning_matches_fresh_graph_degree() {
        let thinned: Vec<f64> = (0..20)
            .map(|t| {
                let g = torus(3.0, 40.0, 100 + t);
                apply_iid_node_failures(&g, 0.5, t).unwrap().mean_degree()
            })
            .collect();
        let fresh: Vec<f64> = (0..20).map(|t| torus(1.5, 40.0, 500 + t).mean_degree()).collect();
        let a = Summary::of(&thinned);
        let b = Summary::of(&fresh);
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se, "{a:?} vs {b:?}");
    }
}
