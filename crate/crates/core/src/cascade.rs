//! Threshold-driven cascading link failures.
//!
//! Each link `l` carries a susceptibility threshold `psi_l` in `[0, 1]` and
//! fails once the fraction of failed links sharing an end vertex with it
//! reaches `psi_l`. Starting from a single failed seed link, failures are
//! propagated in synchronous rounds until nothing changes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{ComponentReport, GeometricGraph};
use crate::rng::{uniforms, Stream};

/// Default failed-fraction that counts as a giant cascade at finite size.
pub const DEFAULT_GIANT_THRESHOLD: f64 = 0.1;

/// Distribution of susceptibility thresholds on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub enum ThresholdDistribution {
    Uniform {
        a: f64,
        b: f64,
    },
    PointMass {
        c: f64,
    },
    /// Sorted samples; the CDF is the empirical step function.
    Empirical {
        samples: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
enum RawDistribution {
    Uniform { a: f64, b: f64 },
    PointMass { c: f64 },
    Empirical { samples: Vec<f64> },
}

impl TryFrom<RawDistribution> for ThresholdDistribution {
    type Error = crate::Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        match raw {
            RawDistribution::Uniform { a, b } => ThresholdDistribution::uniform(a, b),
            RawDistribution::PointMass { c } => ThresholdDistribution::point_mass(c),
            RawDistribution::Empirical { samples } => ThresholdDistribution::empirical(samples),
        }
    }
}

impl From<ThresholdDistribution> for RawDistribution {
    fn from(d: ThresholdDistribution) -> Self {
        match d {
            ThresholdDistribution::Uniform { a, b } => RawDistribution::Uniform { a, b },
            ThresholdDistribution::PointMass { c } => RawDistribution::PointMass { c },
            ThresholdDistribution::Empirical { samples } => RawDistribution::Empirical { samples },
        }
    }
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl ThresholdDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(in_unit(a) && in_unit(b) && a <= b) {
            return invalid(format!("uniform needs 0 <= a <= b <= 1, got a = {a}, b = {b}"));
        }
        Ok(ThresholdDistribution::Uniform { a, b })
    }

    pub fn point_mass(c: f64) -> Result<Self> {
        if !in_unit(c) {
            return invalid(format!("point mass must lie in [0, 1], got {c}"));
        }
        Ok(ThresholdDistribution::PointMass { c })
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return invalid("empirical distribution needs at least one sample");
        }
        if let Some(s) = samples.iter().find(|s| !in_unit(**s)) {
            return invalid(format!("empirical sample {s} outside [0, 1]"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(ThresholdDistribution::Empirical { samples })
    }

    /// Right-continuous CDF `P(psi <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ThresholdDistribution::Uniform { a, b } => {
                if x >= *b {
                    1.0
                } else if x < *a {
                    0.0
                } else {
                    (x - a) / (b - a)
                }
            }
            ThresholdDistribution::PointMass { c } => {
                if x >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            ThresholdDistribution::Empirical { samples } => {
                samples.partition_point(|s| *s <= x) as f64 / samples.len() as f64
            }
        }
    }

    /// Generalised inverse `inf { x : F(x) >= u }` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            ThresholdDistribution::Uniform { a, b } => a + u * (b - a),
            ThresholdDistribution::PointMass { c } => *c,
            ThresholdDistribution::Empirical { samples } => {
                let n = samples.len();
                let idx = ((u * n as f64).ceil() as usize).clamp(1, n) - 1;
                samples[idx]
            }
        }
    }
}

/// Vulnerable probability of a degree-`k` link: `F(1/k)`.
pub fn rho_k(dist: &ThresholdDistribution, k: usize) -> Result<f64> {
    if k == 0 {
        return invalid("rho_k needs k >= 1");
    }
    Ok(dist.cdf(1.0 / k as f64))
}

/// Reliable probability of a degree-`k` link: `1 - F((k-1)/k)`.
pub fn sigma_k(dist: &ThresholdDistribution, k: usize) -> Result<f64> {
    if k == 0 {
        return invalid("sigma_k needs k >= 1");
    }
    Ok(1.0 - dist.cdf((k - 1) as f64 / k as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAssignment {
    /// One threshold per edge, in canonical edge order.
    pub psi: Vec<f64>,
    pub seed: u64,
}

pub fn sample_thresholds(graph: &GeometricGraph, dist: &ThresholdDistribution, seed: u64) -> ThresholdAssignment {
    let psi = uniforms(seed, Stream::Thresholds, graph.edge_count())
        .into_iter()
        .map(|u| dist.quantile(u))
        .collect();
    ThresholdAssignment { psi, seed }
}

fn check_assignment(graph: &GeometricGraph, psi: &ThresholdAssignment) -> Result<()> {
    if psi.psi.len() != graph.edge_count() {
        return invalid(format!("{} thresholds for {} edges", psi.psi.len(), graph.edge_count()));
    }
    Ok(())
}

/// Raw predicates for one link. For `k = 1` a link can be both vulnerable and
/// reliable; degree-0 links are only ever reliable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkClass {
    pub link_degree: usize,
    /// `k >= 1` and `psi <= 1/k`.
    pub vulnerable: bool,
    /// `psi > (k-1)/k`, or `k = 0`.
    pub reliable: bool,
}

impl LinkClass {
    pub fn of(k: usize, psi: f64) -> Self {
        if k == 0 {
            return LinkClass {
                link_degree: 0,
                vulnerable: false,
                reliable: true,
            };
        }
        let kf = k as f64;
        LinkClass {
            link_degree: k,
            vulnerable: psi <= 1.0 / kf,
            reliable: psi > (k - 1) as f64 / kf,
        }
    }

    pub fn unreliable(&self) -> bool {
        !self.reliable
    }
}

pub fn classify_links(graph: &GeometricGraph, psi: &ThresholdAssignment) -> Result<Vec<LinkClass>> {
    check_assignment(graph, psi)?;
    Ok((0..graph.edge_count())
        .map(|e| LinkClass::of(graph.link_degree_of(e), psi.psi[e]))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeOutcome {
    pub seed_link: (usize, usize),
    /// `rounds[r]` lists the links that failed in round `r`; round 0 is the seed.
    pub rounds: Vec<Vec<(usize, usize)>>,
    /// Final failed set as a per-edge mask.
    pub failed: Vec<bool>,
    pub failed_fraction: f64,
    pub giant_threshold: f64,
    pub giant: bool,
}

impl CascadeOutcome {
    pub fn failed_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// JSON view: `{seed_link, rounds, failed_fraction, giant}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed_link": [self.seed_link.0, self.seed_link.1],
            "rounds": self.rounds.iter()
                .map(|r| r.iter().map(|&(u, v)| [u, v]).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "failed_fraction": self.failed_fraction,
            "giant": self.giant,
        })
    }
}

/// Whether a link with `failed` of its `k` neighbours down fails at threshold `psi`.
#[inline]
fn triggers(failed: usize, k: usize, psi: f64) -> bool {
    failed >= 1 && failed as f64 / k as f64 >= psi
}

/// Link-adjacency view: every link's neighbours are the other links at its two ends.
fn for_each_neighbor(graph: &GeometricGraph, edge: usize, mut f: impl FnMut(usize)) {
    let (u, v) = graph.edges()[edge];
    for &w in [u, v].iter() {
        for &other in graph.incident_edges(w) {
            if other != edge {
                f(other);
            }
        }
    }
}

fn seed_index(graph: &GeometricGraph, seed_link: (usize, usize)) -> Result<usize> {
    graph
        .edge_index(seed_link.0, seed_link.1)
        .ok_or_else(|| crate::Error::InvalidArgument(format!("seed {seed_link:?} is not an edge")))
}

pub fn run_cascade(
    graph: &GeometricGraph,
    psi: &ThresholdAssignment,
    seed_link: (usize, usize),
) -> Result<CascadeOutcome> {
    run_cascade_with_threshold(graph, psi, seed_link, DEFAULT_GIANT_THRESHOLD)
}

/// Synchronous rounds: in round `r + 1` every surviving link whose failed
/// neighbour count at the end of round `r` triggers it fails simultaneously.
pub fn run_cascade_with_threshold(
    graph: &GeometricGraph,
    psi: &ThresholdAssignment,
    seed_link: (usize, usize),
    giant_threshold: f64,
) -> Result<CascadeOutcome> {
    check_assignment(graph, psi)?;
    let seed = seed_index(graph, seed_link)?;
    let m = graph.edge_count();
    let degree = graph.link_degrees();
    let mut failed = vec![false; m];
    let mut failed_nbrs = vec![0usize; m];
    let mut rounds = vec![vec![graph.edges()[seed]]];
    failed[seed] = true;
    let mut frontier = vec![seed];
    let mut candidates = Vec::new();
    while !frontier.is_empty() {
        candidates.clear();
        for &e in &frontier {
            for_each_neighbor(graph, e, |n| {
                failed_nbrs[n] += 1;
                if !failed[n] {
                    candidates.push(n);
                }
            });
        }
        candidates.sort_unstable();
        candidates.dedup();
        let next: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&n| triggers(failed_nbrs[n], degree[n], psi.psi[n]))
            .collect();
        for &n in &next {
            failed[n] = true;
        }
        if !next.is_empty() {
            rounds.push(next.iter().map(|&n| graph.edges()[n]).collect());
        }
        frontier = next;
    }
    Ok(finish(seed_link, rounds, failed, giant_threshold))
}

fn finish(
    seed_link: (usize, usize),
    rounds: Vec<Vec<(usize, usize)>>,
    failed: Vec<bool>,
    giant_threshold: f64,
) -> CascadeOutcome {
    let count = failed.iter().filter(|&&f| f).count();
    let failed_fraction = if failed.is_empty() {
        0.0
    } else {
        count as f64 / failed.len() as f64
    };
    CascadeOutcome {
        seed_link,
        rounds,
        failed,
        failed_fraction,
        giant_threshold,
        giant: failed_fraction >= giant_threshold,
    }
}

/// Asynchronous variant: sweeps links in `order` (a permutation of edge ids),
/// failing each as soon as it qualifies, until a full sweep changes nothing.
/// Each pass that fails something is recorded as one round.
pub fn run_cascade_sequential(
    graph: &GeometricGraph,
    psi: &ThresholdAssignment,
    seed_link: (usize, usize),
    order: &[usize],
) -> Result<CascadeOutcome> {
    check_assignment(graph, psi)?;
    let seed = seed_index(graph, seed_link)?;
    let m = graph.edge_count();
    let mut seen = vec![false; m];
    if order.len() != m || !order.iter().all(|&e| e < m && !std::mem::replace(&mut seen[e], true)) {
        return invalid("order must be a permutation of the edge ids");
    }
    let degree = graph.link_degrees();
    let mut failed = vec![false; m];
    let mut failed_nbrs = vec![0usize; m];
    failed[seed] = true;
    for_each_neighbor(graph, seed, |n| failed_nbrs[n] += 1);
    let mut rounds = vec![vec![graph.edges()[seed]]];
    loop {
        let mut pass = Vec::new();
        for &e in order {
            if !failed[e] && triggers(failed_nbrs[e], degree[e], psi.psi[e]) {
                failed[e] = true;
                for_each_neighbor(graph, e, |n| failed_nbrs[n] += 1);
                pass.push(graph.edges()[e]);
            }
        }
        if pass.is_empty() {
            break;
        }
        rounds.push(pass);
    }
    Ok(finish(seed_link, rounds, failed, DEFAULT_GIANT_THRESHOLD))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VulnerableReport {
    /// Per-edge vulnerable-component id; `None` for non-vulnerable links.
    pub component_of: Vec<Option<usize>>,
    /// Component sizes in links, sorted descending.
    pub sizes: Vec<usize>,
    /// Id of the largest vulnerable component, if any link is vulnerable.
    pub largest: Option<usize>,
    /// Largest component size over the total number of links.
    pub largest_fraction: f64,
}

impl VulnerableReport {
    /// Links belonging to component `id`.
    pub fn members(&self, id: usize) -> Vec<usize> {
        (0..self.component_of.len())
            .filter(|&e| self.component_of[e] == Some(id))
            .collect()
    }

    /// Whether `edge` is in the largest vulnerable component or shares an end
    /// vertex with one of its links.
    pub fn touches_largest(&self, graph: &GeometricGraph, edge: usize) -> bool {
        let Some(id) = self.largest else { return false };
        if self.component_of[edge] == Some(id) {
            return true;
        }
        let mut hit = false;
        for_each_neighbor(graph, edge, |n| hit |= self.component_of[n] == Some(id));
        hit
    }
}

/// Components of vulnerable links, two being adjacent when they share an end vertex.
pub fn vulnerable_component_analysis(graph: &GeometricGraph, psi: &ThresholdAssignment) -> Result<VulnerableReport> {
    let classes = classify_links(graph, psi)?;
    let m = graph.edge_count();
    // Union vulnerable links incident to a common node.
    let mut pairs = Vec::new();
    for node in 0..graph.sample.len() {
        let mut first = None;
        for &e in graph.incident_edges(node) {
            if classes[e].vulnerable {
                match first {
                    None => first = Some(e),
                    Some(f) => pairs.push((f, e)),
                }
            }
        }
    }
    let report = ComponentReport::from_edges(m, pairs);
    // Renumber so that only vulnerable links carry ids, largest first.
    let raw_count = report.component_of.iter().copied().max().map_or(0, |x| x + 1);
    let mut raw_sizes = vec![0usize; raw_count];
    for e in (0..m).filter(|&e| classes[e].vulnerable) {
        raw_sizes[report.component_of[e]] += 1;
    }
    let mut ids: Vec<usize> = (0..raw_count).filter(|&c| raw_sizes[c] > 0).collect();
    ids.sort_by(|&a, &b| raw_sizes[b].cmp(&raw_sizes[a]).then(a.cmp(&b)));
    let mut remap = vec![usize::MAX; raw_count];
    for (new, &old) in ids.iter().enumerate() {
        remap[old] = new;
    }
    let component_of = (0..m)
        .map(|e| classes[e].vulnerable.then(|| remap[report.component_of[e]]))
        .collect();
    let sizes: Vec<usize> = ids.iter().map(|&c| raw_sizes[c]).collect();
    let largest = (!sizes.is_empty()).then_some(0);
    let largest_fraction = if m == 0 {
        0.0
    } else {
        sizes.first().copied().unwrap_or(0) as f64 / m as f64
    };
    Ok(VulnerableReport {
        component_of,
        sizes,
        largest,
        largest_fraction,
    })
}
