//! Reproducible Monte Carlo campaigns.
//!
//! Trial `t` at grid index `g` draws everything from
//! `derive_seed(master_seed, [g, t])`. Trials run on the ambient rayon pool
//! and are collected in trial order before any reduction, so outputs are
//! bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{theorem3_condition, theorem4_nondecreasing_lhs, theorem4_nonincreasing_lhs, BoundsReport};
use crate::cascade::{
    run_cascade_with_threshold, sample_thresholds, vulnerable_component_analysis, ThresholdDistribution,
    DEFAULT_GIANT_THRESHOLD,
};
use crate::covering::covering_density;
use crate::error::{invalid, Result};
use crate::failure::{apply_degree_dependent_link_failures, DegreeFailureRule};
use crate::geometry::{sample_fixed_n, sample_poisson, Boundary, Region};
use crate::graph::{build_rgg, GeometricGraph};
use crate::rng::{derive_seed, uniform_at, Stream};
use crate::stats::{wilson_interval, Summary, Z95};

/// L1-fraction level whose crossing brackets the critical density.
pub const DEFAULT_LAMBDA_C_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSize {
    /// Exactly `n` points in a square of area `n / lambda`.
    Nodes(usize),
    /// Poisson points in a square of the given area.
    Area(f64),
}

fn default_giant() -> f64 {
    DEFAULT_GIANT_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Intensities to sweep.
    pub grid: Vec<f64>,
    pub size: SystemSize,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub boundary: Boundary,
    /// Failed or connected fraction counted as giant.
    #[serde(default = "default_giant")]
    pub giant_threshold: f64,
}

impl SweepConfig {
    pub fn new(grid: Vec<f64>, size: SystemSize, trials: usize, master_seed: u64) -> Self {
        SweepConfig {
            grid,
            size,
            trials,
            master_seed,
            boundary: Boundary::Torus,
            giant_threshold: DEFAULT_GIANT_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return invalid("grid: must not be empty");
        }
        if let Some(x) = self.grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return invalid(format!("grid: intensity {x} must be positive"));
        }
        if self.trials == 0 {
            return invalid("trials: must be at least 1");
        }
        match self.size {
            SystemSize::Nodes(0) => return invalid("size.nodes: must be at least 1"),
            SystemSize::Area(a) if !(a.is_finite() && a > 0.0) => {
                return invalid(format!("size.area: must be positive, got {a}"))
            }
            _ => {}
        }
        if !(self.giant_threshold > 0.0 && self.giant_threshold <= 1.0) {
            return invalid(format!(
                "giant_threshold: must lie in (0, 1], got {}",
                self.giant_threshold
            ));
        }
        Ok(())
    }

    pub fn trial_seed(&self, grid_index: usize, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[grid_index as u64, trial as u64])
    }
}

/// Samples the unit-radius graph for one trial.
pub fn sample_graph(lambda: f64, size: SystemSize, boundary: Boundary, seed: u64) -> Result<GeometricGraph> {
    let sample = match size {
        SystemSize::Nodes(n) => sample_fixed_n(n, Region::square(n as f64 / lambda, boundary)?, seed)?,
        SystemSize::Area(a) => sample_poisson(lambda, Region::square(a, boundary)?, seed)?,
    };
    build_rgg(sample, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub value: f64,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EstimateRow {
    pub fn from_samples(value: f64, samples: &[f64]) -> Self {
        let s = Summary::of(samples);
        let (ci_low, ci_high) = s.ci95();
        EstimateRow {
            value,
            mean: s.mean,
            std_error: s.std_error,
            trials: s.count,
            ci_low,
            ci_high,
        }
    }
}

fn run_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(f).collect()
}

/// Largest-component fraction per trial for one grid point.
fn l1_fractions(config: &SweepConfig, grid_index: usize, lambda: f64) -> Result<Vec<f64>> {
    run_trials(config.trials, |t| {
        let g = sample_graph(lambda, config.size, config.boundary, config.trial_seed(grid_index, t))?;
        Ok(g.components().largest_fraction)
    })
}

/// Mean largest-component fraction at every grid intensity.
pub fn percolation_sweep(config: &SweepConfig) -> Result<Vec<EstimateRow>> {
    config.validate()?;
    config
        .grid
        .iter()
        .enumerate()
        .map(|(gi, &lambda)| Ok(EstimateRow::from_samples(lambda, &l1_fractions(config, gi, lambda)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Bracket {
    /// Adjacent grid points with mean L1-fraction below and at-or-above the threshold.
    Bracketed { low: f64, high: f64 },
    /// Every grid point is at or above the threshold.
    AllAbove,
    /// No grid point reaches the threshold.
    AllBelow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCEstimate {
    pub threshold: f64,
    pub bracket: Bracket,
    pub rows: Vec<EstimateRow>,
}

/// First adjacent pair of an increasing grid across which the mean
/// L1-fraction rises through `threshold`. A finite-size convention, not an
/// exact critical density.
pub fn estimate_lambda_c(config: &SweepConfig, threshold: f64) -> Result<LambdaCEstimate> {
    if config.grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("grid: must be strictly increasing");
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return invalid(format!("threshold must lie in (0, 1), got {threshold}"));
    }
    let rows = percolation_sweep(config)?;
    let bracket = rows
        .windows(2)
        .find(|w| w[0].mean < threshold && w[1].mean >= threshold)
        .map(|w| Bracket::Bracketed {
            low: w[0].value,
            high: w[1].value,
        })
        .unwrap_or(if rows.iter().all(|r| r.mean >= threshold) {
            Bracket::AllAbove
        } else {
            Bracket::AllBelow
        });
    Ok(LambdaCEstimate {
        threshold,
        bracket,
        rows,
    })
}

/// Inputs of the sufficient condition, which needs a reference intensity and `k1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientInputs {
    pub lambda1: f64,
    pub k1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeFailureReport {
    /// Surviving largest-component fraction statistics; `value` is the intensity.
    pub row: EstimateRow,
    /// Largest surviving fraction seen in any trial.
    pub max_fraction: f64,
    pub fractions: Vec<f64>,
    /// Every condition applicable to the rule's shape.
    pub bounds: Vec<BoundsReport>,
}

fn applicable_bounds(rule: &DegreeFailureRule, lambda: f64, t3: Option<SufficientInputs>) -> Result<Vec<BoundsReport>> {
    let lambda_prime = covering_density(lambda);
    let mut out = Vec::new();
    if let Some(SufficientInputs { lambda1, k1 }) = t3 {
        out.push(theorem3_condition(rule, lambda, lambda1, k1)?);
    }
    // Each series applies only to rules of the matching shape.
    if let Ok(r) = theorem4_nondecreasing_lhs(rule, lambda_prime) {
        out.push(r);
    }
    if let Ok(r) = theorem4_nonincreasing_lhs(rule, lambda_prime) {
        out.push(r);
    }
    Ok(out)
}

fn degree_failure_point(
    grid_index: usize,
    lambda: f64,
    rule: &DegreeFailureRule,
    config: &SweepConfig,
    t3: Option<SufficientInputs>,
) -> Result<DegreeFailureReport> {
    let fractions = run_trials(config.trials, |t| {
        let seed = config.trial_seed(grid_index, t);
        let g = sample_graph(lambda, config.size, config.boundary, seed)?;
        Ok(apply_degree_dependent_link_failures(&g, rule, seed).largest_fraction())
    })?;
    Ok(DegreeFailureReport {
        row: EstimateRow::from_samples(lambda, &fractions),
        max_fraction: fractions.iter().copied().fold(0.0, f64::max),
        fractions,
        bounds: applicable_bounds(rule, lambda, t3)?,
    })
}

/// Degree-dependent failures at one intensity. Trial seeds are those of grid
/// index 0, so a one-point [`percolation_sweep`] at `lambda` sees the same graphs.
pub fn degree_failure_experiment(
    lambda: f64,
    rule: &DegreeFailureRule,
    config: &SweepConfig,
    t3: Option<SufficientInputs>,
) -> Result<DegreeFailureReport> {
    config.validate()?;
    if !(lambda > 0.0) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    degree_failure_point(0, lambda, rule, config, t3)
}

/// [`degree_failure_experiment`] over every grid intensity.
pub fn degree_failure_sweep(
    rule: &DegreeFailureRule,
    config: &SweepConfig,
    t3: Option<SufficientInputs>,
) -> Result<Vec<DegreeFailureReport>> {
    config.validate()?;
    config
        .grid
        .iter()
        .enumerate()
        .map(|(gi, &l)| degree_failure_point(gi, l, rule, config, t3))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMode {
    /// Seed link uniform over all links.
    #[default]
    Uniform,
    /// Seed link uniform over links in, or sharing a vertex with, the largest
    /// vulnerable component; uniform over all links if nothing is vulnerable.
    VulnerableComponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeTrial {
    pub edges: usize,
    pub failed: usize,
    pub failed_fraction: f64,
    pub giant: bool,
    /// `None` when the graph has no links.
    pub seed_link: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub lambda: f64,
    pub seed_mode: SeedMode,
    pub giant_threshold: f64,
    pub failed_fraction: EstimateRow,
    pub giant_rate: f64,
    pub giant_ci: (f64, f64),
    pub histogram: Vec<HistogramBin>,
    pub trials: Vec<CascadeTrial>,
}

pub const HISTOGRAM_BINS: usize = 20;

fn histogram(fractions: &[f64]) -> Vec<HistogramBin> {
    let n = HISTOGRAM_BINS as f64;
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            low: i as f64 / n,
            high: (i + 1) as f64 / n,
            count: 0,
        })
        .collect();
    for &f in fractions {
        let i = ((f * n) as usize).min(HISTOGRAM_BINS - 1);
        bins[i].count += 1;
    }
    bins
}

/// One cascade trial: fresh graph, fresh thresholds, one seed link.
pub fn cascade_trial(
    lambda: f64,
    dist: &ThresholdDistribution,
    config: &SweepConfig,
    mode: SeedMode,
    seed: u64,
) -> Result<CascadeTrial> {
    let g = sample_graph(lambda, config.size, config.boundary, seed)?;
    let m = g.edge_count();
    if m == 0 {
        return Ok(CascadeTrial {
            edges: 0,
            failed: 0,
            failed_fraction: 0.0,
            giant: false,
            seed_link: None,
        });
    }
    let psi = sample_thresholds(&g, dist, seed);
    let u = uniform_at(seed, Stream::SeedLink, 0);
    let pick = |len: usize| ((u * len as f64) as usize).min(len - 1);
    let seed_edge = match mode {
        SeedMode::Uniform => pick(m),
        SeedMode::VulnerableComponent => {
            let vul = vulnerable_component_analysis(&g, &psi)?;
            let candidates: Vec<usize> = (0..m).filter(|&e| vul.touches_largest(&g, e)).collect();
            if candidates.is_empty() {
                pick(m)
            } else {
                candidates[pick(candidates.len())]
            }
        }
    };
    let seed_link = g.edges()[seed_edge];
    let out = run_cascade_with_threshold(&g, &psi, seed_link, config.giant_threshold)?;
    Ok(CascadeTrial {
        edges: m,
        failed: out.failed_count(),
        failed_fraction: out.failed_fraction,
        giant: out.giant,
        seed_link: Some(seed_link),
    })
}

/// Cascade-size distribution at one intensity (grid index 0 seeds).
pub fn cascade_experiment(
    lambda: f64,
    dist: &ThresholdDistribution,
    config: &SweepConfig,
    mode: SeedMode,
) -> Result<CascadeReport> {
    config.validate()?;
    if !(lambda > 0.0) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    let trials = run_trials(config.trials, |t| {
        cascade_trial(lambda, dist, config, mode, config.trial_seed(0, t))
    })?;
    let fractions: Vec<f64> = trials.iter().map(|t| t.failed_fraction).collect();
    let giants = trials.iter().filter(|t| t.giant).count();
    Ok(CascadeReport {
        lambda,
        seed_mode: mode,
        giant_threshold: config.giant_threshold,
        failed_fraction: EstimateRow::from_samples(lambda, &fractions),
        giant_rate: giants as f64 / trials.len() as f64,
        giant_ci: wilson_interval(giants, trials.len(), Z95),
        histogram: histogram(&fractions),
        trials,
    })
}
