//! Closed-form existence and non-existence conditions for the giant component
//! after degree-dependent link failures, and for threshold cascades.
//!
//! The infinite Poisson series are summed in the log domain and truncated once
//! a rigorous bound on the discarded Poisson tail drops below a tolerance.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::cascade::{sigma_k, ThresholdDistribution};
use crate::error::{invalid, Result};
use crate::failure::{DegreeFailureRule, Monotonicity};

/// Renormalised-lattice open-edge target: `1 / (9 + 2 sqrt 3)`.
pub const Q0: f64 = 0.080_230_411_374_815_15;

/// Existence threshold of the non-decreasing series: `1 - 1/27`.
pub const UPPER_THRESHOLD: f64 = 1.0 - 1.0 / 27.0;

/// Non-existence threshold of the non-increasing and cascade series: `1/27`.
pub const LOWER_THRESHOLD: f64 = 1.0 / 27.0;

/// Area factor `2 sqrt 2 + pi` of the inner Poisson weight.
pub const NEIGHBOURHOOD_FACTOR: f64 = 2.0 * SQRT_2 + PI;

/// Default bound on each discarded Poisson tail.
pub const TRUNCATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "T3-sufficient")]
    T3Sufficient,
    #[serde(rename = "T4-nondecreasing")]
    T4NonDecreasing,
    #[serde(rename = "T4-nonincreasing")]
    T4NonIncreasing,
    #[serde(rename = "T5-cascade-exists")]
    T5CascadeExists,
    #[serde(rename = "T6-no-cascade")]
    T6NoCascade,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub condition: ConditionId,
    pub lhs: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub truncation_bound: f64,
    /// The `k1` the condition was evaluated with, when it takes one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
}

/// Poisson(`mean`) probabilities for `0..=K`, where `K` is the first index at
/// or past the mode whose tail bound `P(N > K)` is below `tol`.
#[derive(Clone, Debug)]
pub(crate) struct PoissonWeights {
    pub weights: Vec<f64>,
    /// Upper bound on `P(N > K)`.
    pub tail_bound: f64,
}

impl PoissonWeights {
    pub fn truncated(mean: f64, tol: f64) -> Self {
        debug_assert!(mean > 0.0 && tol > 0.0);
        let ln_mean = mean.ln();
        let mut ln_p = -mean;
        let mut weights = Vec::new();
        let mut k = 0usize;
        loop {
            weights.push(ln_p.exp());
            // ln P(N = k + 1)
            ln_p += ln_mean - ((k + 1) as f64).ln();
            let next = (k + 2) as f64;
            if next > mean {
                // Ratio of successive terms past k + 1 is at most mean / (k + 2).
                let bound = ln_p.exp() / (1.0 - mean / next);
                if bound < tol {
                    return PoissonWeights {
                        weights,
                        tail_bound: bound,
                    };
                }
            }
            k += 1;
        }
    }
}

fn check_lambda_prime(lambda_prime: f64) -> Result<()> {
    if !(lambda_prime.is_finite() && lambda_prime > 0.0) {
        return invalid(format!("lambda' must be positive, got {lambda_prime}"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return invalid(format!("truncation tolerance must lie in (0, 1), got {tol}"));
    }
    Ok(())
}

/// `sum_{k>=0} P_{mu}(k) g(k)` with `g(0) = 1`, `g(k) = q(k-1)^k`, `mu = lambda'/2`.
fn single_series(lambda_prime: f64, tol: f64, q: impl Fn(usize) -> f64) -> (f64, f64) {
    let outer = PoissonWeights::truncated(lambda_prime / 2.0, tol);
    let lhs = outer
        .weights
        .iter()
        .enumerate()
        .map(|(k, w)| if k == 0 { *w } else { w * q(k - 1).powi(k as i32) })
        .sum();
    (lhs, outer.tail_bound)
}

/// `sum_{k>=1} P_{mu}(k) sum_{m>=0} P_{nu}(m) (1 - q(m+k-1)^k)` with
/// `mu = lambda'/2`, `nu = lambda' (2 sqrt 2 + pi)`.
fn double_series(lambda_prime: f64, tol: f64, q: impl Fn(usize) -> f64) -> (f64, f64) {
    let outer = PoissonWeights::truncated(lambda_prime / 2.0, tol);
    let inner = PoissonWeights::truncated(lambda_prime * NEIGHBOURHOOD_FACTOR, tol);
    let mut lhs = 0.0;
    for (k, wk) in outer.weights.iter().enumerate().skip(1) {
        let s: f64 = inner
            .weights
            .iter()
            .enumerate()
            .map(|(m, wm)| wm * (1.0 - q(m + k - 1).powi(k as i32)))
            .sum();
        lhs += wk * s;
    }
    (lhs, outer.tail_bound + inner.tail_bound)
}

/// Sufficient condition for a giant component: `q(k) <= 1 - lambda1/lambda`
/// for every integer `1 <= k <= k1`. Degrees above `k1` are unconstrained.
pub fn theorem3_condition(rule: &DegreeFailureRule, lambda: f64, lambda1: f64, k1: f64) -> Result<BoundsReport> {
    if !(lambda1 > 0.0 && lambda > lambda1) {
        return invalid(format!("need lambda > lambda1 > 0, got {lambda}, {lambda1}"));
    }
    if !(k1 >= 1.0) {
        return invalid(format!("k1 must be at least 1, got {k1}"));
    }
    let threshold = 1.0 - lambda1 / lambda;
    let last = (k1.floor() as usize).min(rule.settled_from().max(1));
    let lhs = (1..=last).map(|k| rule.q(k)).fold(0.0, f64::max);
    Ok(BoundsReport {
        condition: ConditionId::T3Sufficient,
        lhs,
        threshold,
        satisfied: lhs <= threshold,
        truncation_bound: 0.0,
        k1: Some(k1),
    })
}

fn require_monotone(rule: &DegreeFailureRule, wanted: Monotonicity) -> Result<()> {
    if rule.is_constant() || rule.monotonicity() == wanted {
        Ok(())
    } else {
        invalid(format!(
            "rule must be declared {wanted:?}, found {:?}",
            rule.monotonicity()
        ))
    }
}

pub fn theorem4_nondecreasing_lhs(rule: &DegreeFailureRule, lambda_prime: f64) -> Result<BoundsReport> {
    theorem4_nondecreasing_lhs_with_tol(rule, lambda_prime, TRUNCATION_TOL)
}

/// No giant component when `q` is non-decreasing and the series exceeds `1 - 1/27`.
pub fn theorem4_nondecreasing_lhs_with_tol(
    rule: &DegreeFailureRule,
    lambda_prime: f64,
    tol: f64,
) -> Result<BoundsReport> {
    check_lambda_prime(lambda_prime)?;
    check_tol(tol)?;
    require_monotone(rule, Monotonicity::NonDecreasing)?;
    let (lhs, bound) = single_series(lambda_prime, tol, |k| rule.q(k));
    Ok(BoundsReport {
        condition: ConditionId::T4NonDecreasing,
        lhs,
        threshold: UPPER_THRESHOLD,
        satisfied: lhs > UPPER_THRESHOLD,
        truncation_bound: bound,
        k1: None,
    })
}

pub fn theorem4_nonincreasing_lhs(rule: &DegreeFailureRule, lambda_prime: f64) -> Result<BoundsReport> {
    theorem4_nonincreasing_lhs_with_tol(rule, lambda_prime, TRUNCATION_TOL)
}

/// No giant component when `q` is non-increasing and the double series is below `1/27`.
pub fn theorem4_nonincreasing_lhs_with_tol(
    rule: &DegreeFailureRule,
    lambda_prime: f64,
    tol: f64,
) -> Result<BoundsReport> {
    check_lambda_prime(lambda_prime)?;
    check_tol(tol)?;
    require_monotone(rule, Monotonicity::NonIncreasing)?;
    let (lhs, bound) = double_series(lambda_prime, tol, |k| rule.q(k));
    Ok(BoundsReport {
        condition: ConditionId::T4NonIncreasing,
        lhs,
        threshold: LOWER_THRESHOLD,
        satisfied: lhs < LOWER_THRESHOLD,
        truncation_bound: bound,
        k1: None,
    })
}

/// A giant vulnerable component exists when `F(1/k1) >= lambda1/lambda`.
pub fn theorem5_condition(dist: &ThresholdDistribution, lambda: f64, lambda1: f64, k1: f64) -> Result<BoundsReport> {
    if !(lambda1 > 0.0 && lambda > lambda1) {
        return invalid(format!("need lambda > lambda1 > 0, got {lambda}, {lambda1}"));
    }
    if !(k1 >= 1.0) {
        return invalid(format!("k1 must be at least 1, got {k1}"));
    }
    let lhs = dist.cdf(1.0 / k1);
    let threshold = lambda1 / lambda;
    Ok(BoundsReport {
        condition: ConditionId::T5CascadeExists,
        lhs,
        threshold,
        satisfied: lhs >= threshold,
        truncation_bound: 0.0,
        k1: Some(k1),
    })
}

pub fn theorem6_lhs(dist: &ThresholdDistribution, lambda_prime: f64) -> Result<BoundsReport> {
    theorem6_lhs_with_tol(dist, lambda_prime, TRUNCATION_TOL)
}

/// No cascade when the double series with `q(j) = sigma_j = 1 - F((j-1)/j)` is
/// below `1/27`. The `j = 0` slot takes `F(-inf) = 0`, i.e. `q(0) = 1`.
pub fn theorem6_lhs_with_tol(dist: &ThresholdDistribution, lambda_prime: f64, tol: f64) -> Result<BoundsReport> {
    check_lambda_prime(lambda_prime)?;
    check_tol(tol)?;
    let (lhs, bound) = double_series(lambda_prime, tol, |j| {
        if j == 0 {
            1.0
        } else {
            sigma_k(dist, j).expect("j >= 1")
        }
    });
    Ok(BoundsReport {
        condition: ConditionId::T6NoCascade,
        lhs,
        threshold: LOWER_THRESHOLD,
        satisfied: lhs < LOWER_THRESHOLD,
        truncation_bound: bound,
        k1: None,
    })
}
