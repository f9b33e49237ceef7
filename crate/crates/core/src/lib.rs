//! Random geometric graphs under degree-dependent link failures and
//! threshold-driven cascading link failures.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] and [`graph`] sample Poisson point sets and build unit-disk
//!   graphs with their component structure.
//! * [`covering`] maps every link of a graph to a node placed at its midpoint,
//!   turning link (bond) failures into node (site) failures.
//! * [`failure`] applies i.i.d. and degree-dependent failures.
//! * [`lattice`] implements the rectangle crossing events used by the
//!   square-lattice renormalisation and estimates their probabilities.
//! * [`bounds`] evaluates the closed-form existence and non-existence conditions.
//! * [`cascade`] simulates threshold cascades and classifies links.
//! * [`experiments`] runs reproducible Monte Carlo campaigns.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cascade;
pub mod covering;
pub mod error;
pub mod experiments;
pub mod failure;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod report;
pub mod rng;
pub mod stats;

pub use bounds::{BoundsReport, ConditionId};
pub use cascade::{CascadeOutcome, LinkClass, ThresholdAssignment, ThresholdDistribution};
pub use covering::CoveringGraph;
pub use error::{Error, Result};
pub use experiments::{Bracket, EstimateRow, SeedMode, SweepConfig, SystemSize};
pub use failure::{DegreeFailureRule, Monotonicity, SurvivingGraph};
pub use geometry::{Boundary, Point, PointSample, Region};
pub use graph::{ComponentReport, GeometricGraph, PlanarStructure};
pub use lattice::{CrossingEstimate, CrossingEvent, LatticeEdge, LatticeSpec, Rectangle};
