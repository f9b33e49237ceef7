//! Shared fixtures for the criterion benchmarks.

use percolade_core::geometry::{sample_poisson, Boundary, Region};
use percolade_core::graph::{build_rgg, GeometricGraph};

/// Unit-radius torus graph at intensity `lambda` over a square of `area`.
pub fn torus_graph(lambda: f64, area: f64, seed: u64) -> GeometricGraph {
    let region = Region::square(area, Boundary::Torus).expect("valid area");
    build_rgg(sample_poisson(lambda, region, seed).expect("valid density"), 1.0).expect("valid radius")
}
