//! Planar regions and Poisson point samples.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Opposite sides identified; distances use the minimum image.
    #[default]
    Torus,
    /// Plain Euclidean box.
    HardWall,
}

/// Axis-aligned box `[0, width) x [0, height)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
    pub boundary: Boundary,
}

impl Region {
    pub fn new(width: f64, height: f64, boundary: Boundary) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return invalid(format!("region sides must be positive, got {width} x {height}"));
        }
        Ok(Region {
            width,
            height,
            boundary,
        })
    }

    pub fn square(area: f64, boundary: Boundary) -> Result<Self> {
        if !(area.is_finite() && area > 0.0) {
            return invalid(format!("region area must be positive, got {area}"));
        }
        let side = area.sqrt();
        Region::new(side, side, boundary)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.width).contains(&p.x) && (0.0..self.height).contains(&p.y)
    }

    /// Displacement from `a` to `b`, wrapped to the minimum image on a torus.
    #[inline]
    pub fn displacement(&self, a: Point, b: Point) -> (f64, f64) {
        let mut dx = b.x - a.x;
        let mut dy = b.y - a.y;
        if self.boundary == Boundary::Torus {
            dx = wrap_delta(dx, self.width);
            dy = wrap_delta(dy, self.height);
        }
        (dx, dy)
    }

    #[inline]
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx * dx + dy * dy
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Midpoint of the shortest segment from `a` to `b`, folded back into the box.
    pub fn midpoint(&self, a: Point, b: Point) -> Point {
        let (dx, dy) = self.displacement(a, b);
        let mut m = Point::new(a.x + 0.5 * dx, a.y + 0.5 * dy);
        if self.boundary == Boundary::Torus {
            m.x = fold(m.x, self.width);
            m.y = fold(m.y, self.height);
        }
        m
    }
}

#[inline]
fn wrap_delta(d: f64, side: f64) -> f64 {
    if d > 0.5 * side {
        d - side
    } else if d < -0.5 * side {
        d + side
    } else {
        d
    }
}

fn fold(v: f64, side: f64) -> f64 {
    let r = v.rem_euclid(side);
    if r >= side {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub region: Region,
    pub points: Vec<Point>,
    /// Points per unit area: the Poisson intensity, or `n / area` for a fixed count.
    pub density: f64,
    pub seed: u64,
}

impl PointSample {
    /// Wraps explicit coordinates, e.g. hand-built configurations in tests.
    pub fn from_points(region: Region, points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !region.contains(**p)) {
            return invalid(format!("point ({}, {}) lies outside the region", p.x, p.y));
        }
        let density = points.len() as f64 / region.area();
        Ok(PointSample {
            region,
            points,
            density,
            seed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn uniform_points<R: Rng>(rng: &mut R, region: &Region, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let x = (rng.random::<f64>() * region.width).min(region.width.next_down());
            let y = (rng.random::<f64>() * region.height).min(region.height.next_down());
            Point::new(x, y)
        })
        .collect()
}

/// Homogeneous Poisson process of intensity `density` in `region`.
pub fn sample_poisson(density: f64, region: Region, seed: u64) -> Result<PointSample> {
    if !(density.is_finite() && density > 0.0) {
        return invalid(format!("density must be positive, got {density}"));
    }
    let region = Region::new(region.width, region.height, region.boundary)?;
    let mut rng = stream_rng(seed, Stream::Points);
    let mean = density * region.area();
    let count = Poisson::new(mean)
        .map_err(|e| crate::Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let points = uniform_points(&mut rng, &region, count);
    Ok(PointSample {
        region,
        points,
        density,
        seed,
    })
}

/// Exactly `n` i.i.d. uniform points in `region`.
pub fn sample_fixed_n(n: usize, region: Region, seed: u64) -> Result<PointSample> {
    let region = Region::new(region.width, region.height, region.boundary)?;
    let mut rng = stream_rng(seed, Stream::Points);
    let points = uniform_points(&mut rng, &region, n);
    Ok(PointSample {
        region,
        points,
        density: n as f64 / region.area(),
        seed,
    })
}
