//! Unit-disk graphs over point samples, link degrees and connected components.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Boundary, Point, PointSample, Region};

/// Anything with planar node positions and an adjacency relation. Crossing
/// predicates run over this, so they apply to both graphs and covering graphs.
pub trait PlanarStructure {
    fn node_count(&self) -> usize;
    fn position(&self, node: usize) -> Point;
    fn neighbors(&self, node: usize) -> &[usize];
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraph {
    pub sample: PointSample,
    pub radius: f64,
    adjacency: Vec<Vec<usize>>,
    /// `incident[u][j]` is the edge id of `(u, adjacency[u][j])`.
    incident: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl GeometricGraph {
    /// Assembles a graph from an edge list over `sample`'s nodes. Edges are
    /// normalised to `u < v` and sorted; duplicates and self-loops are rejected.
    pub fn from_edges(sample: PointSample, radius: f64, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = sample.len();
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return invalid(format!("duplicate edge {:?}", w[0]));
            }
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u == v || v >= n) {
            return invalid(format!("edge ({u}, {v}) is a self-loop or out of range"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let incident = adjacency
            .iter()
            .enumerate()
            .map(|(u, nbrs)| {
                nbrs.iter()
                    .map(|&v| {
                        let key = if u < v { (u, v) } else { (v, u) };
                        edges.binary_search(&key).expect("edge present")
                    })
                    .collect()
            })
            .collect();
        Ok(GeometricGraph {
            sample,
            radius,
            adjacency,
            incident,
            edges,
        })
    }

    pub fn region(&self) -> &Region {
        &self.sample.region
    }

    pub fn points(&self) -> &[Point] {
        &self.sample.points
    }

    /// Edges in canonical lexicographic order, each with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Edge ids incident to `node`, aligned with `neighbors(node)`.
    pub fn incident_edges(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).ok()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.sample.is_empty() {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.sample.len() as f64
    }

    /// Number of other links sharing an end vertex with `(u, v)`.
    pub fn link_degree(&self, u: usize, v: usize) -> Result<usize> {
        match self.edge_index(u, v) {
            Some(e) => Ok(self.link_degree_of(e)),
            None => invalid(format!("({u}, {v}) is not an edge")),
        }
    }

    pub fn link_degree_of(&self, edge: usize) -> usize {
        let (u, v) = self.edges[edge];
        self.degree(u) + self.degree(v) - 2
    }

    /// Link degrees of all edges in canonical order.
    pub fn link_degrees(&self) -> Vec<usize> {
        (0..self.edges.len()).map(|e| self.link_degree_of(e)).collect()
    }

    pub fn components(&self) -> ComponentReport {
        ComponentReport::from_edges(self.sample.len(), self.edges.iter().copied())
    }
}

impl PlanarStructure for GeometricGraph {
    fn node_count(&self) -> usize {
        self.sample.len()
    }

    fn position(&self, node: usize) -> Point {
        self.sample.points[node]
    }

    fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }
}

/// Builds the graph joining every pair at distance `<= radius` with a uniform
/// cell grid of side at least `radius`, scanning the 3x3 cell neighbourhood.
pub fn build_rgg(sample: PointSample, radius: f64) -> Result<GeometricGraph> {
    if !(radius.is_finite() && radius > 0.0) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let region = sample.region;
    let torus = region.boundary == Boundary::Torus;
    if torus && radius >= 0.5 * region.width.min(region.height) {
        return invalid(format!(
            "radius {radius} must be below half the torus side ({} x {})",
            region.width, region.height
        ));
    }

    let cols = ((region.width / radius).floor() as usize).max(1);
    let rows = ((region.height / radius).floor() as usize).max(1);
    let cell_w = region.width / cols as f64;
    let cell_h = region.height / rows as f64;
    let cell_of = |p: Point| -> (usize, usize) {
        let cx = ((p.x / cell_w) as usize).min(cols - 1);
        let cy = ((p.y / cell_h) as usize).min(rows - 1);
        (cx, cy)
    };

    // Counting sort of points into cells.
    let points = &sample.points;
    let mut start = vec![0usize; cols * rows + 1];
    let cells: Vec<usize> = points
        .iter()
        .map(|&p| {
            let (cx, cy) = cell_of(p);
            cy * cols + cx
        })
        .collect();
    for &c in &cells {
        start[c + 1] += 1;
    }
    for i in 0..cols * rows {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; points.len()];
    for (i, &c) in cells.iter().enumerate() {
        order[fill[c]] = i;
        fill[c] += 1;
    }

    let r2 = radius * radius;
    let mut edges = Vec::new();
    let mut neigh_cells: Vec<usize> = Vec::with_capacity(9);
    for cy in 0..rows {
        for cx in 0..cols {
            neigh_cells.clear();
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (mut nx, mut ny) = (cx as i64 + dx, cy as i64 + dy);
                    if torus {
                        nx = nx.rem_euclid(cols as i64);
                        ny = ny.rem_euclid(rows as i64);
                    } else if nx < 0 || ny < 0 || nx >= cols as i64 || ny >= rows as i64 {
                        continue;
                    }
                    neigh_cells.push(ny as usize * cols + nx as usize);
                }
            }
            // Small grids wrap onto the same cell more than once.
            neigh_cells.sort_unstable();
            neigh_cells.dedup();

            let here = cy * cols + cx;
            for &i in &order[start[here]..start[here + 1]] {
                for &nc in &neigh_cells {
                    for &j in &order[start[nc]..start[nc + 1]] {
                        if i < j && region.distance_sq(points[i], points[j]) <= r2 {
                            edges.push((i, j));
                        }
                    }
                }
            }
        }
    }
    GeometricGraph::from_edges(sample, radius, edges)
}

/// Connected components, with ids assigned in order of each component's
/// smallest node and sizes sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub component_of: Vec<usize>,
    pub sizes: Vec<usize>,
    pub largest: usize,
    pub largest_fraction: f64,
}

impl ComponentReport {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        if n == 0 {
            return ComponentReport {
                component_of: Vec::new(),
                sizes: Vec::new(),
                largest: 0,
                largest_fraction: 0.0,
            };
        }
        let mut uf = UnionFind::<usize>::new(n);
        for (u, v) in edges {
            uf.union(u, v);
        }
        let mut id_of_root = vec![usize::MAX; n];
        let mut component_of = Vec::with_capacity(n);
        let mut sizes = Vec::new();
        for node in 0..n {
            let root = uf.find_mut(node);
            if id_of_root[root] == usize::MAX {
                id_of_root[root] = sizes.len();
                sizes.push(0);
            }
            let id = id_of_root[root];
            sizes[id] += 1;
            component_of.push(id);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let largest = sizes[0];
        ComponentReport {
            component_of,
            sizes,
            largest,
            largest_fraction: largest as f64 / n as f64,
        }
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}
