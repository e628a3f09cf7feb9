//! Finite bounded-geometry metric spaces with integer metrics.
//!
//! Points are dense indices `0..len()`; each space also carries printable
//! identifiers. Several metric backends share one interface: explicit
//! matrices, graph metrics (cached as a matrix up to
//! [`DENSE_GRAPH_LIMIT`] vertices, breadth-first search beyond), subsets of
//! ℤ, cycles ℤ/m, the stacked product X×{0..K−1} and coarse disjoint unions.

mod metric;
mod window;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::rational::Rational;

pub use window::{
    interval_window, regular_tree_window, stacked_product_window,
    stacked_product_window_with_halo, WindowedSpace,
};

pub(crate) use metric::Metric;

/// Index of a point inside a [`FiniteMetricSpace`].
pub type Point = usize;

/// Graphs up to this many vertices get an all-pairs distance matrix.
pub const DENSE_GRAPH_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("duplicate vertex identifier {0:?}")]
    DuplicateVertex(String),
    #[error("self-loop edge at {0:?}")]
    SelfLoop(String),
    #[error("edge references undeclared vertex {0:?}")]
    UnknownVertex(String),
    #[error("point index {0} is out of range")]
    UnknownPoint(Point),
    #[error("unknown point identifier {0:?}")]
    UnknownLabel(String),
    #[error("operation requires a nonempty set")]
    EmptySet,
    #[error("distance matrix must be {n}x{n}")]
    MatrixShape { n: usize },
    #[error("distance matrix is not a metric: {0}")]
    NotAMetric(String),
    #[error("integer subset must be strictly increasing (at position {0})")]
    NotIncreasing(usize),
    #[error("stacked product needs at least 2 layers, got {0}")]
    TooFewLayers(usize),
    #[error("halo depth {halo} leaves no core layers out of {layers}")]
    HaloTooDeep { halo: usize, layers: usize },
    #[error("cycle length must be positive")]
    EmptyCycle,
    #[error("point {0:?} listed twice in the core")]
    DuplicateCorePoint(String),
}

/// A finite metric space with nonnegative integer distances.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    metric: Metric,
    names: Option<Names>,
}

#[derive(Clone, Debug)]
struct Names {
    labels: Vec<String>,
    index: HashMap<String, Point>,
}

impl Names {
    fn new(labels: Vec<String>) -> Result<Self, SpaceError> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(SpaceError::DuplicateVertex(label.clone()));
            }
        }
        Ok(Names { labels, index })
    }
}

impl FiniteMetricSpace {
    /// Shortest-path (hop count) metric of an undirected graph.
    ///
    /// Pairs in different components are `len() + 1` apart (the disconnected
    /// sentinel).
    pub fn from_graph<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(S, S)],
    ) -> Result<Self, SpaceError> {
        let names = Names::new(vertices.iter().map(|v| v.as_ref().to_string()).collect())?;
        let mut adj = vec![Vec::new(); vertices.len()];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let i = *names
                .index
                .get(a)
                .ok_or_else(|| SpaceError::UnknownVertex(a.to_string()))?;
            let j = *names
                .index
                .get(b)
                .ok_or_else(|| SpaceError::UnknownVertex(b.to_string()))?;
            if i == j {
                return Err(SpaceError::SelfLoop(a.to_string()));
            }
            adj[i].push(j as u32);
            adj[j].push(i as u32);
        }
        Ok(FiniteMetricSpace {
            metric: Metric::graph(adj),
            names: Some(names),
        })
    }

    /// Graph metric from an adjacency list over unnamed points `0..n`.
    pub fn from_adjacency(adj: Vec<Vec<Point>>) -> Self {
        let labels = (0..adj.len()).map(|i| i.to_string()).collect();
        let adj = adj
            .into_iter()
            .map(|row| row.into_iter().map(|j| j as u32).collect())
            .collect();
        FiniteMetricSpace {
            metric: Metric::graph(adj),
            names: Some(Names::new(labels).expect("generated labels are distinct")),
        }
    }

    /// Explicit distance matrix; checked for symmetry, identity of
    /// indiscernibles and the triangle inequality (cubic in `points.len()`).
    pub fn from_matrix<S: AsRef<str>>(
        points: &[S],
        matrix: Vec<Vec<u64>>,
    ) -> Result<Self, SpaceError> {
        let names = Names::new(points.iter().map(|p| p.as_ref().to_string()).collect())?;
        let n = points.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(SpaceError::MatrixShape { n });
        }
        for x in 0..n {
            for y in 0..n {
                let d = matrix[x][y];
                if d != matrix[y][x] {
                    return Err(SpaceError::NotAMetric(format!(
                        "d({},{}) != d({},{})",
                        names.labels[x], names.labels[y], names.labels[y], names.labels[x]
                    )));
                }
                if (d == 0) != (x == y) {
                    return Err(SpaceError::NotAMetric(format!(
                        "d({},{}) = {d}",
                        names.labels[x], names.labels[y]
                    )));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if matrix[x][z] > matrix[x][y] + matrix[y][z] {
                        return Err(SpaceError::NotAMetric(format!(
                            "triangle inequality fails for ({},{},{})",
                            names.labels[x], names.labels[y], names.labels[z]
                        )));
                    }
                }
            }
        }
        let flat = matrix.into_iter().flatten().collect();
        Ok(FiniteMetricSpace {
            metric: Metric::Dense { n, dist: flat },
            names: Some(names),
        })
    }

    /// A finite subset of ℤ with the metric |a − b|.
    pub fn integers(values: Vec<i64>) -> Result<Self, SpaceError> {
        if let Some(pos) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SpaceError::NotIncreasing(pos + 1));
        }
        Ok(FiniteMetricSpace {
            metric: Metric::Integers { values },
            names: None,
        })
    }

    /// The integer interval `lo..=hi` as a subspace of ℤ.
    pub fn integer_interval(lo: i64, hi: i64) -> Self {
        Self::integers((lo..=hi).collect()).expect("interval is increasing")
    }

    /// The cycle graph ℤ/m with the quotient metric.
    pub fn cycle(m: usize) -> Result<Self, SpaceError> {
        if m == 0 {
            return Err(SpaceError::EmptyCycle);
        }
        Ok(FiniteMetricSpace {
            metric: Metric::Cycle { m },
            names: None,
        })
    }

    /// X×{0..layers−1} with d((x,n),(y,m)) = n+m+d_X(x,y) for x ≠ y and
    /// |n−m| on a column.
    pub fn stacked(base: FiniteMetricSpace, layers: usize) -> Result<Self, SpaceError> {
        if layers < 2 {
            return Err(SpaceError::TooFewLayers(layers));
        }
        Ok(FiniteMetricSpace {
            metric: Metric::Stacked {
                base: Box::new(base),
                layers,
            },
            names: None,
        })
    }

    /// Coarse disjoint union: block distances inside a block, and
    /// D_i + D_j across blocks i ≠ j where D_i = Σ_{l≤i}(diam(block_l)+1).
    pub fn coarse_disjoint_union(blocks: Vec<FiniteMetricSpace>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut reach = Vec::with_capacity(blocks.len());
        let mut total = 0usize;
        let mut acc = 0u64;
        for block in &blocks {
            offsets.push(total);
            total += block.len();
            acc += block.full_diameter() + 1;
            reach.push(acc);
        }
        offsets.push(total);
        FiniteMetricSpace {
            metric: Metric::Union {
                blocks,
                offsets,
                reach,
            },
            names: None,
        }
    }

    pub fn len(&self) -> usize {
        self.metric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> std::ops::Range<Point> {
        0..self.len()
    }

    /// Printable identifier of a point.
    pub fn label(&self, p: Point) -> String {
        match &self.names {
            Some(names) => names.labels[p].clone(),
            None => self.metric.generated_label(p),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<Point> {
        match &self.names {
            Some(names) => names.index.get(label).copied(),
            None => self.metric.parse_label(label),
        }
    }

    pub fn lookup(&self, label: &str) -> Result<Point, SpaceError> {
        self.index_of(label)
            .ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    /// Backend-specific view of an integer subset, when this is one.
    pub fn integer_values(&self) -> Option<&[i64]> {
        match &self.metric {
            Metric::Integers { values } => Some(values),
            _ => None,
        }
    }

    /// Base space and layer count of a stacked product.
    pub fn stacked_parts(&self) -> Option<(&FiniteMetricSpace, usize)> {
        match &self.metric {
            Metric::Stacked { base, layers } => Some((base, *layers)),
            _ => None,
        }
    }

    /// Point ranges of the blocks of a coarse disjoint union.
    pub fn union_blocks(&self) -> Option<Vec<std::ops::Range<Point>>> {
        match &self.metric {
            Metric::Union { offsets, .. } => {
                Some(offsets.windows(2).map(|w| w[0]..w[1]).collect())
            }
            _ => None,
        }
    }

    /// Distance assigned to pairs in different components of a graph metric.
    pub fn disconnected_sentinel(&self) -> Option<u64> {
        match &self.metric {
            Metric::Graph { .. } => Some(self.len() as u64 + 1),
            _ => None,
        }
    }

    fn check(&self, p: Point) -> Result<(), SpaceError> {
        if p < self.len() {
            Ok(())
        } else {
            Err(SpaceError::UnknownPoint(p))
        }
    }

    fn check_all(&self, set: &[Point]) -> Result<(), SpaceError> {
        set.iter().try_for_each(|&p| self.check(p))
    }

    /// Distance between two points. Panics on out-of-range indices.
    pub fn dist(&self, p: Point, q: Point) -> u64 {
        self.metric.dist(p, q)
    }

    /// B_R(center) = {y : d(center, y) ≤ R}, sorted.
    pub fn ball(&self, center: Point, radius: u64) -> Result<Vec<Point>, SpaceError> {
        self.check(center)?;
        let mut out = self.metric.ball(center, radius);
        out.sort_unstable();
        Ok(out)
    }

    /// B_R(F) = ⋃_{x∈F} B_R(x), sorted and deduplicated.
    pub fn neighborhood(&self, set: &[Point], radius: u64) -> Result<Vec<Point>, SpaceError> {
        self.check_all(set)?;
        Ok(self.neighborhood_unchecked(set, radius))
    }

    pub(crate) fn neighborhood_unchecked(&self, set: &[Point], radius: u64) -> Vec<Point> {
        let mut out = self.metric.neighborhood(set, radius);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// ∂_R^+(F) = {x ∉ F : d(x, F) ≤ R}, sorted.
    pub fn outer_boundary(&self, set: &[Point], radius: u64) -> Result<Vec<Point>, SpaceError> {
        self.check_all(set)?;
        Ok(self.outer_boundary_unchecked(set, radius))
    }

    pub(crate) fn outer_boundary_unchecked(&self, set: &[Point], radius: u64) -> Vec<Point> {
        if radius == 0 || set.is_empty() {
            return Vec::new();
        }
        let mut inside = set.to_vec();
        inside.sort_unstable();
        self.neighborhood_unchecked(set, radius)
            .into_iter()
            .filter(|p| inside.binary_search(p).is_err())
            .collect()
    }

    /// |∂_R^+(F)| / |F|.
    pub fn folner_ratio(&self, set: &[Point], radius: u64) -> Result<Rational, SpaceError> {
        if set.is_empty() {
            return Err(SpaceError::EmptySet);
        }
        let boundary = self.outer_boundary(set, radius)?;
        Ok(Rational::ratio_of(boundary.len(), distinct_len(set)))
    }

    /// Largest pairwise distance inside F.
    pub fn diameter(&self, set: &[Point]) -> Result<u64, SpaceError> {
        if set.is_empty() {
            return Err(SpaceError::EmptySet);
        }
        self.check_all(set)?;
        Ok(self.metric.diameter(set))
    }

    /// Diameter of the whole space (0 when empty).
    pub fn full_diameter(&self) -> u64 {
        self.metric.full_diameter()
    }

    /// sup_x |B_R(x)|.
    pub fn geometry_profile(&self, radius: u64) -> usize {
        self.points()
            .map(|p| self.metric.ball(p, radius).len())
            .max()
            .unwrap_or(0)
    }

    /// Connected components of the graph Δ_P = {(x,y) : d(x,y) ≤ P}, each
    /// sorted, ordered by smallest member.
    pub fn proximity_components(&self, propagation: u64) -> Vec<Vec<Point>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(p) = queue.pop_front() {
                for q in self.metric.ball(p, propagation) {
                    if comp[q] == usize::MAX {
                        comp[q] = id;
                        members.push(q);
                        queue.push_back(q);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

fn distinct_len(set: &[Point]) -> usize {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

#[cfg(test)]
mod tests;
