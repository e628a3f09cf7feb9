use std::collections::{HashMap, VecDeque};

use super::{FiniteMetricSpace, Point, DENSE_GRAPH_LIMIT};

#[derive(Clone, Debug)]
pub(crate) enum Metric {
    Dense {
        n: usize,
        dist: Vec<u64>,
    },
    Graph {
        adj: Vec<Vec<u32>>,
        /// All-pairs distances, present when the graph is small enough.
        cache: Option<Vec<u32>>,
    },
    Integers {
        values: Vec<i64>,
    },
    Cycle {
        m: usize,
    },
    Stacked {
        base: Box<FiniteMetricSpace>,
        layers: usize,
    },
    Union {
        blocks: Vec<FiniteMetricSpace>,
        /// `offsets[i]..offsets[i+1]` are the points of block i.
        offsets: Vec<usize>,
        /// D_i, the separation weight of block i.
        reach: Vec<u64>,
    },
}

impl Metric {
    pub(crate) fn graph(adj: Vec<Vec<u32>>) -> Metric {
        let n = adj.len();
        let cache = (n <= DENSE_GRAPH_LIMIT).then(|| {
            let sentinel = (n + 1) as u32;
            let mut all = vec![sentinel; n * n];
            let mut queue = VecDeque::new();
            for s in 0..n {
                let row = &mut all[s * n..(s + 1) * n];
                row[s] = 0;
                queue.clear();
                queue.push_back(s);
                while let Some(p) = queue.pop_front() {
                    let d = row[p];
                    for &q in &adj[p] {
                        let q = q as usize;
                        if row[q] == sentinel {
                            row[q] = d + 1;
                            queue.push_back(q);
                        }
                    }
                }
            }
            all
        });
        Metric::Graph { adj, cache }
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Metric::Dense { n, .. } => *n,
            Metric::Graph { adj, .. } => adj.len(),
            Metric::Integers { values } => values.len(),
            Metric::Cycle { m } => *m,
            Metric::Stacked { base, layers } => base.len() * layers,
            Metric::Union { offsets, .. } => *offsets.last().unwrap_or(&0),
        }
    }

    pub(crate) fn generated_label(&self, p: Point) -> String {
        match self {
            Metric::Integers { values } => values[p].to_string(),
            Metric::Cycle { .. } => p.to_string(),
            Metric::Stacked { base, layers } => {
                format!("{}@{}", base.label(p / layers), p % layers)
            }
            Metric::Union {
                blocks, offsets, ..
            } => {
                let b = block_of(offsets, p);
                format!("{}:{}", b, blocks[b].label(p - offsets[b]))
            }
            Metric::Dense { .. } | Metric::Graph { .. } => p.to_string(),
        }
    }

    pub(crate) fn parse_label(&self, label: &str) -> Option<Point> {
        match self {
            Metric::Integers { values } => {
                let v: i64 = label.trim().parse().ok()?;
                values.binary_search(&v).ok()
            }
            Metric::Cycle { m } => label.trim().parse().ok().filter(|p| p < m),
            Metric::Stacked { base, layers } => {
                let (x, n) = label.rsplit_once('@')?;
                let n: usize = n.parse().ok()?;
                let x = base.index_of(x)?;
                (n < *layers).then_some(x * layers + n)
            }
            Metric::Union {
                blocks, offsets, ..
            } => {
                let (b, rest) = label.split_once(':')?;
                let b: usize = b.parse().ok()?;
                let inner = blocks.get(b)?.index_of(rest)?;
                Some(offsets[b] + inner)
            }
            Metric::Dense { .. } | Metric::Graph { .. } => None,
        }
    }

    pub(crate) fn dist(&self, p: Point, q: Point) -> u64 {
        match self {
            Metric::Dense { n, dist } => dist[p * n + q],
            Metric::Graph { adj, cache } => match cache {
                Some(c) => c[p * adj.len() + q] as u64,
                None => graph_distance(adj, p, q),
            },
            Metric::Integers { values } => values[p].abs_diff(values[q]),
            Metric::Cycle { m } => {
                let d = p.abs_diff(q);
                d.min(m - d) as u64
            }
            Metric::Stacked { base, layers } => {
                let (x, n) = (p / layers, (p % layers) as u64);
                let (y, k) = (q / layers, (q % layers) as u64);
                if x == y {
                    n.abs_diff(k)
                } else {
                    n + k + base.dist(x, y)
                }
            }
            Metric::Union {
                blocks,
                offsets,
                reach,
            } => {
                let (bp, bq) = (block_of(offsets, p), block_of(offsets, q));
                if bp == bq {
                    blocks[bp].dist(p - offsets[bp], q - offsets[bp])
                } else {
                    reach[bp] + reach[bq]
                }
            }
        }
    }

    /// Unsorted ball around `center`.
    pub(crate) fn ball(&self, center: Point, r: u64) -> Vec<Point> {
        match self {
            Metric::Dense { n, dist } => (0..*n).filter(|&q| dist[center * n + q] <= r).collect(),
            Metric::Graph { adj, cache } => match cache {
                Some(c) => {
                    let n = adj.len();
                    let row = &c[center * n..(center + 1) * n];
                    (0..n).filter(|&q| row[q] as u64 <= r).collect()
                }
                None => graph_ball(adj, &[center], r),
            },
            Metric::Integers { values } => {
                let v = values[center];
                let lo = values.partition_point(|&x| x < v.saturating_sub_unsigned(r));
                let hi = values.partition_point(|&x| x <= v.saturating_add_unsigned(r));
                (lo..hi).collect()
            }
            Metric::Cycle { m } => {
                let m = *m;
                if r as usize >= m / 2 {
                    return (0..m).collect();
                }
                let r = r as usize;
                (0..=2 * r).map(|k| (center + m - r + k) % m).collect()
            }
            Metric::Stacked { base, layers } => {
                let layers = *layers;
                let (x, n) = (center / layers, center % layers);
                let lo = n.saturating_sub(r as usize);
                let hi = (n + r as usize).min(layers - 1);
                let mut out: Vec<Point> = (lo..=hi).map(|k| x * layers + k).collect();
                let n = n as u64;
                if r > n {
                    let budget = r - n;
                    for y in base.metric.ball(x, budget) {
                        if y == x {
                            continue;
                        }
                        let top = budget - base.dist(x, y);
                        let top = (top as usize).min(layers - 1);
                        out.extend((0..=top).map(|k| y * layers + k));
                    }
                }
                out
            }
            Metric::Union {
                blocks,
                offsets,
                reach,
            } => {
                let b = block_of(offsets, center);
                let mut out: Vec<Point> = blocks[b]
                    .metric
                    .ball(center - offsets[b], r)
                    .into_iter()
                    .map(|q| q + offsets[b])
                    .collect();
                for (j, &dj) in reach.iter().enumerate() {
                    if j != b && reach[b] + dj <= r {
                        out.extend(offsets[j]..offsets[j + 1]);
                    }
                }
                out
            }
        }
    }

    /// Unsorted, possibly duplicated, union of balls around `set`.
    pub(crate) fn neighborhood(&self, set: &[Point], r: u64) -> Vec<Point> {
        match self {
            Metric::Graph { adj, cache: None } => graph_ball(adj, set, r),
            _ => {
                let mut out = Vec::new();
                for &p in set {
                    out.extend(self.ball(p, r));
                }
                out
            }
        }
    }

    pub(crate) fn diameter(&self, set: &[Point]) -> u64 {
        match self {
            Metric::Integers { values } => {
                let lo = set.iter().map(|&p| values[p]).min().unwrap_or(0);
                let hi = set.iter().map(|&p| values[p]).max().unwrap_or(0);
                hi.abs_diff(lo)
            }
            Metric::Graph { adj, cache: None } => {
                let mut best = 0;
                for &p in set {
                    let dist = graph_distances(adj, p);
                    for &q in set {
                        best = best.max(dist[q]);
                    }
                }
                best
            }
            _ => {
                let mut best = 0;
                for (i, &p) in set.iter().enumerate() {
                    for &q in &set[i + 1..] {
                        best = best.max(self.dist(p, q));
                    }
                }
                best
            }
        }
    }

    pub(crate) fn full_diameter(&self) -> u64 {
        match self {
            Metric::Integers { values } => match (values.first(), values.last()) {
                (Some(a), Some(b)) => b.abs_diff(*a),
                _ => 0,
            },
            Metric::Cycle { m } => (m / 2) as u64,
            _ => {
                let all: Vec<Point> = (0..self.len()).collect();
                self.diameter(&all)
            }
        }
    }
}

fn block_of(offsets: &[usize], p: Point) -> usize {
    offsets.partition_point(|&o| o <= p) - 1
}

fn graph_distances(adj: &[Vec<u32>], source: Point) -> Vec<u64> {
    let n = adj.len();
    let sentinel = n as u64 + 1;
    let mut dist = vec![sentinel; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            let q = q as usize;
            if dist[q] == sentinel {
                dist[q] = dist[p] + 1;
                queue.push_back(q);
            }
        }
    }
    dist
}

fn graph_distance(adj: &[Vec<u32>], p: Point, q: Point) -> u64 {
    if p == q {
        return 0;
    }
    let n = adj.len();
    let mut seen: HashMap<Point, u64> = HashMap::from([(p, 0)]);
    let mut queue = VecDeque::from([p]);
    while let Some(x) = queue.pop_front() {
        let d = seen[&x];
        for &y in &adj[x] {
            let y = y as usize;
            if y == q {
                return d + 1;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                e.insert(d + 1);
                queue.push_back(y);
            }
        }
    }
    n as u64 + 1
}

/// Multi-source breadth-first ball; radii at or beyond the sentinel return
/// every point.
fn graph_ball(adj: &[Vec<u32>], sources: &[Point], r: u64) -> Vec<Point> {
    let n = adj.len();
    if r > n as u64 && !sources.is_empty() {
        return (0..n).collect();
    }
    let mut seen: HashMap<Point, u64> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if seen.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let d = seen[&x];
        if d == r {
            continue;
        }
        for &y in &adj[x] {
            let y = y as usize;
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                e.insert(d + 1);
                queue.push_back(y);
            }
        }
    }
    seen.into_keys().collect()
}
