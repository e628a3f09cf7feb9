//! Finite windows cut from infinite spaces: a core where computations are
//! trusted and a halo that absorbs truncation artifacts.

use super::{FiniteMetricSpace, Point, SpaceError};

#[derive(Clone, Debug)]
pub struct WindowedSpace {
    space: FiniteMetricSpace,
    in_core: Vec<bool>,
    core: Vec<Point>,
    halo: Vec<Point>,
    halo_depth: u64,
}

impl WindowedSpace {
    pub fn new(
        space: FiniteMetricSpace,
        core: &[Point],
        halo_depth: u64,
    ) -> Result<Self, SpaceError> {
        let mut in_core = vec![false; space.len()];
        for &p in core {
            if p >= space.len() {
                return Err(SpaceError::UnknownPoint(p));
            }
            if in_core[p] {
                return Err(SpaceError::DuplicateCorePoint(space.label(p)));
            }
            in_core[p] = true;
        }
        let core = (0..space.len()).filter(|&p| in_core[p]).collect();
        let halo = (0..space.len()).filter(|&p| !in_core[p]).collect();
        Ok(WindowedSpace {
            space,
            in_core,
            core,
            halo,
            halo_depth,
        })
    }

    /// Window whose core is the whole space.
    pub fn whole(space: FiniteMetricSpace) -> Self {
        let all: Vec<Point> = space.points().collect();
        Self::new(space, &all, 0).expect("all points are valid")
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn core(&self) -> &[Point] {
        &self.core
    }

    pub fn halo(&self) -> &[Point] {
        &self.halo
    }

    pub fn halo_depth(&self) -> u64 {
        self.halo_depth
    }

    pub fn is_core(&self, p: Point) -> bool {
        self.in_core.get(p).copied().unwrap_or(false)
    }

    pub fn is_halo(&self, p: Point) -> bool {
        p < self.in_core.len() && !self.in_core[p]
    }

    /// True when B_R(F) meets the halo, i.e. boundary data for F at radius
    /// R may be an artifact of the truncation.
    pub fn is_contaminated(&self, set: &[Point], radius: u64) -> bool {
        if self.halo.is_empty() {
            return false;
        }
        self.space
            .neighborhood_unchecked(set, radius)
            .into_iter()
            .any(|p| !self.in_core[p])
    }

    /// Reports whether every halo point lies within `halo_depth` of the core.
    pub fn halo_within_depth(&self) -> bool {
        if self.core.is_empty() {
            return self.halo.is_empty();
        }
        let near = self
            .space
            .neighborhood_unchecked(&self.core, self.halo_depth);
        let mut near_mask = vec![false; self.space.len()];
        for p in near {
            near_mask[p] = true;
        }
        self.halo.iter().all(|&p| near_mask[p])
    }
}

/// ℤ-window: core `lo..=hi` with `halo_depth` extra integers on each side.
pub fn interval_window(lo: i64, hi: i64, halo_depth: u64) -> WindowedSpace {
    let h = halo_depth as i64;
    let space = FiniteMetricSpace::integer_interval(lo - h, hi + h);
    let core: Vec<Point> = (h as usize..(h + hi - lo + 1) as usize).collect();
    WindowedSpace::new(space, &core, halo_depth).expect("core lies inside the window")
}

/// Ball of radius `core_radius + halo_depth` around the root of the
/// `degree`-regular tree; the core is the ball of radius `core_radius`.
///
/// Vertices are numbered in breadth-first order, so the root is point 0 and
/// the ball of radius r is the prefix of length 1 + d((d−1)^r − 1)/(d−2).
pub fn regular_tree_window(degree: usize, core_radius: u64, halo_depth: u64) -> WindowedSpace {
    let depth = core_radius + halo_depth;
    let mut adj: Vec<Vec<Point>> = vec![Vec::new()];
    let mut level = vec![0usize];
    let mut core_len = 1;
    for d in 1..=depth {
        let mut next = Vec::new();
        for &v in &level {
            let children = if v == 0 { degree } else { degree - 1 };
            for _ in 0..children {
                let c = adj.len();
                adj.push(vec![v]);
                adj[v].push(c);
                next.push(c);
            }
        }
        level = next;
        if d == core_radius {
            core_len = adj.len();
        }
    }
    let space = FiniteMetricSpace::from_adjacency(adj);
    let core: Vec<Point> = (0..core_len).collect();
    WindowedSpace::new(space, &core, halo_depth).expect("core prefix is valid")
}

/// X×{0..K−1} with the top ⌊K/4⌋ layers as halo.
pub fn stacked_product_window(
    base: FiniteMetricSpace,
    layers: usize,
) -> Result<WindowedSpace, SpaceError> {
    stacked_product_window_with_halo(base, layers, layers / 4)
}

/// X×{0..K−1} with the top `halo` layers as halo.
pub fn stacked_product_window_with_halo(
    base: FiniteMetricSpace,
    layers: usize,
    halo: usize,
) -> Result<WindowedSpace, SpaceError> {
    if layers < 2 {
        return Err(SpaceError::TooFewLayers(layers));
    }
    if halo >= layers {
        return Err(SpaceError::HaloTooDeep { halo, layers });
    }
    let columns = base.len();
    let space = FiniteMetricSpace::stacked(base, layers)?;
    let core: Vec<Point> = (0..columns)
        .flat_map(|x| (0..layers - halo).map(move |n| x * layers + n))
        .collect();
    WindowedSpace::new(space, &core, halo as u64)
}
