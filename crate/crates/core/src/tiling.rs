//! Tilings of arbitrary invariance: explicit constructions for ℤ-windows,
//! sparse subsets of ℤ, stacked products X×ℕ and box spaces of ℤ, plus a
//! verifier for arbitrary partitions.
//!
//! Block lengths are always the least integer strictly above the relevant
//! bound, `floor(bound) + 1`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::space::{FiniteMetricSpace, Point, SpaceError, WindowedSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("epsilon must be strictly positive")]
    NonPositiveEpsilon,
    #[error("the window core is not a contiguous integer interval")]
    NotAnInterval,
    #[error("the integer subset is empty")]
    EmptySubset,
    #[error("the window is not a stacked product X×{{0..K−1}} with a bottom-layer core")]
    NotStacked,
    #[error("core height {height} is not a multiple of the block length {block}; use {required}")]
    HeightNotMultiple {
        height: usize,
        block: usize,
        required: usize,
    },
    #[error("block length {block} exceeds core height {height}")]
    BlockTooTall { height: usize, block: usize },
    #[error("moduli must be strictly increasing and each must divide the next (fails at position {0})")]
    NotDivisibilityChain(usize),
    #[error("no modulus m among the supplied ones satisfies 2R/m < ε")]
    NoAdmissibleMonotile,
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Tiles that do not form an exact partition of the core.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[error("tiles do not partition the core (overlapping: {overlapping:?}, uncovered: {uncovered:?}, outside core: {outside_core:?}, empty tiles: {empty_tiles:?})")]
pub struct PartitionError {
    pub overlapping: Vec<String>,
    pub uncovered: Vec<String>,
    pub outside_core: Vec<String>,
    pub empty_tiles: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileMeta {
    pub ratio: Rational,
    #[serde(rename = "diam")]
    pub diameter: u64,
    pub contaminated: bool,
}

/// Which construction produced a tiling, with its derived parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Construction {
    Interval {
        block: usize,
        window_too_small: bool,
    },
    Sparse {
        block: usize,
        runs: usize,
    },
    Stack {
        /// S = max_x |B_R((x,0))|.
        ball_bound: usize,
        block: usize,
    },
    Box {
        monotile: usize,
        /// Index of the first quotient tiled by arcs; earlier ones form X_0.
        first_tiled: usize,
        absorbed: Vec<usize>,
    },
    Manual,
}

#[derive(Clone, Debug)]
pub struct Tiling {
    window: Arc<WindowedSpace>,
    pub radius: u64,
    pub epsilon: Rational,
    pub tiles: Vec<Vec<Point>>,
    pub meta: Vec<TileMeta>,
    pub diameter_bound: u64,
    pub construction: Construction,
}

impl Tiling {
    /// Assembles a tiling from explicit tiles, computing per-tile metadata.
    ///
    /// `declared_contaminated` marks tiles known to be truncation-affected
    /// even though their R-neighbourhood avoids the halo.
    pub fn from_parts(
        window: Arc<WindowedSpace>,
        radius: u64,
        epsilon: Rational,
        mut tiles: Vec<Vec<Point>>,
        diameter_bound: u64,
        declared_contaminated: &[usize],
        construction: Construction,
    ) -> Result<Self, TilingError> {
        if !epsilon.is_positive() {
            return Err(TilingError::NonPositiveEpsilon);
        }
        for tile in &mut tiles {
            tile.sort_unstable();
        }
        let space = window.space();
        for &p in tiles.iter().flatten() {
            if p >= space.len() {
                return Err(SpaceError::UnknownPoint(p).into());
            }
        }
        let meta = tiles
            .par_iter()
            .enumerate()
            .map(|(i, tile)| describe_tile(&window, tile, radius, declared_contaminated.contains(&i)))
            .collect();
        Ok(Tiling {
            window,
            radius,
            epsilon,
            tiles,
            meta,
            diameter_bound,
            construction,
        })
    }

    pub fn window(&self) -> &Arc<WindowedSpace> {
        &self.window
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        self.window.space()
    }

    /// Largest Følner ratio among tiles that are not contaminated.
    pub fn max_clean_ratio(&self) -> Option<Rational> {
        self.meta
            .iter()
            .filter(|m| !m.contaminated)
            .map(|m| m.ratio)
            .max()
    }
}

fn describe_tile(window: &WindowedSpace, tile: &[Point], radius: u64, declared: bool) -> TileMeta {
    let space = window.space();
    if tile.is_empty() {
        return TileMeta {
            ratio: Rational::zero(),
            diameter: 0,
            contaminated: declared,
        };
    }
    let boundary = space.outer_boundary_unchecked(tile, radius);
    TileMeta {
        ratio: Rational::ratio_of(boundary.len(), tile.len()),
        diameter: space.diameter(tile).unwrap_or(0),
        contaminated: declared || window.is_contaminated(tile, radius),
    }
}

/// N = floor(bound / ε) + 1.
fn block_length(bound: u64, epsilon: Rational) -> Result<usize, TilingError> {
    if !epsilon.is_positive() {
        return Err(TilingError::NonPositiveEpsilon);
    }
    let q = Rational::from(Rational::from_integer(bound as i64).0 / epsilon.0);
    Ok(q.least_integer_above() as usize)
}

/// Consecutive blocks of length `block`; a short remainder merges into the
/// preceding block so the last block has length in [block, 2·block).
fn chop<T: Clone>(items: &[T], block: usize) -> Vec<Vec<T>> {
    if items.len() < block {
        return vec![items.to_vec()];
    }
    let mut out: Vec<Vec<T>> = items.chunks(block).map(|c| c.to_vec()).collect();
    if out.len() > 1 && out.last().is_some_and(|c| c.len() < block) {
        let tail = out.pop().expect("nonempty");
        out.last_mut().expect("nonempty").extend(tail);
    }
    out
}

/// Tiles the core of a ℤ-window by consecutive intervals of length
/// N = floor(2R/ε) + 1.
pub fn tile_interval(
    window: Arc<WindowedSpace>,
    radius: u64,
    epsilon: Rational,
) -> Result<Tiling, TilingError> {
    let values = window
        .space()
        .integer_values()
        .ok_or(TilingError::NotAnInterval)?;
    let core = window.core();
    if core.is_empty() || core.windows(2).any(|w| values[w[1]] != values[w[0]] + 1) {
        return Err(TilingError::NotAnInterval);
    }
    let block = block_length(2 * radius, epsilon)?;
    let window_too_small = core.len() < block;
    let tiles = chop(core, block);
    let diameter_bound = if window_too_small {
        core.len() as u64 - 1
    } else {
        2 * block as u64 - 2
    };
    Tiling::from_parts(
        window.clone(),
        radius,
        epsilon,
        tiles,
        diameter_bound,
        &[],
        Construction::Interval {
            block,
            window_too_small,
        },
    )
}

/// Tiles a subset A ⊆ ℤ (taken as the whole space) into (R,ε)-Følner sets
/// of diameter at most 2RN.
///
/// A is cut into maximal runs at gaps larger than R; runs shorter than
/// N = floor(2R/ε) + 1 stay whole, longer runs are chopped into blocks of
/// N consecutive elements. With `prefix_of_infinite`, tiles of the final run
/// are flagged contaminated.
pub fn tile_sparse_subset(
    values: Vec<i64>,
    radius: u64,
    epsilon: Rational,
    prefix_of_infinite: bool,
) -> Result<Tiling, TilingError> {
    if values.is_empty() {
        return Err(TilingError::EmptySubset);
    }
    let space = FiniteMetricSpace::integers(values)?;
    let values = space.integer_values().expect("integer backend").to_vec();
    let block = block_length(2 * radius, epsilon)?;

    let mut runs: Vec<Vec<Point>> = vec![vec![0]];
    for p in 1..values.len() {
        if values[p].abs_diff(values[p - 1]) > radius {
            runs.push(Vec::new());
        }
        runs.last_mut().expect("nonempty").push(p);
    }
    let run_count = runs.len();
    let mut tiles = Vec::new();
    let mut last_run_tiles = 0..0;
    for (i, run) in runs.iter().enumerate() {
        let start = tiles.len();
        tiles.extend(chop(run, block));
        if i + 1 == run_count {
            last_run_tiles = start..tiles.len();
        }
    }
    let declared: Vec<usize> = if prefix_of_infinite {
        last_run_tiles.collect()
    } else {
        Vec::new()
    };
    Tiling::from_parts(
        Arc::new(WindowedSpace::whole(space)),
        radius,
        epsilon,
        tiles,
        2 * radius * block as u64,
        &declared,
        Construction::Sparse {
            block,
            runs: run_count,
        },
    )
}

/// Tiles the core of a stacked product window by column segments
/// {x}×{kN..(k+1)N−1} with N = floor((max{S,R}+R)/ε) + 1, where
/// S = max_x |B_R((x,0))|.
pub fn tile_stacked_product(
    window: Arc<WindowedSpace>,
    radius: u64,
    epsilon: Rational,
) -> Result<Tiling, TilingError> {
    let space = window.space();
    let (base, layers) = space.stacked_parts().ok_or(TilingError::NotStacked)?;
    let columns = base.len();
    let height = window.core().len() / columns.max(1);
    let expected: Vec<Point> = (0..columns)
        .flat_map(|x| (0..height).map(move |n| x * layers + n))
        .collect();
    if height == 0 || expected != window.core() {
        return Err(TilingError::NotStacked);
    }
    let ball_bound = (0..columns)
        .map(|x| space.ball(x * layers, radius).map(|b| b.len()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let block = block_length(ball_bound.max(radius as usize) as u64 + radius, epsilon)?;
    if block > height {
        return Err(TilingError::BlockTooTall { height, block });
    }
    if !height.is_multiple_of(block) {
        return Err(TilingError::HeightNotMultiple {
            height,
            block,
            required: height.div_ceil(block) * block,
        });
    }
    let tiles: Vec<Vec<Point>> = (0..columns)
        .flat_map(|x| {
            (0..height / block)
                .map(move |k| (k * block..(k + 1) * block).map(|n| x * layers + n).collect())
        })
        .collect();
    Tiling::from_parts(
        window.clone(),
        radius,
        epsilon,
        tiles,
        block as u64 - 1,
        &[],
        Construction::Stack { ball_bound, block },
    )
}

/// Whether ℤ → ℤ/m is isometric on the ball of the given radius around 0
/// (and hence, by translation invariance, around every point).
pub fn cycle_isometric_on_balls(m: usize, radius: u64) -> bool {
    let r = radius as i64;
    let m = m as i64;
    for a in -r..=r {
        for b in a..=r {
            let diff = (b - a).rem_euclid(m);
            if diff.min(m - diff) != b - a {
                return false;
            }
        }
    }
    true
}

/// Tiles the box space of ℤ along `moduli` (a divisibility chain).
///
/// The monotile is T = {0..m_{i₀}−1} for the least i₀ with 2R/m_{i₀} < ε.
/// Quotients before the first index i₁ ≥ i₀ from which on every quotient is
/// separated by more than R from the earlier ones and isometric on balls of
/// radius R + L (L = m_{i₀} − 1) are merged into one tile X_0; every later
/// cycle is cut into arcs of length m_{i₀}.
pub fn tile_box_space(
    moduli: &[usize],
    radius: u64,
    epsilon: Rational,
) -> Result<Tiling, TilingError> {
    if !epsilon.is_positive() {
        return Err(TilingError::NonPositiveEpsilon);
    }
    if moduli.is_empty() || moduli[0] == 0 {
        return Err(TilingError::NotDivisibilityChain(0));
    }
    for (i, w) in moduli.windows(2).enumerate() {
        if w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(TilingError::NotDivisibilityChain(i + 1));
        }
    }
    let first = moduli
        .iter()
        .position(|&m| Rational::ratio_of(2 * radius as usize, m) < epsilon)
        .ok_or(TilingError::NoAdmissibleMonotile)?;
    let monotile = moduli[first];
    let reach = radius + monotile as u64 - 1;

    let blocks = moduli
        .iter()
        .map(|&m| FiniteMetricSpace::cycle(m))
        .collect::<Result<Vec<_>, _>>()?;
    let space = FiniteMetricSpace::coarse_disjoint_union(blocks);
    let ranges = space.union_blocks().expect("union backend");

    let isometric: Vec<bool> = moduli
        .iter()
        .map(|&m| cycle_isometric_on_balls(m, reach))
        .collect();
    let separated = |i: usize| {
        (0..i).all(|j| {
            (i..moduli.len()).all(|k| space.dist(ranges[j].start, ranges[k].start) > radius)
        })
    };
    let first_tiled = (first..=moduli.len())
        .find(|&i| isometric[i..].iter().all(|&ok| ok) && separated(i))
        .expect("the empty tail always qualifies");

    let mut tiles = Vec::new();
    let absorbed: Vec<usize> = (0..first_tiled).collect();
    if first_tiled > 0 {
        tiles.push((0..ranges[first_tiled - 1].end).collect::<Vec<Point>>());
    }
    for range in &ranges[first_tiled..] {
        for start in range.clone().step_by(monotile) {
            tiles.push((start..start + monotile).collect());
        }
    }
    let x0_diameter = match tiles.first() {
        Some(x0) if first_tiled > 0 => space.diameter(x0)?,
        _ => 0,
    };
    Tiling::from_parts(
        Arc::new(WindowedSpace::whole(space)),
        radius,
        epsilon,
        tiles,
        x0_diameter.max(monotile as u64 - 1),
        &[],
        Construction::Box {
            monotile,
            first_tiled,
            absorbed,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileReport {
    pub index: usize,
    pub size: usize,
    pub ratio: Rational,
    pub diameter: u64,
    pub contaminated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingReport {
    pub tiles: Vec<TileReport>,
    /// Largest ratio among clean (non-contaminated) tiles.
    pub max_ratio: Option<Rational>,
    /// Largest diameter among clean tiles.
    pub max_diameter: Option<u64>,
    pub diameter_bound: u64,
    pub contaminated: usize,
    /// Clean tiles with ratio ≥ ε or diameter above the bound.
    pub failing: Vec<usize>,
    pub pass: bool,
}

/// Checks the partition, recomputes every tile's ratio, diameter and
/// contamination, and passes when every clean tile satisfies
/// |∂_R^+(T)| < ε|T| and diam(T) ≤ the declared bound.
pub fn verify_tiling(t: &Tiling) -> Result<TilingReport, PartitionError> {
    let window = t.window();
    let space = window.space();
    let mut owner = vec![usize::MAX; space.len()];
    let mut err = PartitionError::default();
    for (i, tile) in t.tiles.iter().enumerate() {
        if tile.is_empty() {
            err.empty_tiles.push(i);
        }
        for &p in tile {
            if !window.is_core(p) {
                err.outside_core.push(space.label(p));
            } else if owner[p] != usize::MAX {
                err.overlapping.push(space.label(p));
            } else {
                owner[p] = i;
            }
        }
    }
    for &p in window.core() {
        if owner[p] == usize::MAX {
            err.uncovered.push(space.label(p));
        }
    }
    if err != PartitionError::default() {
        return Err(err);
    }

    let tiles: Vec<TileReport> = t
        .tiles
        .par_iter()
        .enumerate()
        .map(|(i, tile)| {
            let declared = t.meta.get(i).is_some_and(|m| m.contaminated)
                && !window.is_contaminated(tile, t.radius);
            let meta = describe_tile(window, tile, t.radius, declared);
            TileReport {
                index: i,
                size: tile.len(),
                ratio: meta.ratio,
                diameter: meta.diameter,
                contaminated: meta.contaminated,
            }
        })
        .collect();
    let clean = || tiles.iter().filter(|r| !r.contaminated);
    let failing: Vec<usize> = clean()
        .filter(|r| r.ratio >= t.epsilon || r.diameter > t.diameter_bound)
        .map(|r| r.index)
        .collect();
    Ok(TilingReport {
        max_ratio: clean().map(|r| r.ratio).max(),
        max_diameter: clean().map(|r| r.diameter).max(),
        diameter_bound: t.diameter_bound,
        contaminated: tiles.iter().filter(|r| r.contaminated).count(),
        pass: failing.is_empty(),
        failing,
        tiles,
    })
}
