//! The acceptance suite, runnable from the library (and so from the CLI),
//! together with the independent oracles it checks against.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amenability::{doubling_check, Doubling};
use crate::castle::{castle_from_tiling, invariance_defect, Atom, Castle, Comparison, Tower};
use crate::homology::{min_norm_fill, ZeroChain};
use crate::monoid::{Bounds, Element, MonoidPresentation, Verdict};
use crate::rational::Rational;
use crate::space::{
    interval_window, regular_tree_window, stacked_product_window, FiniteMetricSpace, Point,
    WindowedSpace,
};
use crate::tiling::{
    tile_box_space, tile_interval, tile_sparse_subset, tile_stacked_product, verify_tiling,
    Construction, Tiling,
};

/// Independent reference implementations.
pub mod oracle {
    use super::*;

    /// |∂_R^+(F)| inside a set of integers, by direct enumeration.
    pub fn integer_boundary(values: &[i64], f: &[i64], r: u64) -> usize {
        values
            .iter()
            .filter(|v| !f.contains(v))
            .filter(|v| f.iter().any(|x| x.abs_diff(**v) <= r))
            .count()
    }

    /// |∂_R^+(F)| / |F| from pairwise distances only.
    pub fn folner_ratio(space: &FiniteMetricSpace, f: &[Point], r: u64) -> Rational {
        let mut inside = vec![false; space.len()];
        for &p in f {
            inside[p] = true;
        }
        let boundary = space
            .points()
            .filter(|&q| !inside[q] && f.iter().any(|&p| space.dist(p, q) <= r))
            .count();
        Rational::ratio_of(boundary, f.len())
    }

    /// Size of a maximum matching of two copies of F into the window, each
    /// copy of x allowed to land within distance R (Kuhn's algorithm).
    pub fn max_two_matching(space: &FiniteMetricSpace, f: &[Point], r: u64) -> usize {
        let lefts: Vec<Point> = f.iter().chain(f).copied().collect();
        let options: Vec<Vec<Point>> = lefts
            .iter()
            .map(|&x| space.points().filter(|&y| space.dist(x, y) <= r).collect())
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; space.len()];
        fn augment(
            l: usize,
            options: &[Vec<Point>],
            owner: &mut [Option<usize>],
            seen: &mut [bool],
        ) -> bool {
            for &y in &options[l] {
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                if owner[y].is_none_or(|o| augment(o, options, owner, seen)) {
                    owner[y] = Some(l);
                    return true;
                }
            }
            false
        }
        (0..lefts.len())
            .filter(|&l| augment(l, &options, &mut owner, &mut vec![false; space.len()]))
            .count()
    }

    /// Minimum sup norm of a propagation-1 fill on a forest window, by
    /// interval dynamic programming per bound; `None` when no bound works.
    ///
    /// Panics unless the distance-1 graph of the window is a forest.
    pub fn tree_fill_norm(window: &WindowedSpace, c: &ZeroChain) -> Option<u64> {
        let space = window.space();
        let n = space.len();
        let adj: Vec<Vec<Point>> = space
            .points()
            .map(|p| {
                space
                    .ball(p, 1)
                    .expect("valid point")
                    .into_iter()
                    .filter(|&q| q != p)
                    .collect()
            })
            .collect();
        let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let mut parent = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut components = 0;
        for root in 0..n {
            if parent[root] != usize::MAX {
                continue;
            }
            components += 1;
            parent[root] = root;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                order.push(v);
                for &w in &adj[v] {
                    if parent[w] == usize::MAX {
                        parent[w] = v;
                        stack.push(w);
                    }
                }
            }
        }
        assert_eq!(edges + components, n, "the window is not a forest");
        let total: u64 = c.coeffs.values().map(|v| v.unsigned_abs()).sum();
        (0..=total).find(|&b| tree_feasible(window, c, &parent, &order, b as i64))
    }

    fn tree_feasible(window: &WindowedSpace, c: &ZeroChain, parent: &[usize], order: &[Point], b: i64) -> bool {
        const FREE: (i64, i64) = (i64::MIN / 4, i64::MAX / 4);
        let n = parent.len();
        // children sums of clipped intervals
        let mut acc = vec![(0i64, 0i64); n];
        for &v in order.iter().rev() {
            let interval = if window.is_halo(v) {
                FREE
            } else {
                let (lo, hi) = acc[v];
                (lo - c.get(v), hi - c.get(v))
            };
            if parent[v] == v {
                if !window.is_halo(v) && !(interval.0 <= 0 && 0 <= interval.1) {
                    return false;
                }
                continue;
            }
            let (lo, hi) = (interval.0.max(-b), interval.1.min(b));
            if lo > hi {
                return false;
            }
            let p = parent[v];
            acc[p].0 += lo;
            acc[p].1 += hi;
        }
        true
    }

    fn image(gens: &[u64], v: &[u32]) -> u64 {
        gens.iter().zip(v).map(|(g, x)| g * *x as u64).sum()
    }

    fn representable(gens: &[u64], s: u64) -> bool {
        let mut ok = vec![false; s as usize + 1];
        ok[0] = true;
        for t in 1..=s as usize {
            ok[t] = gens.iter().any(|&g| g as usize <= t && ok[t - g as usize]);
        }
        ok[s as usize]
    }

    /// u = v in the numerical monoid generated by `gens`.
    pub fn numerical_equal(gens: &[u64], u: &[u32], v: &[u32]) -> bool {
        image(gens, u) == image(gens, v)
    }

    /// u ≤ v in the numerical monoid generated by `gens`.
    pub fn numerical_leq(gens: &[u64], u: &[u32], v: &[u32]) -> bool {
        let (a, b) = (image(gens, u), image(gens, v));
        b >= a && representable(gens, b - a)
    }

    /// A ≼ B decided column by column from atom counts.
    pub fn columns_dominate(castle: &Castle, a: &BTreeSet<Atom>, b: &BTreeSet<Atom>) -> bool {
        castle.orbits().all(|col| {
            col.iter().filter(|x| a.contains(*x)).count() <= col.iter().filter(|x| b.contains(*x)).count()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 8 {
            self.failures.push(what());
        }
    }

    fn finish(self, id: u32, name: &str, started: Instant, limit: Option<Duration>, summary: String) -> CriterionResult {
        let elapsed = started.elapsed();
        let mut failures = self.failures;
        if let Some(limit) = limit {
            if elapsed > limit {
                failures.push(format!("took {elapsed:?}, limit {limit:?}"));
            }
        }
        CriterionResult {
            id,
            name: name.into(),
            pass: failures.is_empty(),
            detail: if failures.is_empty() { summary } else { failures.join("; ") },
            elapsed_ms: elapsed.as_millis(),
        }
    }
}

/// Integer-window tiling at (R, ε) = (5, 1/100).
pub fn integer_tiling(tilings: &mut Vec<Tiling>) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let epsilon = Rational::new(1, 100);
    let window = Arc::new(interval_window(-100_000, 100_000, 5));
    let summary = match tile_interval(window, 5, epsilon) {
        Ok(t) => {
            check.expect(
                matches!(t.construction, Construction::Interval { block: 1001, .. }),
                || format!("unexpected construction {:?}", t.construction),
            );
            let report = verify_tiling(&t);
            check.expect(report.as_ref().is_ok_and(|r| r.pass), || format!("verification failed: {report:?}"));
            let clean: Vec<Rational> = t.meta.iter().filter(|m| !m.contaminated).map(|m| m.ratio).collect();
            check.expect(!clean.is_empty(), || "no interior tiles".into());
            let odd = clean.iter().filter(|r| **r != Rational::new(10, 1001)).count();
            check.expect(odd == 0, || format!("{odd} interior tiles differ from 10/1001"));
            let summary = format!("{} tiles, {} interior at 10/1001", t.tiles.len(), clean.len());
            tilings.push(t);
            summary
        }
        Err(e) => {
            check.expect(false, || e.to_string());
            String::new()
        }
    };
    check.finish(1, "integer tiling", started, Some(Duration::from_secs(2)), summary)
}

fn random_sparse_subset(rng: &mut ChaCha8Rng) -> Vec<i64> {
    let len = rng.gen_range(500..3000);
    let mut values = vec![rng.gen_range(-1000..1000)];
    for _ in 1..len {
        let gap = if rng.gen_bool(0.7) { rng.gen_range(1..=3) } else { rng.gen_range(1..=60) };
        values.push(values.last().expect("nonempty") + gap);
    }
    values
}

/// Sparse subsets of ℤ: the squares up to 10⁶ and 20 random subsets.
pub fn sparse_tilings(seed: u64, tilings: &mut Vec<Tiling>) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets: Vec<Vec<i64>> = vec![(0..=1000).map(|n| n * n).collect()];
    sets.extend((0..20).map(|_| random_sparse_subset(&mut rng)));
    let mut count = 0;
    for values in &sets {
        for r in [1u64, 2, 5] {
            for epsilon in [Rational::new(1, 2), Rational::new(1, 10)] {
                match tile_sparse_subset(values.clone(), r, epsilon, false) {
                    Ok(t) => {
                        let Construction::Sparse { block, .. } = t.construction else { unreachable!() };
                        match verify_tiling(&t) {
                            Ok(report) => {
                                check.expect(report.pass, || format!("R={r} ε={epsilon}: tiles {:?} fail", report.failing));
                                let bound = 2 * r * block as u64;
                                check.expect(report.tiles.iter().all(|x| x.diameter <= bound), || {
                                    format!("R={r} ε={epsilon}: diameter above 2RN = {bound}")
                                });
                            }
                            Err(e) => check.expect(false, || e.to_string()),
                        }
                        tilings.push(t);
                        count += 1;
                    }
                    Err(e) => check.expect(false, || e.to_string()),
                }
            }
        }
    }
    check.finish(2, "sparse-subset tilings", started, Some(Duration::from_secs(5)), format!("{count} tilings verified"))
}

/// Stacked product over the depth-5 ball of the 3-regular tree.
pub fn stacked_tiling(tilings: &mut Vec<Tiling>) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let (radius, epsilon) = (2u64, Rational::new(1, 20));
    let base = regular_tree_window(3, 5, 0).space().clone();
    let columns = base.len();
    // 3N core layers below a K/4 halo, with N = 341 for S = 15
    let summary = match stacked_product_window(base, 1364) {
        Ok(window) => match tile_stacked_product(Arc::new(window), radius, epsilon) {
            Ok(t) => {
                let Construction::Stack { ball_bound, block } = t.construction else { unreachable!() };
                let layers = 1364;
                let s = (0..columns)
                    .map(|x| oracle_ball_size(t.space(), x * layers, radius))
                    .max()
                    .unwrap_or(0);
                check.expect(s == ball_bound, || format!("S = {ball_bound}, oracle {s}"));
                let report = verify_tiling(&t);
                check.expect(report.as_ref().is_ok_and(|r| r.pass), || "verification failed".into());
                let bottom_bound = Rational::ratio_of(s + radius as usize, block);
                let bottom: Vec<&Rational> = t
                    .tiles
                    .iter()
                    .zip(&t.meta)
                    .filter(|(tile, _)| tile[0] % layers == 0)
                    .map(|(_, m)| &m.ratio)
                    .collect();
                check.expect(bottom.len() == columns, || "missing bottom tiles".into());
                let worst = bottom.iter().copied().max().copied().unwrap_or_else(Rational::zero);
                check.expect(worst <= bottom_bound, || format!("bottom ratio {worst} > {bottom_bound}"));
                check.expect(bottom_bound < epsilon, || format!("(S+R)/N = {bottom_bound} not below ε"));
                let summary = format!("S={s}, N={block}, worst bottom ratio {worst} <= {bottom_bound}");
                tilings.push(t);
                summary
            }
            Err(e) => {
                check.expect(false, || e.to_string());
                String::new()
            }
        },
        Err(e) => {
            check.expect(false, || e.to_string());
            String::new()
        }
    };
    check.finish(3, "stacked product", started, None, summary)
}

fn oracle_ball_size(space: &FiniteMetricSpace, center: Point, r: u64) -> usize {
    // only points within r layers of the bottom can be within r of layer 0
    let (_, layers) = space.stacked_parts().expect("stacked");
    space
        .points()
        .filter(|&q| q % layers <= r as usize && space.dist(center, q) <= r)
        .count()
}

/// Box space of ℤ along 2¹, …, 2¹².
pub fn box_space_tiling(tilings: &mut Vec<Tiling>) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let moduli: Vec<usize> = (1..=12).map(|k| 1 << k).collect();
    let summary = match tile_box_space(&moduli, 1, Rational::new(1, 3)) {
        Ok(t) => {
            let Construction::Box { monotile, first_tiled, ref absorbed } = t.construction else { unreachable!() };
            check.expect(monotile == 8, || format!("monotile {monotile}"));
            let report = verify_tiling(&t);
            check.expect(report.as_ref().is_ok_and(|r| r.pass), || "verification failed".into());
            let arcs = &t.tiles[usize::from(first_tiled > 0)..];
            check.expect(arcs.iter().all(|a| a.len() == 8), || "arc of wrong length".into());
            let arc_meta = &t.meta[usize::from(first_tiled > 0)..];
            check.expect(arc_meta.iter().all(|m| m.ratio == Rational::new(1, 4)), || "arc ratio differs from 1/4".into());
            let failing: Vec<usize> = moduli
                .iter()
                .enumerate()
                .filter(|(_, &m)| !crate::tiling::cycle_isometric_on_balls(m, 1 + 7))
                .map(|(i, _)| i)
                .collect();
            check.expect(failing.iter().all(|i| absorbed.contains(i)), || {
                format!("quotients {failing:?} fail the isometry check but were not absorbed")
            });
            if first_tiled > 0 {
                let x0 = &t.tiles[0];
                let boundary = oracle::folner_ratio(t.space(), x0, 1);
                check.expect(boundary == Rational::zero(), || format!("X_0 has boundary ratio {boundary}"));
            }
            let summary = format!("{} arcs of length 8, X_0 = quotients {absorbed:?}", arcs.len());
            tilings.push(t);
            summary
        }
        Err(e) => {
            check.expect(false, || e.to_string());
            String::new()
        }
    };
    check.finish(4, "box space", started, None, summary)
}

/// A random valid castle with at most `max_atoms` atoms.
pub fn random_castle(rng: &mut ChaCha8Rng, max_atoms: usize) -> Castle {
    let mut budget = rng.gen_range(1..=max_atoms);
    let mut next = 0;
    let mut towers = Vec::new();
    while budget > 0 {
        let height = rng.gen_range(1..=budget.min(8));
        let columns = rng.gen_range(1..=(budget / height).clamp(1, 6));
        budget -= height * columns;
        towers.push(Tower {
            height,
            columns: (0..columns)
                .map(|_| {
                    (0..height)
                        .map(|_| {
                            next += 1;
                            format!("a{next}")
                        })
                        .collect()
                })
                .collect(),
        });
    }
    let mut castle = Castle { towers };
    // scramble atom names so identifier order carries no structure
    let mut names: Vec<Atom> = castle.atoms().cloned().collect();
    names.shuffle(rng);
    let mut it = names.into_iter();
    for tower in &mut castle.towers {
        for col in &mut tower.columns {
            for atom in col.iter_mut() {
                *atom = it.next().expect("same count");
            }
        }
    }
    castle
}

fn random_subset(rng: &mut ChaCha8Rng, castle: &Castle) -> BTreeSet<Atom> {
    let density = rng.gen_range(0.0..1.0);
    castle.atoms().filter(|_| rng.gen_bool(density)).cloned().collect()
}

/// Comparison decided by refinement agrees with type vectors.
pub fn castle_comparison(seed: u64) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = 0;
    for i in 0..1000 {
        let castle = random_castle(&mut rng, 60);
        let (a, b) = if rng.gen_bool(0.5) {
            (random_subset(&mut rng, &castle), random_subset(&mut rng, &castle))
        } else {
            // a sub-level subset of B, so that witnesses are common
            let b = random_subset(&mut rng, &castle);
            let a = b.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            (a, b)
        };
        let expected = oracle::columns_dominate(&castle, &a, &b);
        match castle.compare(&a, &b) {
            Ok(Comparison::Witness { moves, .. }) => {
                witnesses += 1;
                check.expect(expected, || format!("castle {i}: witness where the oracle refuses"));
                let replay = castle.replay_witness(&moves, &a, &b);
                check.expect(replay.is_ok(), || format!("castle {i}: {replay:?}"));
            }
            Ok(Comparison::Refusal(_)) => {
                check.expect(!expected, || format!("castle {i}: refusal where the oracle accepts"))
            }
            Err(e) => check.expect(false, || format!("castle {i}: {e}")),
        }
    }
    check.finish(
        5,
        "castle comparison",
        started,
        Some(Duration::from_secs(10)),
        format!("1000 castles, {witnesses} witnesses replayed, 0 discrepancies"),
    )
}

/// Refinement adapts levels and preserves orbits and type vectors.
pub fn castle_refinement(seed: u64) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..500 {
        let castle = random_castle(&mut rng, 60);
        let targets: Vec<BTreeSet<Atom>> =
            (0..rng.gen_range(1..=3)).map(|_| random_subset(&mut rng, &castle)).collect();
        let refined = match castle.refine(&targets) {
            Ok(r) => r,
            Err(e) => {
                check.expect(false, || format!("castle {i}: {e}"));
                continue;
            }
        };
        check.expect(refined.validate().is_empty(), || format!("castle {i}: refinement invalid"));
        for (t, tower) in refined.towers.iter().enumerate() {
            for l in 0..tower.height {
                let level = refined.level(t, l);
                for target in &targets {
                    let inside = level.iter().filter(|x| target.contains(**x)).count();
                    check.expect(inside == 0 || inside == level.len(), || {
                        format!("castle {i}: tower {t} level {l} straddles a target")
                    });
                }
            }
        }
        let masses: BTreeMap<Atom, u64> = castle.atoms().map(|a| (a.clone(), rng.gen_range(0..5))).collect();
        let keyed = |c: &Castle| -> BTreeMap<Vec<Atom>, u64> {
            c.orbits()
                .map(|col| (col.clone(), col.iter().map(|a| masses[a]).sum()))
                .collect()
        };
        check.expect(keyed(&castle) == keyed(&refined), || format!("castle {i}: orbits or type vector changed"));
        let again = refined.refine(&targets);
        check.expect(again.as_ref() == Ok(&refined), || format!("castle {i}: not idempotent"));
    }
    check.finish(6, "castle refinement", started, None, "500 castles refined, 0 failures".into())
}

/// Invariance defect of the tile castle equals the largest clean tile ratio.
pub fn castle_defect_glue(tilings: &[Tiling]) -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    for (i, t) in tilings.iter().enumerate() {
        match castle_from_tiling(t).and_then(|c| invariance_defect(&c, t.window(), t.radius)) {
            Ok(defect) => {
                let expected = t.max_clean_ratio().unwrap_or_else(Rational::zero);
                check.expect(defect.value == expected, || {
                    format!("tiling {i}: defect {} but max clean ratio {expected}", defect.value)
                });
            }
            Err(e) => check.expect(false, || format!("tiling {i}: {e}")),
        }
    }
    check.expect(!tilings.is_empty(), || "no tilings to check".into());
    check.finish(7, "castle defect equals tile ratio", started, None, format!("{} tilings matched exactly", tilings.len()))
}

/// Almost unperforation, proper infiniteness and cancellation on three
/// presentations.
pub fn monoid_suite() -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let bounds = Bounds { depth: 12, n_max: 4, ..Bounds::default() };

    let free = MonoidPresentation::free(3);
    match free.check_almost_unperforated(8, &bounds) {
        Ok(out) => check.expect(out.counterexample.is_none() && out.inconclusive == 0, || {
            format!("free monoid: {out:?}")
        }),
        Err(e) => check.expect(false, || e.to_string()),
    }

    let e = |v: &[u32]| Element(v.to_vec());
    let numerical = MonoidPresentation::new(2, vec![(e(&[3, 0]), e(&[0, 2]))]).expect("well formed");
    match numerical.check_almost_unperforated(4, &bounds) {
        Ok(out) => match out.counterexample {
            Some(c) => {
                check.expect(
                    c.x == e(&[1, 0]) && c.y == e(&[0, 1]) && c.n == 2,
                    || format!("counterexample ({}, {}, {})", c.x, c.y, c.n),
                );
                let scaled = c.scaled.replay(&numerical, &c.x.scale(c.n + 1), &c.y.scale(c.n));
                check.expect(scaled.is_ok(), || format!("(n+1)x <= ny certificate: {scaled:?}"));
                check.expect(oracle::numerical_leq(&[2, 3], &c.x.scale(3).0, &c.y.scale(2).0), || {
                    "oracle rejects 3a <= 2b".into()
                });
                check.expect(matches!(c.refuted, Verdict::No(_)), || "x <= y not refuted".into());
                check.expect(!oracle::numerical_leq(&[2, 3], &c.x.0, &c.y.0), || "oracle accepts a <= b".into());
            }
            None => check.expect(false, || "no counterexample for 3a = 2b".into()),
        },
        Err(e) => check.expect(false, || e.to_string()),
    }

    let idempotent = MonoidPresentation::new(1, vec![(e(&[2]), e(&[1]))]).expect("well formed");
    match idempotent.properly_infinite(&e(&[1]), 4, &bounds) {
        Ok(out) => match out.direct {
            Verdict::Yes(cert) => {
                let r = cert.replay(&idempotent, &e(&[2]), &e(&[1]));
                check.expect(r.is_ok(), || format!("2a <= a certificate: {r:?}"));
            }
            other => check.expect(false, || format!("properly infinite: {}", other.label())),
        },
        Err(e) => check.expect(false, || e.to_string()),
    }
    match idempotent.cancellative_equal(&e(&[1]), &e(&[0]), &bounds) {
        Ok(Verdict::Yes(cert)) => {
            let end = cert.derivation.replay(&idempotent);
            check.expect(
                cert.derivation.start == cert.z.add(&e(&[1])) && end == Ok(cert.z.clone()),
                || format!("cancellation certificate {cert:?}"),
            );
        }
        Ok(other) => check.expect(false, || format!("cancellative_equal: {}", other.label())),
        Err(e) => check.expect(false, || e.to_string()),
    }
    check.finish(8, "monoid suite", started, Some(Duration::from_secs(10)), "all verdicts and certificates as expected".into())
}

/// Fill norms of the constant chain grow linearly on ℤ and stay bounded on
/// the tree.
pub fn fill_dichotomy() -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let mut seen = Vec::new();
    for (i, len) in [50i64, 100, 200].into_iter().enumerate() {
        let w = interval_window(0, len - 1, 1);
        let c = ZeroChain::constant(w.core(), 1);
        match min_norm_fill(&w, &c, 1) {
            Ok(fill) => {
                let want = (len as u64).div_ceil(2);
                check.expect(fill.norm == want, || format!("ℤ length {len}: norm {} != {want}", fill.norm));
                if i < 2 {
                    let o = oracle::tree_fill_norm(&w, &c);
                    check.expect(o == Some(fill.norm), || format!("ℤ length {len}: oracle {o:?}"));
                }
                seen.push(format!("Z{len}:{}", fill.norm));
            }
            Err(e) => check.expect(false, || e.to_string()),
        }
    }
    for radius in 4..=8 {
        let w = regular_tree_window(3, radius, 1);
        let c = ZeroChain::constant(w.core(), 1);
        match min_norm_fill(&w, &c, 1) {
            Ok(fill) => {
                check.expect(fill.norm <= 3, || format!("tree radius {radius}: norm {}", fill.norm));
                if radius <= 5 {
                    let o = oracle::tree_fill_norm(&w, &c);
                    check.expect(o == Some(fill.norm), || format!("tree radius {radius}: oracle {o:?}"));
                }
                seen.push(format!("T{radius}:{}", fill.norm));
            }
            Err(e) => check.expect(false, || e.to_string()),
        }
    }
    check.finish(9, "fill growth dichotomy", started, Some(Duration::from_secs(30)), seen.join(" "))
}

/// Tree balls double; integer intervals violate Hall's condition.
pub fn paradox_dichotomy() -> CriterionResult {
    let started = Instant::now();
    let mut check = Check::new();
    let mut crosschecked = 0;
    let mut run = |w: &WindowedSpace, f: &[Point], r: u64, want_witness: bool, name: String| {
        let outcome = doubling_check(w, f, r);
        let got_witness = match &outcome {
            Ok(Doubling::Witness(wit)) => {
                let replay = wit.replay(w.space());
                check.expect(replay.is_ok(), || format!("{name}: {replay:?}"));
                true
            }
            Ok(Doubling::Violator(v)) => {
                let replay = v.replay(w.space());
                check.expect(replay.is_ok(), || format!("{name}: {replay:?}"));
                false
            }
            Err(e) => {
                check.expect(false, || format!("{name}: {e}"));
                return;
            }
        };
        check.expect(got_witness == want_witness, || format!("{name}: wrong side of the dichotomy"));
        if w.space().len() <= 200 {
            crosschecked += 1;
            let matched = oracle::max_two_matching(w.space(), f, r);
            check.expect((matched == 2 * f.len()) == got_witness, || {
                format!("{name}: augmenting paths matched {matched} of {}", 2 * f.len())
            });
        }
    };
    for radius in 3..=5 {
        let w = regular_tree_window(3, radius, 2);
        run(&w, w.core(), 2, true, format!("tree radius {radius}"));
    }
    for len in 10..=100i64 {
        for r in (1..=5u64).filter(|&r| 2 * r < len as u64) {
            let w = interval_window(0, len - 1, r);
            run(&w, w.core(), r, false, format!("ℤ length {len}, R={r}"));
        }
    }
    let summary = format!("{crosschecked} instances cross-checked by augmenting paths");
    check.finish(10, "paradox dichotomy", started, None, summary)
}

/// Runs every criterion in order.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    let mut tilings = Vec::new();
    let mut results = vec![
        integer_tiling(&mut tilings),
        sparse_tilings(seed, &mut tilings),
        stacked_tiling(&mut tilings),
        box_space_tiling(&mut tilings),
        castle_comparison(seed),
        castle_refinement(seed),
    ];
    results.push(castle_defect_glue(&tilings));
    results.push(monoid_suite());
    results.push(fill_dichotomy());
    results.push(paradox_dichotomy());
    results
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<32} {} ({} ms): {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed_ms,
            self.detail
        )
    }
}
