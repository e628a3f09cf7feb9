//! Følner-set search and the paradoxical side of the dichotomy: two
//! disjoint R-translates of a finite set, found by (2,1)-matching.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowNetwork;
use crate::rational::Rational;
use crate::space::{FiniteMetricSpace, Point, SpaceError, WindowedSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmenabilityError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("epsilon must be strictly positive")]
    NonPositiveEpsilon,
    #[error("no candidate set has its {0}-neighbourhood inside the core; the window is too small")]
    NoAdmissibleCandidate(u64),
    #[error("point {0} is not in the core")]
    OutsideCore(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Balls B_r(x) by increasing r, centres in point order.
    Balls,
    /// Runs of consecutive point indices by increasing length.
    Intervals,
    /// From each core seed, repeatedly absorb the boundary point that
    /// minimizes the resulting ratio.
    Greedy,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "balls" => Ok(Strategy::Balls),
            "intervals" => Ok(Strategy::Intervals),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(format!("unknown strategy {other:?} (balls, intervals, greedy)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub set: Vec<Point>,
    pub ratio: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerOutcome {
    /// Minimum-ratio admissible candidate among those examined.
    pub best: Candidate,
    /// Whether `best.ratio < ε`. False only means no examined candidate
    /// qualified.
    pub found: bool,
    pub examined: usize,
}

struct Search<'a> {
    window: &'a WindowedSpace,
    radius: u64,
    epsilon: Rational,
    budget: usize,
    examined: usize,
    best: Option<Candidate>,
}

impl Search<'_> {
    fn evaluate(&self, set: &[Point]) -> Option<Candidate> {
        if self.window.is_contaminated(set, self.radius) {
            return None;
        }
        let boundary = self.window.space().outer_boundary_unchecked(set, self.radius);
        Some(Candidate {
            set: set.to_vec(),
            ratio: Rational::ratio_of(boundary.len(), set.len()),
        })
    }

    /// Evaluates a batch in parallel, folds it in canonical order and
    /// reports whether the search should stop. Returns `None` when no
    /// member of the batch was admissible.
    fn batch(&mut self, sets: Vec<Vec<Point>>) -> Option<bool> {
        let room = self.budget - self.examined;
        let sets = &sets[..sets.len().min(room)];
        let scored: Vec<Option<Candidate>> = sets.par_iter().map(|s| self.evaluate(s)).collect();
        self.examined += sets.len();
        let mut any = false;
        for c in scored.into_iter().flatten() {
            any = true;
            if self.offer(c) {
                return Some(true);
            }
        }
        if self.examined >= self.budget {
            return Some(true);
        }
        any.then_some(false)
    }

    /// Folds a candidate into the running best; true once it qualifies.
    fn offer(&mut self, c: Candidate) -> bool {
        if self.best.as_ref().is_none_or(|b| c.ratio < b.ratio) {
            self.best = Some(c);
        }
        self.best.as_ref().is_some_and(|b| b.ratio < self.epsilon)
    }
}

/// Searches the window for a set F with B_R(F) inside the core and
/// |∂_R^+(F)| < ε|F|, examining at most `budget` candidates.
///
/// The search stops at the first qualifying candidate in canonical order.
/// A negative outcome is never a proof of non-amenability.
pub fn folner_search(
    window: &WindowedSpace,
    radius: u64,
    epsilon: Rational,
    strategy: Strategy,
    budget: usize,
) -> Result<FolnerOutcome, AmenabilityError> {
    if !epsilon.is_positive() {
        return Err(AmenabilityError::NonPositiveEpsilon);
    }
    let mut search = Search {
        window,
        radius,
        epsilon,
        budget,
        examined: 0,
        best: None,
    };
    let space = window.space();
    let core = window.core();
    if budget > 0 && !core.is_empty() {
        match strategy {
            Strategy::Balls => {
                for r in 0..=space.full_diameter() {
                    let balls = core
                        .iter()
                        .map(|&x| space.ball(x, r))
                        .collect::<Result<Vec<_>, _>>()?;
                    if search.batch(balls) != Some(false) {
                        break;
                    }
                }
            }
            Strategy::Intervals => {
                for len in 1..=space.len() {
                    let runs = (0..=space.len() - len)
                        .map(|start| (start..start + len).collect())
                        .collect();
                    if search.batch(runs) != Some(false) {
                        break;
                    }
                }
            }
            Strategy::Greedy => {
                for &seed in core {
                    if greedy_from(&mut search, seed) {
                        break;
                    }
                }
            }
        }
    }
    let best = search
        .best
        .take()
        .ok_or(AmenabilityError::NoAdmissibleCandidate(radius))?;
    Ok(FolnerOutcome {
        found: best.ratio < epsilon,
        best,
        examined: search.examined,
    })
}

/// Grows a set from `seed`; returns true when the search should stop.
fn greedy_from(search: &mut Search<'_>, seed: Point) -> bool {
    let space = search.window.space();
    search.examined += 1;
    let Some(mut current) = search.evaluate(&[seed]) else {
        return search.examined >= search.budget;
    };
    loop {
        if search.offer(current.clone()) || search.examined >= search.budget {
            return true;
        }
        let frontier = space.outer_boundary_unchecked(&current.set, search.radius.max(1));
        let options: Vec<Vec<Point>> = frontier
            .into_iter()
            .filter(|&p| search.window.is_core(p))
            .map(|p| {
                let mut next = current.set.clone();
                let at = next.partition_point(|&q| q < p);
                next.insert(at, p);
                next
            })
            .collect();
        let room = search.budget - search.examined;
        let options = &options[..options.len().min(room)];
        search.examined += options.len();
        let scored: Vec<Option<Candidate>> =
            options.par_iter().map(|s| search.evaluate(s)).collect();
        match scored.into_iter().flatten().min_by(|a, b| a.ratio.cmp(&b.ratio)) {
            Some(next) => current = next,
            None => return search.examined >= search.budget,
        }
    }
}

/// Two injective maps F → window with displacement at most R and disjoint
/// images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadoxWitness {
    pub radius: u64,
    pub phi1: Vec<(Point, Point)>,
    pub phi2: Vec<(Point, Point)>,
}

/// S ⊆ F with |B_R(S)| < 2|S|.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallViolator {
    pub radius: u64,
    pub set: Vec<Point>,
    pub neighbourhood: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Doubling {
    Witness(ParadoxWitness),
    Violator(HallViolator),
}

impl ParadoxWitness {
    /// Checks injectivity, displacement and disjointness element by element.
    pub fn replay(&self, space: &FiniteMetricSpace) -> Result<(), String> {
        let mut used = vec![false; space.len()];
        for (x, y) in self.phi1.iter().chain(&self.phi2) {
            if *y >= space.len() || *x >= space.len() {
                return Err(format!("point out of range in pair ({x}, {y})"));
            }
            if space.dist(*x, *y) > self.radius {
                return Err(format!(
                    "{} moves to {} at distance {} > {}",
                    space.label(*x),
                    space.label(*y),
                    space.dist(*x, *y),
                    self.radius
                ));
            }
            if used[*y] {
                return Err(format!("{} is hit twice", space.label(*y)));
            }
            used[*y] = true;
        }
        Ok(())
    }
}

impl HallViolator {
    pub fn replay(&self, space: &FiniteMetricSpace) -> Result<(), String> {
        let n = space.neighborhood(&self.set, self.radius).map_err(|e| e.to_string())?;
        if n.len() != self.neighbourhood || n.len() >= 2 * self.set.len() {
            return Err(format!(
                "|B_R(S)| = {} is not below 2|S| = {}",
                n.len(),
                2 * self.set.len()
            ));
        }
        Ok(())
    }
}

/// Decides whether F has two disjoint R-translates inside the window.
///
/// Two copies of F are matched into their R-balls by unit-capacity max
/// flow; on failure the copies reachable in the residual network project
/// to a Hall violator.
pub fn doubling_check(
    window: &WindowedSpace,
    set: &[Point],
    radius: u64,
) -> Result<Doubling, AmenabilityError> {
    let space = window.space();
    let mut f: Vec<Point> = set.to_vec();
    f.sort_unstable();
    f.dedup();
    for &x in &f {
        if x >= space.len() {
            return Err(SpaceError::UnknownPoint(x).into());
        }
        if !window.is_core(x) {
            return Err(AmenabilityError::OutsideCore(space.label(x)));
        }
    }
    let k = f.len();
    let n = space.len();
    let source = 2 * k + n;
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    let mut arcs: Vec<Vec<(usize, Point)>> = vec![Vec::new(); 2 * k];
    for copy in 0..2 {
        for (i, &x) in f.iter().enumerate() {
            let left = copy * k + i;
            net.add_arc(source, left, 1);
            for y in space.ball(x, radius)? {
                let id = net.add_arc(left, 2 * k + y, 2 * k as i64);
                arcs[left].push((id, y));
            }
        }
    }
    for y in 0..n {
        net.add_arc(2 * k + y, sink, 1);
    }
    let flow = net.max_flow(source, sink);
    if flow == 2 * k as i64 {
        let image = |left: usize| {
            arcs[left]
                .iter()
                .find(|&&(id, _)| net.flow_on(id) > 0)
                .map(|&(_, y)| y)
                .expect("saturated source arc")
        };
        let phi1 = f.iter().enumerate().map(|(i, &x)| (x, image(i))).collect();
        let phi2 = f.iter().enumerate().map(|(i, &x)| (x, image(k + i))).collect();
        return Ok(Doubling::Witness(ParadoxWitness { radius, phi1, phi2 }));
    }
    let reach = net.residual_reachable(source);
    let violator: Vec<Point> = f
        .iter()
        .enumerate()
        .filter(|&(i, _)| reach[i] || reach[k + i])
        .map(|(_, &x)| x)
        .collect();
    let neighbourhood = space.neighborhood_unchecked(&violator, radius).len();
    Ok(Doubling::Violator(HallViolator {
        radius,
        set: violator,
        neighbourhood,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftest::oracle;
    use super::Strategy;
    use crate::space::{interval_window, regular_tree_window};
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    #[test]
    fn intervals_find_length_21() {
        let w = interval_window(-200, 200, 1);
        let out = folner_search(&w, 1, Rational::new(1, 10), Strategy::Intervals, 1_000_000).unwrap();
        assert!(out.found);
        assert_eq!(out.best.set.len(), 21);
        assert_eq!(out.best.ratio, Rational::new(2, 21));
        let vals = w.space().integer_values().unwrap();
        let f: Vec<i64> = out.best.set.iter().map(|&p| vals[p]).collect();
        assert_eq!(oracle::integer_boundary(vals, &f, 1), 2);
    }

    #[test]
    fn tree_balls_never_succeed() {
        let w = regular_tree_window(3, 7, 1);
        let out = folner_search(&w, 1, Rational::new(1, 2), Strategy::Balls, 1_000_000).unwrap();
        assert!(!out.found);
        assert!(out.best.ratio > Rational::new(1, 2));
        // the root ball of radius 6 has ratio 3·2^6 / (3·2^6 − 2)
        let root_ball = w.space().ball(0, 6).unwrap();
        assert_eq!(
            w.space().folner_ratio(&root_ball, 1).unwrap(),
            Rational::new(192, 190)
        );
    }

    #[test]
    fn radius_zero_is_trivially_folner() {
        let w = regular_tree_window(3, 2, 1);
        for strategy in [Strategy::Balls, Strategy::Intervals, Strategy::Greedy] {
            let out = folner_search(&w, 0, Rational::new(1, 100), strategy, 10).unwrap();
            assert!(out.found);
            assert_eq!(out.best.ratio, Rational::zero());
        }
    }

    #[test]
    fn greedy_on_integers() {
        let w = interval_window(0, 100, 1);
        let out = folner_search(&w, 1, Rational::new(1, 4), Strategy::Greedy, 100_000).unwrap();
        assert!(out.found);
        assert!(out.best.ratio < Rational::new(1, 4));
    }

    #[test]
    fn search_errors() {
        let w = interval_window(0, 3, 1);
        assert_eq!(
            folner_search(&w, 5, Rational::new(1, 2), Strategy::Balls, 100).unwrap_err(),
            AmenabilityError::NoAdmissibleCandidate(5)
        );
        assert_eq!(
            folner_search(&w, 1, Rational::zero(), Strategy::Balls, 100).unwrap_err(),
            AmenabilityError::NonPositiveEpsilon
        );
    }

    #[test]
    fn budget_is_respected() {
        let w = interval_window(-200, 200, 1);
        let out = folner_search(&w, 1, Rational::new(1, 10), Strategy::Intervals, 50).unwrap();
        assert_eq!(out.examined, 50);
        assert!(!out.found);
    }

    #[test]
    fn empty_set_doubles() {
        let w = interval_window(0, 5, 1);
        assert_eq!(
            doubling_check(&w, &[], 1).unwrap(),
            Doubling::Witness(ParadoxWitness {
                radius: 1,
                phi1: vec![],
                phi2: vec![]
            })
        );
    }

    #[test]
    fn integer_interval_violates_hall() {
        let w = interval_window(0, 20, 2);
        let f: Vec<Point> = (5..15).collect();
        let Doubling::Violator(v) = doubling_check(&w, &f, 1).unwrap() else {
            panic!("expected a violator")
        };
        v.replay(w.space()).unwrap();
        assert_eq!(v.set, f);
        assert_eq!(v.neighbourhood, 12);
    }

    #[test]
    fn tree_ball_doubles() {
        let w = regular_tree_window(3, 6, 2);
        let f = w.space().ball(0, 3).unwrap();
        let Doubling::Witness(wit) = doubling_check(&w, &f, 2).unwrap() else {
            panic!("expected a witness")
        };
        wit.replay(w.space()).unwrap();
        assert_eq!(wit.phi1.len(), f.len());
        assert_eq!(oracle::max_two_matching(w.space(), &f, 2), 2 * f.len());
    }

    #[test]
    fn outside_core_rejected() {
        let w = interval_window(0, 5, 1);
        assert_eq!(
            doubling_check(&w, &[0], 1).unwrap_err(),
            AmenabilityError::OutsideCore("-1".into())
        );
    }

    fn small_graph() -> impl proptest::strategy::Strategy<Value = (FiniteMetricSpace, Vec<Point>, u64)> {
        (4usize..40)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec((0..n, 0..n), 0..2 * n),
                    proptest::collection::vec(0..n, 0..n),
                    0u64..3,
                )
            })
            .prop_map(|(n, edges, set, r)| {
                let mut adj = vec![Vec::new(); n];
                for (a, b) in edges {
                    if a != b && !adj[a].contains(&b) {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
                (FiniteMetricSpace::from_adjacency(adj), set, r)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matching_agrees_with_augmenting_paths((space, set, r) in small_graph()) {
            let w = WindowedSpace::whole(space);
            let mut f = set.clone();
            f.sort_unstable();
            f.dedup();
            let expected = oracle::max_two_matching(w.space(), &f, r);
            match doubling_check(&w, &set, r).unwrap() {
                Doubling::Witness(wit) => {
                    wit.replay(w.space()).unwrap();
                    prop_assert_eq!(expected, 2 * f.len());
                }
                Doubling::Violator(v) => {
                    v.replay(w.space()).unwrap();
                    prop_assert!(expected < 2 * f.len());
                }
            }
        }

        #[test]
        fn integer_intervals_never_double(len in 1usize..30, r in 0u64..15) {
            prop_assume!((r as usize) * 2 < len);
            let w = interval_window(0, 80, r);
            let start = r as usize + 5;
            let f: Vec<Point> = (start..start + len).collect();
            prop_assert!(matches!(doubling_check(&w, &f, r).unwrap(), Doubling::Violator(_)));
        }

        #[test]
        fn found_sets_are_faithful(r in 1u64..4, q in 2i64..12) {
            let w = interval_window(0, 150, r);
            let out = folner_search(&w, r, Rational::new(1, q), Strategy::Balls, 100_000).unwrap();
            prop_assert!(!w.is_contaminated(&out.best.set, r));
            prop_assert_eq!(out.best.ratio, w.space().folner_ratio(&out.best.set, r).unwrap());
        }
    }
}
