//! Degree 0 and 1 of the uniformly finite chain complex on a window, and a
//! minimum sup-norm solver for ∂h = c.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowNetwork;
use crate::space::{FiniteMetricSpace, Point, SpaceError, WindowedSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("propagation {propagation} exceeds the halo depth {halo_depth}")]
    PropagationTooLarge { propagation: u64, halo_depth: u64 },
    #[error("0-chain is supported outside the core at {0}")]
    OutsideCore(String),
    #[error("pair ({x}, {y}) spans distance {distance} > propagation {propagation}")]
    PropagationViolated {
        x: String,
        y: String,
        distance: u64,
        propagation: u64,
    },
    #[error("a component of {} points lies in the core and carries total mass {total}", component.len())]
    Infeasible { component: Vec<Point>, total: i64 },
}

/// Finitely supported integer function on points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroChain {
    pub coeffs: BTreeMap<Point, i64>,
}

impl ZeroChain {
    pub fn constant(points: &[Point], value: i64) -> Self {
        ZeroChain {
            coeffs: points.iter().map(|&p| (p, value)).collect(),
        }
    }

    pub fn get(&self, p: Point) -> i64 {
        self.coeffs.get(&p).copied().unwrap_or(0)
    }

    fn add(&mut self, p: Point, v: i64) {
        if v == 0 {
            return;
        }
        let e = self.coeffs.entry(p).or_insert(0);
        *e += v;
        if *e == 0 {
            self.coeffs.remove(&p);
        }
    }

    fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, v| *v != 0);
        self
    }
}

/// Integer function on ordered pairs with a declared propagation bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneChain {
    pub coeffs: BTreeMap<(Point, Point), i64>,
    pub propagation: u64,
}

impl OneChain {
    pub fn sup_norm(&self) -> u64 {
        self.coeffs.values().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    /// Checks that every supported pair spans at most the propagation.
    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<(), HomologyError> {
        for &(x, y) in self.coeffs.keys() {
            if x >= space.len() || y >= space.len() {
                return Err(SpaceError::UnknownPoint(x.max(y)).into());
            }
            let distance = space.dist(x, y);
            if distance > self.propagation {
                return Err(HomologyError::PropagationViolated {
                    x: space.label(x),
                    y: space.label(y),
                    distance,
                    propagation: self.propagation,
                });
            }
        }
        Ok(())
    }
}

/// (∂h)(p) = Σ_x h(x,p) − Σ_y h(p,y).
pub fn apply_boundary(h: &OneChain) -> ZeroChain {
    let mut out = ZeroChain::default();
    for (&(x, y), &v) in &h.coeffs {
        out.add(y, v);
        out.add(x, -v);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub norm: u64,
    pub chain: OneChain,
}

/// Finds h with ∂h = c at every core point, supported on pairs at distance
/// at most `propagation`, with the least possible sup norm.
///
/// Halo points are unconstrained, so mass may leave through them. Each
/// Δ_P-component is solved separately by binary search on the bound with
/// a max-flow feasibility test.
pub fn min_norm_fill(
    window: &WindowedSpace,
    c: &ZeroChain,
    propagation: u64,
) -> Result<Fill, HomologyError> {
    let space = window.space();
    if !window.halo().is_empty() && propagation > window.halo_depth() {
        return Err(HomologyError::PropagationTooLarge {
            propagation,
            halo_depth: window.halo_depth(),
        });
    }
    for &p in c.coeffs.keys() {
        if p >= space.len() {
            return Err(SpaceError::UnknownPoint(p).into());
        }
        if !window.is_core(p) {
            return Err(HomologyError::OutsideCore(space.label(p)));
        }
    }
    let c = c.clone().normalized();
    let mut chain = OneChain {
        coeffs: BTreeMap::new(),
        propagation,
    };
    let mut norm = 0;
    for component in space.proximity_components(propagation) {
        if !component.iter().any(|p| c.coeffs.contains_key(p)) {
            continue;
        }
        let problem = ComponentProblem::new(window, &component, &c, propagation)?;
        let (bound, flows) = problem.solve();
        norm = norm.max(bound);
        for ((x, y), v) in flows {
            chain.coeffs.insert((x, y), v);
        }
    }
    Ok(Fill { norm, chain })
}

type ArcPair = (usize, usize);
type Edge = ((Point, Point), i64);

/// One Δ_P-component with all halo points merged into a single ground node.
struct ComponentProblem {
    core: Vec<Point>,
    demand: Vec<i64>,
    /// Core-core pairs as (local x, local y) with x < y.
    inner: Vec<(usize, usize)>,
    /// Core point to halo point pairs as (local core, halo point).
    exits: Vec<(usize, Point)>,
}

impl ComponentProblem {
    fn new(
        window: &WindowedSpace,
        component: &[Point],
        c: &ZeroChain,
        propagation: u64,
    ) -> Result<Self, HomologyError> {
        let space = window.space();
        let core: Vec<Point> = component.iter().copied().filter(|&p| window.is_core(p)).collect();
        let has_halo = core.len() < component.len();
        let total: i64 = core.iter().map(|&p| c.get(p)).sum();
        if !has_halo && total != 0 {
            return Err(HomologyError::Infeasible {
                component: component.to_vec(),
                total,
            });
        }
        let local = |p: Point| core.binary_search(&p).ok();
        let mut inner = Vec::new();
        let mut exits = Vec::new();
        for (i, &p) in core.iter().enumerate() {
            for q in space.ball(p, propagation)? {
                match local(q) {
                    Some(j) if j > i => inner.push((i, j)),
                    Some(_) => {}
                    None => exits.push((i, q)),
                }
            }
        }
        let mut demand: Vec<i64> = core.iter().map(|&p| c.get(p)).collect();
        demand.push(-total);
        Ok(ComponentProblem {
            core,
            demand,
            inner,
            exits,
        })
    }

    fn ground(&self) -> usize {
        self.core.len()
    }

    /// Builds the network for bound `b`; returns it with the flow value
    /// required for feasibility and the arc ids of every pair.
    fn network(&self, b: i64) -> (FlowNetwork, i64, Vec<ArcPair>, Vec<ArcPair>) {
        let n = self.ground() + 1;
        let (source, sink) = (n, n + 1);
        let mut net = FlowNetwork::new(n + 2);
        let mut required = 0;
        for (v, &d) in self.demand.iter().enumerate() {
            if d < 0 {
                net.add_arc(source, v, -d);
            } else if d > 0 {
                net.add_arc(v, sink, d);
                required += d;
            }
        }
        let inner = self
            .inner
            .iter()
            .map(|&(x, y)| (net.add_arc(x, y, b), net.add_arc(y, x, b)))
            .collect();
        let g = self.ground();
        let exits = self
            .exits
            .iter()
            .map(|&(x, _)| (net.add_arc(x, g, b), net.add_arc(g, x, b)))
            .collect();
        (net, required, inner, exits)
    }

    fn feasible(&self, b: i64) -> bool {
        let (mut net, required, _, _) = self.network(b);
        let n = self.ground() + 1;
        net.max_flow(n, n + 1) == required
    }

    fn solve(&self) -> (u64, Vec<Edge>) {
        let (mut lo, mut hi) = (0i64, self.demand.iter().map(|d| d.abs()).sum::<i64>());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.feasible(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (mut net, _, inner, exits) = self.network(lo);
        let n = self.ground() + 1;
        net.max_flow(n, n + 1);
        let mut flows = Vec::new();
        let mut push = |x: Point, y: Point, forward: usize, backward: usize| {
            let v = net.flow_on(forward) - net.flow_on(backward);
            if v > 0 {
                flows.push(((x, y), v));
            } else if v < 0 {
                flows.push(((y, x), -v));
            }
        };
        for (&(x, y), &(f, b)) in self.inner.iter().zip(&inner) {
            push(self.core[x], self.core[y], f, b);
        }
        for (&(x, q), &(f, b)) in self.exits.iter().zip(&exits) {
            push(self.core[x], q, f, b);
        }
        (lo as u64, flows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftest::oracle;
    use crate::space::{interval_window, regular_tree_window};
    use proptest::prelude::*;

    fn unit_path(points: &[Point]) -> OneChain {
        OneChain {
            coeffs: points.windows(2).map(|w| ((w[0], w[1]), 1)).collect(),
            propagation: 1,
        }
    }

    fn assert_fills(window: &WindowedSpace, c: &ZeroChain, fill: &Fill) {
        fill.chain.validate(window.space()).unwrap();
        assert_eq!(fill.chain.sup_norm(), fill.norm);
        let d = apply_boundary(&fill.chain);
        for &p in window.core() {
            assert_eq!(d.get(p), c.get(p), "mismatch at {p}");
        }
        for &(x, y) in fill.chain.coeffs.keys() {
            assert!(!fill.chain.coeffs.contains_key(&(y, x)));
        }
    }

    #[test]
    fn boundary_examples() {
        let single = OneChain {
            coeffs: BTreeMap::from([((3, 7), 1)]),
            propagation: 4,
        };
        assert_eq!(
            apply_boundary(&single).coeffs,
            BTreeMap::from([(3, -1), (7, 1)])
        );
        let path: Vec<Point> = (0..=10).collect();
        assert_eq!(
            apply_boundary(&unit_path(&path)).coeffs,
            BTreeMap::from([(0, -1), (10, 1)])
        );
        assert!(apply_boundary(&OneChain::default()).coeffs.is_empty());
    }

    #[test]
    fn zero_chain_fills_with_zero() {
        let w = interval_window(0, 10, 1);
        let fill = min_norm_fill(&w, &ZeroChain::default(), 1).unwrap();
        assert_eq!(fill.norm, 0);
        assert!(fill.chain.coeffs.is_empty());
    }

    #[test]
    fn dipole_on_a_path() {
        let space = FiniteMetricSpace::integer_interval(0, 10);
        let w = WindowedSpace::whole(space);
        let c = ZeroChain {
            coeffs: BTreeMap::from([(0, 1), (10, -1)]),
        };
        let fill = min_norm_fill(&w, &c, 1).unwrap();
        assert_eq!(fill.norm, 1);
        assert_fills(&w, &c, &fill);
    }

    #[test]
    fn constant_on_eleven_points() {
        let w = interval_window(0, 10, 2);
        let c = ZeroChain::constant(w.core(), 1);
        let fill = min_norm_fill(&w, &c, 1).unwrap();
        assert_eq!(fill.norm, 6);
        assert_fills(&w, &c, &fill);
        assert_eq!(oracle::tree_fill_norm(&w, &c), Some(6));
    }

    #[test]
    fn closed_component_with_mass_is_infeasible() {
        let space = FiniteMetricSpace::from_graph(&["a", "b", "c"], &[("a", "b")]).unwrap();
        let w = WindowedSpace::whole(space);
        let c = ZeroChain {
            coeffs: BTreeMap::from([(2, 1)]),
        };
        assert_eq!(
            min_norm_fill(&w, &c, 1).unwrap_err(),
            HomologyError::Infeasible {
                component: vec![2],
                total: 1
            }
        );
        let balanced = ZeroChain {
            coeffs: BTreeMap::from([(0, 2), (1, -2)]),
        };
        assert_eq!(min_norm_fill(&w, &balanced, 1).unwrap().norm, 2);
    }

    #[test]
    fn precondition_errors() {
        let w = interval_window(0, 10, 1);
        assert!(matches!(
            min_norm_fill(&w, &ZeroChain::default(), 2),
            Err(HomologyError::PropagationTooLarge { .. })
        ));
        let c = ZeroChain {
            coeffs: BTreeMap::from([(0, 1)]),
        };
        assert_eq!(
            min_norm_fill(&w, &c, 1).unwrap_err(),
            HomologyError::OutsideCore("-1".into())
        );
    }

    #[test]
    fn tree_norm_stays_small() {
        for radius in 2..=5 {
            let w = regular_tree_window(3, radius, 1);
            let c = ZeroChain::constant(w.core(), 1);
            let fill = min_norm_fill(&w, &c, 1).unwrap();
            assert!(fill.norm <= 3);
            assert_fills(&w, &c, &fill);
            assert_eq!(oracle::tree_fill_norm(&w, &c), Some(fill.norm));
        }
    }

    fn chains_on(n: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-4i64..=4, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fills_match_tree_oracle(values in chains_on(30), halo in 1u64..3) {
            let w = interval_window(0, 29, halo);
            let c = ZeroChain {
                coeffs: w.core().iter().zip(&values).map(|(&p, &v)| (p, v)).collect(),
            }.normalized();
            let fill = min_norm_fill(&w, &c, 1).unwrap();
            assert_fills(&w, &c, &fill);
            prop_assert_eq!(Some(fill.norm), oracle::tree_fill_norm(&w, &c));
        }

        #[test]
        fn larger_propagation_never_hurts(values in chains_on(25)) {
            let w = interval_window(0, 24, 3);
            let c = ZeroChain {
                coeffs: w.core().iter().zip(&values).map(|(&p, &v)| (p, v)).collect(),
            }.normalized();
            let norms: Vec<u64> = (1..=3).map(|p| min_norm_fill(&w, &c, p).unwrap().norm).collect();
            prop_assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn infeasible_exactly_on_closed_mass(values in chains_on(12), cut in 1usize..11) {
            // two closed paths 0..cut and cut+5..; no halo anywhere
            let mut pts: Vec<i64> = (0..cut as i64).collect();
            pts.extend((cut as i64 + 5)..(cut as i64 + 5 + (12 - cut) as i64));
            let w = WindowedSpace::whole(FiniteMetricSpace::integers(pts).unwrap());
            let c = ZeroChain {
                coeffs: (0..12).zip(values.iter().copied()).collect(),
            }.normalized();
            let left: i64 = values[..cut].iter().sum();
            let right: i64 = values[cut..].iter().sum();
            match min_norm_fill(&w, &c, 1) {
                Ok(fill) => {
                    prop_assert!(left == 0 && right == 0);
                    assert_fills(&w, &c, &fill);
                    prop_assert_eq!(Some(fill.norm), oracle::tree_fill_norm(&w, &c));
                }
                Err(HomologyError::Infeasible { total, .. }) => {
                    prop_assert!(total != 0 && (total == left || total == right));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
