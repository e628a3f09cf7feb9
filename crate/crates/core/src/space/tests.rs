use proptest::prelude::*;

use super::*;

fn path(n: usize) -> FiniteMetricSpace {
    let vs: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let es: Vec<(String, String)> = (1..n)
        .map(|i| ((i - 1).to_string(), i.to_string()))
        .collect();
    FiniteMetricSpace::from_graph(&vs, &es).unwrap()
}

/// Enumeration oracle: boundary straight from the definition.
fn brute_boundary(space: &FiniteMetricSpace, set: &[Point], r: u64) -> Vec<Point> {
    space
        .points()
        .filter(|p| !set.contains(p))
        .filter(|&p| set.iter().any(|&f| space.dist(p, f) <= r))
        .collect()
}

/// Floyd–Warshall over the raw edge list.
fn floyd(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
    let inf = n as u64 + 1;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

#[test]
fn graph_metric_examples() {
    let p = path(3);
    assert_eq!(p.dist(0, 2), 2);

    let single = FiniteMetricSpace::from_graph(&["v"], &[]).unwrap();
    assert_eq!(single.dist(0, 0), 0);

    let two = FiniteMetricSpace::from_graph(&["a", "b", "c"], &[("a", "b")]).unwrap();
    assert_eq!(two.dist(0, 2), 4);
    assert_eq!(two.disconnected_sentinel(), Some(4));
}

#[test]
fn graph_metric_errors() {
    assert_eq!(
        FiniteMetricSpace::from_graph(&["a", "a"], &[]).unwrap_err(),
        SpaceError::DuplicateVertex("a".into())
    );
    assert_eq!(
        FiniteMetricSpace::from_graph(&["a", "b"], &[("a", "a")]).unwrap_err(),
        SpaceError::SelfLoop("a".into())
    );
    assert_eq!(
        FiniteMetricSpace::from_graph(&["a"], &[("a", "z")]).unwrap_err(),
        SpaceError::UnknownVertex("z".into())
    );
}

#[test]
fn matrix_metric_is_validated() {
    let ok = FiniteMetricSpace::from_matrix(&["x", "y"], vec![vec![0, 3], vec![3, 0]]).unwrap();
    assert_eq!(ok.dist(0, 1), 3);
    assert!(matches!(
        FiniteMetricSpace::from_matrix(&["x", "y"], vec![vec![0, 3], vec![2, 0]]),
        Err(SpaceError::NotAMetric(_))
    ));
    assert!(matches!(
        FiniteMetricSpace::from_matrix(
            &["x", "y", "z"],
            vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]
        ),
        Err(SpaceError::NotAMetric(_))
    ));
    assert_eq!(
        FiniteMetricSpace::from_matrix(&["x"], vec![vec![0, 1]]).unwrap_err(),
        SpaceError::MatrixShape { n: 1 }
    );
}

#[test]
fn ball_examples() {
    let p = path(5);
    assert_eq!(p.ball(2, 1).unwrap(), vec![1, 2, 3]);
    assert_eq!(p.ball(4, 0).unwrap(), vec![4]);
    assert_eq!(p.ball(9, 0), Err(SpaceError::UnknownPoint(9)));

    let tree = regular_tree_window(3, 2, 0);
    assert_eq!(tree.space().ball(0, 2).unwrap().len(), 10);
}

#[test]
fn outer_boundary_examples() {
    let p = path(5);
    assert!(p.outer_boundary(&[], 3).unwrap().is_empty());
    assert_eq!(p.outer_boundary(&[2], 1).unwrap(), vec![1, 3]);

    let z = FiniteMetricSpace::integer_interval(-50, 50);
    let f: Vec<Point> = (0..10).map(|v| z.lookup(&v.to_string()).unwrap()).collect();
    let b = z.outer_boundary(&f, 2).unwrap();
    let labels: Vec<String> = b.iter().map(|&q| z.label(q)).collect();
    assert_eq!(labels, ["-2", "-1", "10", "11"]);
    assert_eq!(b, brute_boundary(&z, &f, 2));
}

#[test]
fn folner_ratio_examples() {
    let z = FiniteMetricSpace::integer_interval(-100, 100);
    let f: Vec<Point> = (50..71).collect();
    assert_eq!(z.folner_ratio(&f, 1).unwrap(), Rational::new(2, 21));

    let whole: Vec<Point> = path(6).points().collect();
    assert_eq!(path(6).folner_ratio(&whole, 3).unwrap(), Rational::zero());

    let tree = regular_tree_window(3, 5, 0);
    let ball = tree.space().ball(0, 3).unwrap();
    assert_eq!(ball.len(), 22);
    assert_eq!(
        tree.space().folner_ratio(&ball, 1).unwrap(),
        Rational::new(24, 22)
    );
    assert_eq!(z.folner_ratio(&[], 1), Err(SpaceError::EmptySet));
}

#[test]
fn diameter_examples() {
    let z = FiniteMetricSpace::integer_interval(-20, 20);
    let at = |v: i64| z.lookup(&v.to_string()).unwrap();
    assert_eq!(z.diameter(&[at(3)]).unwrap(), 0);
    let interval: Vec<Point> = (0..10).map(at).collect();
    assert_eq!(z.diameter(&interval).unwrap(), 9);
    assert_eq!(z.diameter(&[at(0), at(1), at(4)]).unwrap(), 4);
    assert_eq!(z.diameter(&[]), Err(SpaceError::EmptySet));
}

#[test]
fn stacked_product_examples() {
    let point = FiniteMetricSpace::from_graph(&["x"], &[]).unwrap();
    let w = stacked_product_window(point, 8).unwrap();
    let s = w.space();
    for a in 0..8 {
        for b in 0..8 {
            assert_eq!(s.dist(a, b), a.abs_diff(b) as u64);
        }
    }
    assert_eq!(w.halo_depth(), 2);
    assert_eq!(w.core().len(), 6);

    let pair = FiniteMetricSpace::from_graph(&["x", "y"], &[("x", "y")]).unwrap();
    let w = stacked_product_window(pair, 8).unwrap();
    let s = w.space();
    let at = |l: &str| s.lookup(l).unwrap();
    assert_eq!(s.dist(at("x@0"), at("y@0")), 1);
    assert_eq!(s.dist(at("x@2"), at("y@3")), 6);
    let ball = s.ball(at("x@0"), 1).unwrap();
    let mut labels: Vec<String> = ball.iter().map(|&p| s.label(p)).collect();
    labels.sort();
    assert_eq!(labels, ["x@0", "x@1", "y@0"]);

    let one = FiniteMetricSpace::from_graph(&["x"], &[]).unwrap();
    assert_eq!(
        stacked_product_window(one, 1).unwrap_err(),
        SpaceError::TooFewLayers(1)
    );
}

#[test]
fn large_graph_uses_breadth_first_search() {
    let n = DENSE_GRAPH_LIMIT + 10;
    let adj: Vec<Vec<Point>> = (0..n)
        .map(|i| {
            let mut v = Vec::new();
            if i > 0 {
                v.push(i - 1);
            }
            if i + 1 < n {
                v.push(i + 1);
            }
            v
        })
        .collect();
    let s = FiniteMetricSpace::from_adjacency(adj);
    assert_eq!(s.dist(0, n - 1), (n - 1) as u64);
    assert_eq!(s.ball(100, 2).unwrap(), vec![98, 99, 100, 101, 102]);
    assert_eq!(s.outer_boundary(&[10, 11], 1).unwrap(), vec![9, 12]);
    assert_eq!(s.diameter(&[3, 40, 7]).unwrap(), 37);
}

#[test]
fn cycle_and_union_metrics() {
    let c = FiniteMetricSpace::cycle(8).unwrap();
    assert_eq!(c.dist(1, 7), 2);
    assert_eq!(c.ball(0, 1).unwrap(), vec![0, 1, 7]);
    assert_eq!(c.full_diameter(), 4);

    let u = FiniteMetricSpace::coarse_disjoint_union(vec![
        FiniteMetricSpace::cycle(2).unwrap(),
        FiniteMetricSpace::cycle(4).unwrap(),
    ]);
    // D_1 = 1 + 1, D_2 = 2 + 2 + 1
    assert_eq!(u.dist(0, 2), 7);
    assert_eq!(u.dist(2, 4), 2);
    assert_eq!(u.label(3), "1:1");
    assert_eq!(u.lookup("1:3").unwrap(), 5);
    assert_eq!(u.ball(0, 7).unwrap(), (0..6).collect::<Vec<_>>());
}

#[test]
fn proximity_components_split_on_gaps() {
    let s = FiniteMetricSpace::integers(vec![0, 1, 5, 6, 7, 20]).unwrap();
    assert_eq!(
        s.proximity_components(1),
        vec![vec![0, 1], vec![2, 3, 4], vec![5]]
    );
    assert_eq!(s.proximity_components(4).len(), 2);
}

#[test]
fn halo_depth_report() {
    let w = interval_window(0, 10, 3);
    assert!(w.halo_within_depth());
    let s = FiniteMetricSpace::integer_interval(0, 10);
    let w = WindowedSpace::new(s, &[0, 1], 2).unwrap();
    assert!(!w.halo_within_depth());
    assert!(!w.is_contaminated(&[0], 1));
    assert!(w.is_contaminated(&[1], 1));
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..14).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec((0..n, 0..n), 0..(2 * n))
                .prop_map(|es| es.into_iter().filter(|(a, b)| a != b).collect()),
        )
    })
}

fn build(n: usize, edges: &[(usize, usize)]) -> FiniteMetricSpace {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    FiniteMetricSpace::from_adjacency(adj)
}

proptest! {
    #[test]
    fn graph_metric_matches_floyd((n, edges) in random_graph()) {
        let s = build(n, &edges);
        let d = floyd(n, &edges);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(s.dist(i, j), d[i][j]);
            }
        }
    }

    #[test]
    fn boundary_matches_definition(
        (n, edges) in random_graph(),
        mask in proptest::collection::vec(any::<bool>(), 14),
        r in 0u64..4,
    ) {
        let s = build(n, &edges);
        let f: Vec<Point> = (0..n).filter(|&i| mask[i]).collect();
        let b = s.outer_boundary(&f, r).unwrap();
        prop_assert_eq!(&b, &brute_boundary(&s, &f, r));
        prop_assert!(b.iter().all(|p| !f.contains(p)));
    }

    #[test]
    fn boundary_monotonicity(
        (n, edges) in random_graph(),
        mask in proptest::collection::vec(0u8..3, 14),
        r in 0u64..3,
        extra in 0u64..3,
    ) {
        let s = build(n, &edges);
        let small: Vec<Point> = (0..n).filter(|&i| mask[i] == 2).collect();
        let big: Vec<Point> = (0..n).filter(|&i| mask[i] >= 1).collect();
        let b_small = s.outer_boundary(&small, r).unwrap();
        let b_big = s.outer_boundary(&big, r).unwrap();
        for p in &b_small {
            prop_assert!(big.contains(p) || b_big.contains(p));
        }
        let wider = s.outer_boundary(&small, r + extra).unwrap();
        for p in &b_small {
            prop_assert!(wider.contains(p));
        }
    }

    #[test]
    fn ball_is_center_plus_boundary((n, edges) in random_graph(), x in 0usize..14, r in 0u64..4) {
        let s = build(n, &edges);
        let x = x % n;
        let mut expected = s.outer_boundary(&[x], r).unwrap();
        expected.push(x);
        expected.sort_unstable();
        prop_assert_eq!(s.ball(x, r).unwrap(), expected);
    }

    #[test]
    fn stacked_metric_triangle_inequality(
        (n, edges) in random_graph(),
        layers in 2usize..6,
        triples in proptest::collection::vec((0usize..100, 0usize..100, 0usize..100), 30),
    ) {
        let s = FiniteMetricSpace::stacked(build(n, &edges), layers).unwrap();
        let len = s.len();
        for (a, b, c) in triples {
            let (a, b, c) = (a % len, b % len, c % len);
            prop_assert!(s.dist(a, c) <= s.dist(a, b) + s.dist(b, c));
            prop_assert_eq!(s.dist(a, b), s.dist(b, a));
            prop_assert_eq!(s.dist(a, b) == 0, a == b);
        }
    }

    #[test]
    fn stacked_balls_match_definition((n, edges) in random_graph(), layers in 2usize..5, r in 0u64..4) {
        let s = FiniteMetricSpace::stacked(build(n, &edges), layers).unwrap();
        for c in s.points() {
            let brute: Vec<Point> = s.points().filter(|&q| s.dist(c, q) <= r).collect();
            prop_assert_eq!(s.ball(c, r).unwrap(), brute);
        }
    }

    #[test]
    fn interval_boundary_is_two_r(start in -500i64..500, len in 1i64..200, r in 0u64..20) {
        let z = FiniteMetricSpace::integer_interval(-1000, 1000);
        let f: Vec<Point> = (start..start + len).map(|v| z.lookup(&v.to_string()).unwrap()).collect();
        prop_assert_eq!(z.outer_boundary(&f, r).unwrap().len() as u64, 2 * r);
    }
}
