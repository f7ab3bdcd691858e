use std::collections::BTreeSet;

use gu_core::graph::{bouquet, hexagon_tiling_genus, triangle_tiling, EdgeSpec};
use gu_core::tiling::TileComplex;
use gu_core::{GraphError, WeightedGraph};
use proptest::prelude::*;

fn raw(origin: Vec<usize>, reversal: Vec<usize>, weight: Vec<f64>) -> Result<WeightedGraph, GraphError> {
    let n = origin.len();
    WeightedGraph::from_half_edges(2, origin, reversal, weight, vec![None; n], false)
}

#[test]
fn bouquet_of_four() {
    let r = bouquet(4).unwrap().validate().unwrap();
    assert_eq!((r.vertex_count, r.edge_count, r.loop_count), (1, 4, 4));
    assert_eq!(r.degrees, vec![8]);
    assert!(bouquet(0).is_err());
}

#[test]
fn hexagon_graph_euler_count() {
    for g in 2..=5 {
        let graph = hexagon_tiling_genus(g).unwrap();
        let r = graph.validate().unwrap();
        let faces = 4 * (g - 1);
        // right-angled corners: four tiles at every vertex, two tiles at every edge
        assert_eq!(r.vertex_count, 6 * faces / 4);
        assert_eq!(r.edge_count, 6 * faces / 2);
        assert_eq!(r.vertex_count as i64 - r.edge_count as i64 + faces as i64, 2 - 2 * g as i64);
        assert!(r.degrees.iter().all(|&d| d == 4));
        assert!(r.connected);
    }
    let g2 = hexagon_tiling_genus(2).unwrap();
    assert_eq!((g2.vertex_count(), g2.edge_count()), (6, 12));
    let count = |c: &str| g2.edges().filter(|&e| g2.class(e) == Some(c)).count();
    assert_eq!((count("c"), count("d")), (6, 6));
    assert!(hexagon_tiling_genus(1).is_err());
}

#[test]
fn klein_triangulation_counts() {
    let graph = triangle_tiling(2, 3, 7, 336).unwrap();
    let r = graph.validate().unwrap();
    let (v, e) = (336 / 4 + 336 / 6 + 336 / 14, 336 * 3 / 2);
    assert_eq!((r.vertex_count, r.edge_count), (v, e));
    assert_eq!(v as i64 - e as i64 + 336, -4);
    let degrees: BTreeSet<usize> = r.degrees.iter().copied().collect();
    assert_eq!(degrees, BTreeSet::from([4, 6, 14]));
    let complex = TileComplex::triangles(2, 3, 7, 336).unwrap();
    assert_eq!(complex.euler_characteristic(), -4);
}

#[test]
fn triangle_pair() {
    let graph = triangle_tiling(2, 3, 7, 2).unwrap();
    let classes: BTreeSet<&str> = graph.edges().filter_map(|e| graph.class(e)).collect();
    assert_eq!(classes, BTreeSet::from(["1", "2", "3"]));
    assert_eq!(graph.edge_count(), 3);
    assert!(triangle_tiling(2, 3, 6, 2).is_err());
    assert!(triangle_tiling(3, 3, 3, 2).is_err());
}

#[test]
fn distinct_errors() {
    let cases: Vec<(Result<WeightedGraph, GraphError>, u8)> = vec![
        (WeightedGraph::from_half_edges(0, vec![], vec![], vec![], vec![], false), 1),
        (raw(vec![0, 5], vec![1, 0], vec![1.0, 1.0]), 2),
        (raw(vec![0, 1], vec![1, 7], vec![1.0, 1.0]), 3),
        (raw(vec![0, 1], vec![0, 0], vec![1.0, 1.0]), 4),
        (raw(vec![0, 1, 1], vec![1, 2, 0], vec![1.0, 1.0, 1.0]), 5),
        (raw(vec![0, 1], vec![1, 0], vec![1.0, 2.0]), 6),
        (raw(vec![0, 1], vec![1, 0], vec![-1.0, -1.0]), 7),
        (raw(vec![0, 0], vec![1, 0], vec![1.0, 1.0]), 8),
        (WeightedGraph::from_half_edges(2, vec![0, 1], vec![1, 0], vec![1.0, 1.0], vec![None], false), 9),
    ];
    let mut seen = BTreeSet::new();
    for (i, (r, code)) in cases.into_iter().enumerate() {
        let err = r.expect_err("invalid input accepted");
        assert_eq!(err.code(), code, "case {i}: {err}");
        seen.insert(err.code());
    }
    assert_eq!(seen.len(), 9);
}

#[test]
fn disconnected_graph_when_allowed() {
    let g = WeightedGraph::from_half_edges(3, vec![0, 1], vec![1, 0], vec![1.0, 1.0], vec![None, None], true).unwrap();
    assert!(!g.validate().unwrap().connected);
    assert!(!g.is_connected());
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (1usize..8).prop_flat_map(|n| {
        let extra = prop::collection::vec((0..n, 0..n, 0.1..5.0f64), 0..12);
        (Just(n), extra)
    })
}

proptest! {
    #[test]
    fn stars_partition_half_edges((n, extra) in random_graph()) {
        // a path keeps it connected
        let mut edges: Vec<EdgeSpec> = (1..n).map(|v| EdgeSpec::new(v - 1, v, 1.0)).collect();
        edges.extend(extra.iter().map(|&(a, b, w)| EdgeSpec::new(a, b, w)));
        prop_assume!(!edges.is_empty());
        let g = WeightedGraph::from_edges(n, &edges).unwrap();
        let mut hits = vec![0; g.half_edge_count()];
        let mut total = 0;
        for x in 0..n {
            let star = g.star(x);
            prop_assert_eq!(star.vertex, x);
            for &e in star.edges {
                prop_assert_eq!(g.origin(e), x);
                hits[e] += 1;
            }
            total += g.degree(x);
        }
        prop_assert_eq!(total, g.half_edge_count());
        prop_assert!(hits.iter().all(|&h| h == 1));
        for e in 0..g.half_edge_count() {
            let r = g.reversal(e);
            prop_assert!(r != e);
            prop_assert_eq!(g.reversal(r), e);
            prop_assert_eq!(g.origin(r), g.terminus(e));
            prop_assert_eq!(g.weight(r), g.weight(e));
        }
    }
}
