mod common;

use common::*;
use grappa::bundled::bundled;
use grappa::homology::{boundary, edge_pairing};
use grappa::rational::{q, qf, Q};
use grappa::{GrappaError, GraphPoint, ReductionGraph, Stability};
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn invariants_of_small_graphs() {
    let ban3 = bundled("ban3").unwrap();
    let inv = ban3.invariants();
    assert_eq!((inv.first_betti, inv.total_genus), (2, 2));
    let k = ban3.canonical_divisor();
    assert_eq!(k.get(&GraphPoint::Vertex(0)), Some(&q(1)));
    assert_eq!(k.get(&GraphPoint::Vertex(1)), Some(&q(1)));

    let lp = bundled("loop").unwrap();
    let inv = lp.invariants();
    assert_eq!((inv.first_betti, inv.total_genus, inv.euler_char), (1, 1, -1));
    assert_eq!(lp.stability(), Stability::Stable);

    let br = bundled("bridge").unwrap();
    let inv = br.invariants();
    assert_eq!((inv.first_betti, inv.total_genus), (0, 2));
    assert_eq!(br.canonical_divisor().values().cloned().collect::<Vec<_>>(), vec![q(1), q(1)]);

    assert_eq!(bundled("genus_banana").unwrap().stability(), Stability::Semistable);
}

#[test]
fn rejects_malformed_graphs() {
    let dangling = r#"{"vertices":[{"id":"u"}],"edges":[{"id":"e","src":"u","dst":"w","length":"1"}]}"#;
    assert!(matches!(ReductionGraph::parse(dangling), Err(GrappaError::DanglingEndpoint { .. })));
    let dup = r#"{"vertices":[{"id":"u"},{"id":"u"}]}"#;
    assert!(matches!(ReductionGraph::parse(dup), Err(GrappaError::DuplicateId(_))));
    let disc = r#"{"vertices":[{"id":"u"},{"id":"v"}]}"#;
    assert!(matches!(ReductionGraph::parse(disc), Err(GrappaError::Disconnected)));
    let zero = r#"{"vertices":[{"id":"u"}],"edges":[{"id":"e","src":"u","dst":"u","length":"0"}]}"#;
    assert!(matches!(ReductionGraph::parse(zero), Err(GrappaError::NonPositiveLength(_))));
    let float = r#"{"vertices":[{"id":"u"}],"edges":[{"id":"e","src":"u","dst":"u","length":"0.5"}]}"#;
    assert!(ReductionGraph::parse(float).is_err());
    let extra = r#"{"vertices":[{"id":"u","colour":1}]}"#;
    assert!(ReductionGraph::parse(extra).is_err());
    assert!(matches!(ReductionGraph::parse(r#"{"vertices":[]}"#), Err(GrappaError::Empty)));
}

#[test]
fn parses_points() {
    let g = bundled("ban3").unwrap();
    let e1 = g.edge_index("e1").unwrap();
    assert_eq!(g.parse_point("e1@1/3").unwrap(), GraphPoint::Edge { edge: e1, s: qf(1, 3) });
    assert_eq!(g.parse_point("e1'@1/3").unwrap(), GraphPoint::Edge { edge: e1, s: qf(2, 3) });
    assert_eq!(g.parse_point("e1@0").unwrap(), GraphPoint::Vertex(g.vertex_index("u").unwrap()));
    assert_eq!(g.parse_point("e1@1").unwrap(), GraphPoint::Vertex(g.vertex_index("v").unwrap()));
    assert!(g.parse_point("e1@2").is_err());
    assert!(g.parse_point("e9@1/2").is_err());
    assert!(g.parse_point("e1@x").is_err());
    let lp = bundled("loop").unwrap();
    assert_eq!(lp.parse_point("h@5/2").unwrap(), GraphPoint::HalfEdge { half: 0, t: qf(5, 2) });
    assert!(lp.parse_point("h'@1").is_err());
}

#[test]
fn homology_of_banana() {
    let g = bundled("ban3").unwrap();
    let hom = g.homology();
    assert_eq!(hom.betti(), 2);
    // spanning tree {e1}; classes e2 − e1 and e3 − e1
    assert_eq!(hom.basis()[0], vec![q(-1), q(1), q(0)]);
    assert_eq!(hom.basis()[1], vec![q(-1), q(0), q(1)]);
    for c in hom.basis() {
        assert!(boundary(&g, c).iter().all(Zero::is_zero));
    }
    let a = vec![q(1), q(0), q(-1)];
    let b = vec![q(0), q(1), q(-1)];
    assert_eq!(edge_pairing(&g, &a, &a), q(2));
    assert_eq!(edge_pairing(&g, &a, &b), q(1));
    assert_eq!(hom.n_of_estar(0), vec![qf(2, 3), qf(-1, 3), qf(-1, 3)]);
    let lp = bundled("loop").unwrap();
    assert_eq!(lp.homology().n_of_estar(0), vec![q(1)]);
    assert_eq!(bundled("bridge").unwrap().homology().betti(), 0);
}

#[test]
fn orthogonal_decomposition_of_an_edge() {
    let g = bundled("ban3").unwrap();
    let hom = g.homology();
    let (h, rest) = hom.orth_decompose(&g, &[q(1), q(0), q(0)]);
    assert_eq!(h, hom.n_of_estar(0));
    for c in hom.basis() {
        assert!(edge_pairing(&g, &rest, c).is_zero());
    }
}

#[test]
fn subdivision_preserves_invariants() {
    let mut rng = rng(1);
    for _ in 0..20 {
        let g = random_stable_graph(&mut rng, 5);
        let p = random_point(&mut rng, &g);
        let (sub, id) = g.subdivide(&p);
        assert!(sub.vertex_index(&id).is_some());
        assert_eq!(sub.invariants(), g.invariants());
        let total: Q = g.edges().iter().map(|e| e.length.clone()).sum::<Q>() + if let GraphPoint::HalfEdge { t, .. } = &p { t.clone() } else { Q::zero() };
        assert_eq!(sub.edges().iter().map(|e| e.length.clone()).sum::<Q>(), total);
    }
}

fn arb_graph() -> impl Strategy<Value = ReductionGraph> {
    any::<u64>().prop_map(|seed| random_stable_graph(&mut rng(seed), 6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(g in arb_graph()) {
        let back = ReductionGraph::parse(&g.to_json()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn basis_cycles_are_closed_and_gram_is_positive(g in arb_graph()) {
        let hom = g.homology();
        prop_assert_eq!(hom.betti(), g.first_betti());
        for c in hom.basis() {
            prop_assert!(boundary(&g, c).iter().all(Zero::is_zero));
        }
        prop_assert!(hom.gram().is_symmetric());
        prop_assert!(hom.gram().leading_minors().iter().all(|m| m > &Q::zero()));
    }

    #[test]
    fn point_names_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_stable_graph(&mut r, 5);
        let p = random_point(&mut r, &g);
        prop_assert_eq!(g.parse_point(&g.point_name(&p)).unwrap(), p);
    }
}
