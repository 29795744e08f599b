mod common;

use grappa::bundled::bundled;
use grappa::graph::Stability;
use grappa::kummer::Kummer;
use grappa::ops::{
    biconnected_components, block_decomposition, eliminate_half_edge, exterior_intersection_ranks, functoriality_check,
    injectivity_census, maximal_cut_systems, resistance_reduce, weight2_fiber, Block,
};
use grappa::rational::{q, qf};
use grappa::{GraphPoint, ReductionGraph};
use num_traits::Zero;
use rand::Rng;

fn edge(g: &ReductionGraph, id: &str) -> usize {
    g.edge_index(id).unwrap()
}

fn vertex(g: &ReductionGraph, id: &str) -> usize {
    g.vertex_index(id).unwrap()
}

fn random_points(g: &ReductionGraph, seed: u64, count: usize) -> Vec<GraphPoint> {
    let mut rng = common::rng(seed);
    (0..count).map(|_| common::random_point(&mut rng, g)).collect()
}

fn graph(vertices: &[(&str, u32)], edges: &[(&str, &str, &str, i64, i64)], halves: &[(&str, &str)]) -> ReductionGraph {
    ReductionGraph::from_parts(
        vertices.iter().map(|(v, g)| (v.to_string(), *g)).collect(),
        edges.iter().map(|(e, a, b, n, d)| (e.to_string(), a.to_string(), b.to_string(), qf(*n, *d))).collect(),
        halves.iter().map(|(h, v)| (h.to_string(), v.to_string())).collect(),
    )
    .unwrap()
}

#[test]
fn half_edge_elimination_on_the_loop() {
    let g = bundled("loop").unwrap();
    let red = eliminate_half_edge(&g, 0).unwrap();
    assert_eq!(red.target().stability(), Stability::Semistable);
    assert!(!red.semistability_warning());
    assert!(red.target().half_edges().is_empty());
    assert_eq!(red.map_point(&g.parse_point("h@3/2").unwrap()), GraphPoint::Vertex(0));
    let points = random_points(&g, 11, 10);
    let report = functoriality_check(&red, &GraphPoint::Vertex(0), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);
    assert_eq!(report.checked, 30);
}

#[test]
fn half_edge_elimination_on_other_graphs() {
    let g = bundled("four_cycle").unwrap();
    let red = eliminate_half_edge(&g, 2).unwrap();
    let points = random_points(&g, 12, 10);
    let report = functoriality_check(&red, &g.parse_point("ab@1/2").unwrap(), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);

    let mut rng = common::rng(13);
    let mut tested = 0;
    while tested < 6 {
        let g = common::random_stable_graph(&mut rng, 4);
        if g.half_edges().is_empty() {
            continue;
        }
        let red = eliminate_half_edge(&g, rng.gen_range(0..g.half_edges().len())).unwrap();
        if red.semistability_warning() {
            continue;
        }
        let points = random_points(&g, tested, 4);
        let report = functoriality_check(&red, &GraphPoint::Vertex(0), &points, 3).unwrap();
        assert!(report.ok(), "{}: {:?}", g, report.mismatches);
        tested += 1;
    }
}

#[test]
fn eliminating_from_a_tree_leaves_genus_terms() {
    let g = graph(&[("v1", 1), ("v2", 1)], &[("e", "v1", "v2", 1, 1)], &[("h", "v2")]);
    let red = eliminate_half_edge(&g, 0).unwrap();
    let t = red.target();
    assert_eq!(t.first_betti(), 0);
    let k = Kummer::new(t, &GraphPoint::Vertex(0), 2).unwrap();
    for m in k.mu_ambient(2).unwrap() {
        assert!(m.edge.iter().all(|p| p.is_zero()));
    }
    let mu = k.mu_ambient(2).unwrap();
    // The surface relation forces logδ_{v1} = −logδ_{v2}.
    for m in mu {
        assert_eq!(m.vertex[0], -m.vertex[1].clone());
    }
    assert!(mu.iter().any(|m| !m.vertex[0].is_zero()));
}

#[test]
fn parallel_reduction_of_the_banana() {
    let g = bundled("ban3").unwrap();
    let red = resistance_reduce(&g, &[edge(&g, "e2"), edge(&g, "e3")], vertex(&g, "u"), vertex(&g, "v")).unwrap();
    let t = red.target();
    assert_eq!(t.num_edges(), 2);
    assert_eq!(t.length(edge(t, "e1")), &q(1));
    assert_eq!(t.length(edge(t, "e2")), &qf(1, 2));
    assert_eq!(red.map_point(&g.parse_point("e3@1/2").unwrap()), t.parse_point("e2@1/4").unwrap());
    let points = random_points(&g, 21, 10);
    let report = functoriality_check(&red, &GraphPoint::Vertex(0), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);
    for (a, b) in red.quotient_edge_lengths() {
        assert_eq!(a, b);
    }
}

#[test]
fn series_reduction_of_a_subdivided_loop() {
    let g = bundled("loop").unwrap();
    let (sub, ids) = g.subdivide_all(&[g.parse_point("e@1/3").unwrap(), g.parse_point("e@3/4").unwrap()]);
    // Two consecutive segments through the first new vertex.
    let mid = vertex(&sub, &ids[0]);
    let c: Vec<usize> = (0..sub.num_edges()).filter(|&e| sub.edges()[e].src == mid || sub.edges()[e].dst == mid).collect();
    assert_eq!(c.len(), 2);
    let ends: Vec<usize> = c.iter().map(|&e| { let x = &sub.edges()[e]; if x.src == mid { x.dst } else { x.src } }).collect();
    let red = resistance_reduce(&sub, &c, ends[0], ends[1]).unwrap();
    let total = sub.length(c[0]) + sub.length(c[1]);
    let new = red.target().edges().iter().find(|e| e.id == sub.edges()[c[0]].id.clone().min(sub.edges()[c[1]].id.clone())).unwrap();
    assert_eq!(new.length, total);
    let points = random_points(&sub, 31, 10);
    let report = functoriality_check(&red, &GraphPoint::Vertex(0), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);
    for (a, b) in red.quotient_edge_lengths() {
        assert_eq!(a, b);
    }
}

#[test]
fn reduction_through_a_wheatstone_bridge() {
    // Unbalanced bridge between w0 and w1, closed up by a direct edge.
    let g = graph(
        &[("a", 0), ("b", 0), ("w0", 0), ("w1", 1)],
        &[
            ("c1", "w0", "a", 1, 1),
            ("c2", "w0", "b", 2, 1),
            ("c3", "a", "w1", 1, 2),
            ("c4", "b", "w1", 1, 1),
            ("c5", "a", "b", 1, 3),
            ("d", "w0", "w1", 3, 2),
        ],
        &[("h", "w0")],
    );
    let c: Vec<usize> = ["c1", "c2", "c3", "c4", "c5"].iter().map(|id| edge(&g, id)).collect();
    let red = resistance_reduce(&g, &c, vertex(&g, "w0"), vertex(&g, "w1")).unwrap();
    let levels = red.quotient_edge_lengths();
    assert!(levels.len() >= 2);
    for (a, b) in levels {
        assert_eq!(a, b);
    }
    let points = random_points(&g, 41, 10);
    let report = functoriality_check(&red, &GraphPoint::Vertex(vertex(&g, "w0")), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);
}

#[test]
fn reduction_discards_interior_decorations() {
    let g = graph(
        &[("u", 0), ("v", 0), ("w", 1)],
        &[("e1", "u", "v", 1, 1), ("e2", "u", "v", 2, 1), ("f1", "u", "w", 1, 2), ("f2", "w", "v", 1, 3)],
        &[("hw", "w")],
    );
    let red = resistance_reduce(&g, &[edge(&g, "f1"), edge(&g, "f2")], vertex(&g, "u"), vertex(&g, "v")).unwrap();
    assert_eq!(red.target().num_vertices(), 2);
    assert!(red.target().half_edges().is_empty());
    assert_eq!(red.target().length(edge(red.target(), "f1")), &qf(5, 6));
    let points = random_points(&g, 51, 10);
    let report = functoriality_check(&red, &GraphPoint::Vertex(0), &points, 3).unwrap();
    assert!(report.ok(), "{:?}", report.mismatches);
}

#[test]
fn reduction_rejects_leaky_subgraphs() {
    let g = bundled("four_cycle").unwrap();
    let c = [edge(&g, "ab"), edge(&g, "bc")];
    assert!(resistance_reduce(&g, &c, vertex(&g, "a"), vertex(&g, "b")).is_err());
    assert!(resistance_reduce(&g, &c, vertex(&g, "a"), vertex(&g, "c")).is_ok());
    let g = bundled("ban3").unwrap();
    assert!(resistance_reduce(&g, &[0, 1], 0, 0).is_err());
}

#[test]
fn block_decompositions() {
    let ban3 = bundled("ban3").unwrap();
    let bd = block_decomposition(&ban3);
    assert_eq!(bd.blocks.len(), 1);
    assert!(bd.cutvertices.is_empty());

    let bridge = bundled("bridge").unwrap();
    let bd = block_decomposition(&bridge);
    assert_eq!(bd.blocks.len(), 3);
    assert_eq!(bd.blocks.iter().filter(|b| matches!(b, Block::GenusVertex(_))).count(), 2);
    assert_eq!(bd.blocks.iter().filter(|b| matches!(b, Block::Bridge(_))).count(), 1);
    assert_eq!(bd.cutvertices, vec![0, 1]);

    let fig8 = bundled("figure_eight").unwrap();
    let bd = block_decomposition(&fig8);
    assert_eq!(bd.blocks.len(), 2);
    assert!(bd.blocks.iter().all(|b| matches!(b, Block::Component { edges, .. } if edges.len() == 1)));
    assert_eq!(bd.cutvertices, vec![0]);

    for (name, g) in common::bundled_graphs() {
        assert!(block_decomposition(&g).is_tree(), "{name}");
    }
    let mut rng = common::rng(61);
    for _ in 0..30 {
        let g = common::random_stable_graph(&mut rng, 6);
        let bd = block_decomposition(&g);
        assert!(bd.is_tree(), "{g}");
        for v in 0..g.num_vertices() {
            if g.genus(v) > 0 {
                assert!(bd.is_cutvertex(v));
            }
        }
    }
}

#[test]
fn cut_systems() {
    let ban3 = bundled("ban3").unwrap();
    let cs = maximal_cut_systems(&ban3);
    assert_eq!(cs.len(), 3);
    assert!(cs.iter().all(|c| c.edges.len() == 1));

    assert!(maximal_cut_systems(&bundled("bridge").unwrap()).is_empty());

    // Any two edges of a cycle disconnect it.
    let four = bundled("four_cycle").unwrap();
    let cs = maximal_cut_systems(&four);
    assert_eq!(cs.len(), 1);
    assert_eq!(cs[0].edges.len(), 4);
    assert_eq!(cs[0].length, q(4));

    // A 2-banana attached in series inside a larger cycle splits into
    // the pair's system only when the pair itself disconnects.
    let g = graph(
        &[("a", 0), ("b", 0), ("c", 0)],
        &[("p", "a", "b", 1, 1), ("q", "a", "b", 1, 1), ("r", "b", "c", 1, 1), ("s", "c", "a", 1, 1), ("t", "c", "a", 2, 1)],
        &[],
    );
    let cs = maximal_cut_systems(&g);
    let sizes: Vec<usize> = cs.iter().map(|c| c.edges.len()).collect();
    assert_eq!(sizes.iter().sum::<usize>(), 5);
    assert!(cs.iter().any(|c| c.edges == vec![edge(&g, "r")] || c.edges.contains(&edge(&g, "r"))));

    let mut rng = common::rng(71);
    let mut graphs: Vec<ReductionGraph> = common::bundled_graphs().into_iter().map(|(_, g)| g).collect();
    graphs.extend((0..30).map(|_| common::random_stable_graph(&mut rng, 6)));
    graphs.push(g);
    for g in &graphs {
        let hom = g.homology();
        for c in maximal_cut_systems(g) {
            for (&e, &aligned) in c.edges.iter().zip(&c.aligned) {
                let mut f = hom.estar(e);
                if !aligned {
                    f.iter_mut().for_each(|x| *x = -&*x);
                }
                assert_eq!(f, c.functional);
            }
        }
        let (image, sums, both) = exterior_intersection_ranks(g);
        assert_eq!(image, sums, "{g}");
        assert_eq!(image, both, "{g}");
    }
}

/// A random 2-connected genus-0 graph by ear decomposition.
fn random_two_connected<R: Rng>(rng: &mut R) -> ReductionGraph {
    let k = rng.gen_range(2..=4usize);
    let mut n = k;
    let mut edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let inner = rng.gen_range(0..=2usize);
        let mut prev = a;
        for _ in 0..inner {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, b));
    }
    let vertices = (0..n).map(|v| (format!("v{v}"), 0)).collect();
    let edges = edges
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (format!("e{i}"), format!("v{a}"), format!("v{b}"), common::small_rational(rng, 3, 3)))
        .collect();
    ReductionGraph::from_parts(vertices, edges, Vec::new()).unwrap()
}

#[test]
fn relative_decomposition_has_one_cycle() {
    let mut rng = common::rng(81);
    for _ in 0..40 {
        let g = random_two_connected(&mut rng);
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.src, e.dst)).collect();
        assert_eq!(biconnected_components(g.num_vertices(), &pairs).len(), 1, "{g}");
        for cs in maximal_cut_systems(&g) {
            let rest: Vec<usize> = (0..g.num_edges()).filter(|e| !cs.edges.contains(e)).collect();
            let rest_pairs: Vec<(usize, usize)> = rest.iter().map(|&e| pairs[e]).collect();
            let comps = biconnected_components(g.num_vertices(), &rest_pairs);
            assert!(comps.iter().all(|c| c.len() >= 2), "single edges left after removing a maximal cut system");
            let mut blocks: Vec<Vec<usize>> = comps
                .iter()
                .map(|c| {
                    let mut vs: Vec<usize> = c.iter().flat_map(|&i| [rest_pairs[i].0, rest_pairs[i].1]).collect();
                    vs.sort_unstable();
                    vs.dedup();
                    vs
                })
                .collect();
            blocks.extend(cs.edges.iter().map(|&e| vec![pairs[e].0, pairs[e].1]));
            // Endpoints of the system, plus vertices where two relative blocks meet.
            let mut cut: Vec<usize> = cs.edges.iter().flat_map(|&e| [pairs[e].0, pairs[e].1]).collect();
            cut.extend((0..g.num_vertices()).filter(|v| blocks.iter().filter(|b| b.contains(v)).count() >= 2));
            cut.sort_unstable();
            cut.dedup();
            let incidences: usize = blocks.iter().map(|b| b.iter().filter(|v| cut.contains(v)).count()).sum();
            let nodes = blocks.len() + cut.len();
            // Connected with exactly one independent cycle, and every node of degree two.
            assert_eq!(incidences, nodes, "{g}");
            for v in &cut {
                assert_eq!(blocks.iter().filter(|b| b.contains(v)).count(), 2, "{g}");
            }
            for b in &blocks {
                assert_eq!(b.iter().filter(|v| cut.contains(v)).count(), 2, "{g}");
            }
        }
    }
}

#[test]
fn weight_two_fibres() {
    let ban3 = bundled("ban3").unwrap();
    let x = ban3.parse_point("e1@1/3").unwrap();
    let y = ban3.parse_point("e1@2/3").unwrap();
    let r = weight2_fiber(&ban3, &x, &y).unwrap();
    assert!(r.harmonic_equal && r.kummer_equal);
    let inv = r.witness.unwrap();
    assert_eq!(inv.vertex, vec![1, 0]);
    assert!(inv.edge.iter().enumerate().all(|(e, &(f, same))| e == f && !same));

    let b112 = bundled("banana_112").unwrap();
    let long = (0..3).find(|&e| b112.length(e) == &q(2)).unwrap();
    let x = b112.edge_point(long, qf(1, 2));
    let y = b112.edge_point(long, q(1));
    let r = weight2_fiber(&b112, &x, &y).unwrap();
    assert!(!r.harmonic_equal && !r.kummer_equal && r.witness.is_none());
    let y = b112.edge_point(long, qf(3, 2));
    let r = weight2_fiber(&b112, &x, &y).unwrap();
    assert!(r.harmonic_equal && r.kummer_equal && r.witness.is_some());

    let bridge = bundled("bridge").unwrap();
    for y in ["e@2/3", "v2", "e@1/2"] {
        let r = weight2_fiber(&bridge, &bridge.parse_point("e@1/3").unwrap(), &bridge.parse_point(y).unwrap()).unwrap();
        assert!(!r.kummer_equal && r.consistent(), "{y}");
    }

    assert!(weight2_fiber(&ban3, &x_of(&ban3), &x_of(&ban3)).is_err());
    let semistable = eliminate_half_edge(&bundled("loop").unwrap(), 0).unwrap();
    assert!(weight2_fiber(semistable.target(), &GraphPoint::Vertex(0), &semistable.target().parse_point("e@1/2").unwrap()).is_err());
}

fn x_of(g: &ReductionGraph) -> GraphPoint {
    g.parse_point("e1@1/2").unwrap()
}

#[test]
fn criterion_agrees_with_kummer_on_random_pairs() {
    let mut rng = common::rng(91);
    for (name, g) in common::bundled_graphs() {
        if g.stability() != Stability::Stable {
            continue;
        }
        for _ in 0..6 {
            let x = common::random_point(&mut rng, &g);
            let y = common::random_point(&mut rng, &g);
            if x == y {
                continue;
            }
            let r = weight2_fiber(&g, &x, &y).unwrap();
            assert!(r.consistent(), "{name}: {} {} {:?}", g.point_name(&x), g.point_name(&y), r);
        }
    }
}

#[test]
fn census_on_small_graphs() {
    let lp = bundled("loop").unwrap();
    let r = injectivity_census(&lp, 6, 3).unwrap();
    assert!(r.ok(), "{:?}", r);
    // s ↔ 1 − s for s in {1/6, 1/5, 1/4, 1/3, 2/5}.
    assert_eq!(r.collisions.len(), 5);
    for c in &r.collisions {
        match (&c.x, &c.y) {
            (GraphPoint::Edge { s: a, .. }, GraphPoint::Edge { s: b, .. }) => assert_eq!(a + b, q(1)),
            other => panic!("unexpected collision {other:?}"),
        }
    }

    let ban3 = bundled("ban3").unwrap();
    let r = injectivity_census(&ban3, 6, 3).unwrap();
    assert!(r.ok());
    assert_eq!(r.collisions.len(), 3 * 5 + 1);

    let bridge = bundled("bridge").unwrap();
    let r = injectivity_census(&bridge, 6, 3).unwrap();
    assert!(r.ok());
    assert!(r.collisions.is_empty());
}
