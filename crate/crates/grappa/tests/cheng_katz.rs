mod common;

use common::*;
use grappa::bundled::bundled;
use grappa::cheng_katz::*;
use grappa::rational::{q, qf, Q};
use grappa::{Dart, ReductionGraph};
use num_traits::{One, Zero};
use rand::Rng;

fn random_walk<R: Rng>(rng: &mut R, g: &ReductionGraph, start: usize, len: usize) -> Path {
    let mut p = Vec::new();
    let mut v = start;
    for _ in 0..len {
        let out = g.out_darts(v);
        if out.is_empty() {
            break;
        }
        let d = out[rng.gen_range(0..out.len())];
        v = g.dart_dst(d);
        p.push(d);
    }
    p
}

fn random_word<R: Rng>(rng: &mut R, b: usize, max: usize) -> Vec<usize> {
    let k = rng.gen_range(0..=max);
    (0..k).map(|_| rng.gen_range(0..b)).collect()
}

fn graphs_with_cycles() -> Vec<ReductionGraph> {
    ["loop", "ban3", "figure_eight", "four_cycle", "banana_112"].iter().map(|n| bundled(n).unwrap()).collect()
}

#[test]
fn single_edges_and_backtracks() {
    let g = bundled("ban3").unwrap();
    let e1 = Dart::fwd(0);
    assert_eq!(iterated_integral(&g, &[e1], &[]), q(1));
    // e1 = −(γ₁ + γ₂) in the basis e2 − e1, e3 − e1
    assert_eq!(iterated_integral(&g, &[e1], &[0]), q(-1));
    assert_eq!(iterated_integral(&g, &[e1], &[0, 1]), qf(1, 2));
    for w in words_up_to(2, 3).iter().skip(1) {
        assert!(iterated_integral(&g, &[e1, e1.inverse()], w).is_zero());
    }
    let lp = bundled("loop").unwrap();
    let s = edge_exponential(&lp, 0, 2);
    assert_eq!((s.coeff(&[]), s.coeff(&[0]), s.coeff(&[0, 0])), (&q(1), &q(1), &qf(1, 2)));
    let br = bundled("bridge").unwrap();
    assert!(edge_exponential(&br, 0, 3).is_one());
}

#[test]
fn theta_matches_iterated_integrals() {
    let mut rng = rng(21);
    for g in graphs_with_cycles() {
        let b = g.first_betti();
        for _ in 0..10 {
            let p = random_walk(&mut rng, &g, 0, 5);
            let t = theta(&g, &p, 3);
            for w in words_up_to(b, 3) {
                let rev: Vec<usize> = w.iter().rev().copied().collect();
                assert_eq!(t.coeff(&w), &iterated_integral(&g, &p, &rev));
            }
        }
    }
}

#[test]
fn composition_shuffle_antipode() {
    let mut rng = rng(22);
    for g in graphs_with_cycles() {
        let b = g.first_betti();
        for _ in 0..10 {
            let p = random_walk(&mut rng, &g, 0, 4);
            let end = endpoints(&g, &p).unwrap().map(|x| x.1).unwrap_or(0);
            let p2 = random_walk(&mut rng, &g, end, 4);
            let w = random_word(&mut rng, b, 4);
            let whole = compose(&p, &p2);
            let split: Q = (0..=w.len()).map(|i| iterated_integral(&g, &p2, &w[i..]) * iterated_integral(&g, &p, &w[..i])).sum();
            assert_eq!(iterated_integral(&g, &whole, &w), split);
            let sign = if w.len() % 2 == 0 { q(1) } else { q(-1) };
            let rev: Vec<usize> = w.iter().rev().copied().collect();
            assert_eq!(iterated_integral(&g, &reverse(&p), &w), sign * iterated_integral(&g, &p, &rev));
            let w2 = random_word(&mut rng, b, 2);
            let lhs: Q = shuffle(&w, &w2).iter().map(|(x, c)| c * iterated_integral(&g, &p, x)).sum();
            assert_eq!(lhs, iterated_integral(&g, &p, &w) * iterated_integral(&g, &p, &w2));
        }
    }
}

#[test]
fn nilpotence_on_augmentation_ideal() {
    let mut rng = rng(23);
    for g in graphs_with_cycles() {
        let b = g.first_betti();
        for r in 1..=3 {
            let loops: Vec<PathComb> = (0..r)
                .map(|_| {
                    let i = rng.gen_range(0..b);
                    let mut c = PathComb::new();
                    c.insert(loop_at(&g, 0, i), Q::one());
                    c.insert(Vec::new(), -Q::one());
                    c
                })
                .collect();
            // γ_r ⋯ γ_1 with γ_1 traversed first
            let mut prod = loops[0].clone();
            for l in &loops[1..] {
                prod = comb_compose(&prod, l);
            }
            let w: Vec<usize> = (0..r).map(|_| rng.gen_range(0..b)).collect();
            let expect: Q = (0..r).map(|i| comb_integral(&g, &loops[i], &[w[i]])).product();
            assert_eq!(comb_integral(&g, &prod, &w), expect);
            let shorter = &w[..r - 1];
            assert!(comb_integral(&g, &prod, shorter).is_zero());
        }
    }
}

#[test]
fn duality_ranks() {
    let br = bundled("bridge").unwrap();
    let d = duality_gram(&br, 0, 1, 2);
    assert_eq!((d.rank, d.nonsingular()), (1, true));
    let lp = bundled("loop").unwrap();
    assert_eq!(duality_gram(&lp, 0, 0, 2).rank, 3);
    let ban = bundled("ban3").unwrap();
    assert_eq!(duality_gram(&ban, 0, 0, 1).rank, 3);
    for g in graphs_with_cycles() {
        for depth in 1..=3 {
            let n = g.num_vertices() - 1;
            assert!(duality_gram(&g, 0, n, depth).nonsingular());
        }
    }
}

#[test]
fn canonical_paths_form_a_groupoid() {
    for g in graphs_with_cycles() {
        let n = g.num_vertices();
        let depth = 3;
        let (u, v, w) = (0, n / 2, n - 1);
        assert_eq!(canonical_path(&g, u, u, depth).unwrap(), PathComb::from([(Vec::new(), Q::one())]));
        let uv = canonical_path(&g, u, v, depth).unwrap();
        let vw = canonical_path(&g, v, w, depth).unwrap();
        assert!(theta_comb(&g, &uv, depth).is_one());
        assert!(theta_comb(&g, &comb_reverse(&uv), depth).is_one());
        assert!(theta_comb(&g, &comb_compose(&uv, &vw), depth).is_one());
        for word in words_up_to(g.first_betti(), depth).iter().skip(1) {
            assert!(comb_integral(&g, &comb_compose(&uv, &vw), word).is_zero());
        }
    }
    let br = bundled("bridge").unwrap();
    assert_eq!(canonical_path(&br, 0, 1, 2).unwrap(), PathComb::from([(vec![Dart::fwd(0)], Q::one())]));
}

#[test]
fn canonical_path_along_an_edge() {
    let g = bundled("ban3").unwrap();
    let depth = 3;
    let s = qf(1, 3);
    let (sub, ids) = g.subdivide_all(&[g.edge_point(0, s.clone())]);
    let x = sub.vertex_index(&ids[0]).unwrap();
    let b = 0;
    let first = sub.edge_index("e1.0").unwrap();
    let lhs = canonical_path(&sub, b, x, depth).unwrap();
    let src = sub.edges()[first].src;
    let minus = TensorSeries::exp_linear(&sub.homology().estar(first).iter().map(|c| -c * &s).collect::<Vec<_>>(), depth);
    let corr = preimage(&sub, b, b, &minus).unwrap();
    let to_src = canonical_path(&sub, b, src, depth).unwrap();
    let step = PathComb::from([(vec![Dart::fwd(first)], Q::one())]);
    let rhs = comb_compose(&comb_compose(&corr, &to_src), &step);
    for w in words_up_to(sub.first_betti(), depth) {
        assert_eq!(comb_integral(&sub, &lhs, &w), comb_integral(&sub, &rhs, &w));
    }
}

#[test]
fn monodromy_on_paths_recovers_kummer_map() {
    let mut rng = rng(24);
    for name in ["loop", "ban3", "banana_112", "figure_eight"] {
        let g = bundled(name).unwrap();
        for _ in 0..3 {
            let x = random_point(&mut rng, &g);
            let y = random_point(&mut rng, &g);
            if x == y {
                continue;
            }
            let rep = invariant_paths(&g, &x, &y, 2).unwrap();
            assert!(rep.consistent(), "{name} {x:?} {y:?} {rep:?}");
        }
    }
}

#[test]
fn invariant_paths_on_the_loop_and_banana() {
    let lp = bundled("loop").unwrap();
    let x = lp.edge_point(0, qf(1, 3));
    let y = lp.edge_point(0, qf(2, 3));
    for n in 2..=3 {
        let rep = invariant_paths(&lp, &x, &y, n).unwrap();
        assert!(rep.consistent(), "{rep:?}");
        assert_eq!(rep.kummer_equal, n == 2);
    }
    let ban = bundled("ban3").unwrap();
    let x = ban.edge_point(0, qf(1, 4));
    let y = ban.edge_point(0, qf(3, 4));
    for n in 2..=3 {
        let rep = invariant_paths(&ban, &x, &y, n).unwrap();
        assert!(rep.consistent(), "{rep:?}");
        assert_eq!(rep.kummer_equal, n == 2);
    }
    let z = ban.edge_point(1, qf(1, 4));
    let rep = invariant_paths(&ban, &x, &z, 2).unwrap();
    assert!(rep.consistent() && !rep.kummer_equal);
}
