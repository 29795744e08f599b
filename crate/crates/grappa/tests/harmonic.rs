mod common;

use common::*;
use grappa::bundled::bundled;
use grappa::harmonic::*;
use grappa::poly::Poly;
use grappa::rational::{q, qf, Q};
use grappa::{Divisor, GraphPoint};
use num_traits::Zero;
use proptest::prelude::*;

fn divisor(pairs: &[(GraphPoint, i64)]) -> Divisor {
    let mut d = Divisor::new();
    for (p, c) in pairs {
        *d.entry(p.clone()).or_insert_with(Q::zero) += q(*c);
    }
    d
}

#[test]
fn banana_heights_and_resistances() {
    let g = bundled("ban3").unwrap();
    let (u, v) = (GraphPoint::Vertex(0), GraphPoint::Vertex(1));
    let lap = laplacian_matrix(&g);
    assert_eq!(lap.to_rows(), vec![vec![q(3), q(-3)], vec![q(-3), q(3)]]);
    let d = divisor(&[(v.clone(), 1), (u.clone(), -1)]);
    assert_eq!(divisor_height(&g, &d, &d).unwrap(), qf(1, 3));
    let x = g.edge_point(0, qf(1, 2));
    let dx = divisor(&[(x, 1), (u.clone(), -1)]);
    assert_eq!(divisor_height(&g, &dx, &d).unwrap(), qf(1, 6));
    assert_eq!(resistance(&g, &u, &v), qf(1, 3));
    assert_eq!(complementary_resistance(&g, 0), Some(qf(1, 2)));
    let mu = &Measure::dirac(&g, 1) - &Measure::dirac(&g, 0);
    assert_eq!(measure_height(&g, &mu, &mu).unwrap(), qf(1, 3));
    let f = potential(&g, &u, &mu).unwrap();
    assert_eq!(f.eval(&v), qf(1, 3));
    assert!(f.edge.iter().all(|p| p.degree().unwrap_or(0) <= 1));
}

#[test]
fn laplacian_of_simple_functions() {
    let g = bundled("loop").unwrap();
    let mut f = PwFunction::zero(&g);
    f.edge[0] = Poly::new(vec![q(0), qf(1, 2), qf(-1, 2)]);
    let m = laplacian_op(&g, &f);
    assert_eq!(m.edge[0], Poly::constant(q(1)));
    assert_eq!(m.vertex[0], q(-1));
    assert!(m.half[0].is_zero());
    assert!(m.total_mass(&g).is_zero());

    let mut f = PwFunction::zero(&g);
    f.half[0] = Poly::x();
    let m = laplacian_op(&g, &f);
    assert_eq!((m.vertex[0].clone(), m.half[0].clone()), (q(-1), q(1)));
}

#[test]
fn circle_green_function() {
    let g = bundled("loop").unwrap();
    let x = g.edge_point(0, qf(1, 2));
    let d = divisor(&[(x.clone(), 1), (GraphPoint::Vertex(0), -1)]);
    assert_eq!(divisor_height(&g, &d, &d).unwrap(), qf(1, 4));
    // ∫ s ds on the loop
    let mut f = PwFunction::zero(&g);
    f.edge[0] = Poly::x();
    let mut ds = Measure::zero(&g);
    ds.edge[0] = Poly::constant(q(1));
    assert_eq!(integrate(&g, &f, &ds), qf(1, 2));
}

#[test]
fn half_edge_direction_is_in_the_kernel() {
    let g = bundled("loop").unwrap();
    let mut hv = Measure::zero(&g);
    hv.half[0] = q(1);
    hv.vertex[0] = q(-1);
    let mut rng = rng(9);
    for _ in 0..3 {
        let nu = random_mass_zero_measure(&mut rng, &g);
        assert!(measure_height(&g, &hv, &nu).unwrap().is_zero());
    }
}

#[test]
fn rejects_massive_measures() {
    let g = bundled("ban3").unwrap();
    assert!(inv_laplacian(&g, &Measure::dirac(&g, 0), &GraphPoint::Vertex(0)).is_err());
    let d = divisor(&[(GraphPoint::Vertex(0), 1)]);
    assert!(divisor_height(&g, &d, &d).is_err());
}

#[test]
fn measure_json() {
    let g = bundled("loop").unwrap();
    let text = r#"{"vertices":[{"id":"v","mass":"-1/2"}],"edges":[{"id":"e","density":["1/2"]}]}"#;
    let m = Measure::parse(&g, text).unwrap();
    assert!(m.total_mass(&g).is_zero());
    assert_eq!(Measure::parse(&g, &m.to_value(&g).to_string()).unwrap(), m);
    assert!(Measure::parse(&g, r#"{"vertices":[{"id":"zz","mass":"1"}]}"#).is_err());
    assert!(Measure::parse(&g, r#"{"vertices":[{"id":"v","mass":"1"},{"id":"v","mass":"1"}]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potential_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_stable_graph(&mut r, 5);
        let mu = random_mass_zero_measure(&mut r, &g);
        let b = random_point(&mut r, &g);
        let f = potential(&g, &b, &mu).unwrap();
        prop_assert!(f.is_continuous(&g));
        prop_assert!(f.eval(&b).is_zero());
        prop_assert_eq!(laplacian_op(&g, &f), mu);
    }

    #[test]
    fn height_pairing_is_symmetric_and_semidefinite(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_stable_graph(&mut r, 5);
        let mu = random_mass_zero_measure(&mut r, &g);
        let nu = random_mass_zero_measure(&mut r, &g);
        prop_assert_eq!(measure_height(&g, &mu, &nu).unwrap(), measure_height(&g, &nu, &mu).unwrap());
        prop_assert!(measure_height(&g, &mu, &mu).unwrap() >= Q::zero());
    }

    #[test]
    fn resistance_identity(seed in any::<u64>()) {
        let g = random_stable_graph(&mut rng(seed), 6);
        for (e, edge) in g.edges().iter().enumerate() {
            if edge.is_loop() { continue; }
            if let Some(big_r) = complementary_resistance(&g, e) {
                let r = resistance(&g, &GraphPoint::Vertex(edge.src), &GraphPoint::Vertex(edge.dst));
                prop_assert_eq!(r.recip(), big_r.recip() + edge.length.recip());
            }
        }
    }

    #[test]
    fn divisor_and_measure_heights_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_stable_graph(&mut r, 4);
        let a = random_point(&mut r, &g);
        let b = random_point(&mut r, &g);
        let d = divisor(&[(a.clone(), 1), (b.clone(), -1)]);
        let h = divisor_height(&g, &d, &d).unwrap();
        prop_assert_eq!(h, resistance(&g, &a, &b));
    }
}
