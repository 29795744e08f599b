//! Shared generators for integration tests.
#![allow(dead_code)]

use grappa::harmonic::Measure;
use grappa::poly::Poly;
use grappa::rational::{qf, Q};
use grappa::{GraphPoint, ReductionGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Q {
    let d = rng.gen_range(1..=max_den);
    let n = rng.gen_range(1..=max_num);
    qf(n, d)
}

/// A random connected stable graph: at most `max_vertices` vertices, first
/// Betti number at most 3, edge lengths with denominators at most 4.
pub fn random_stable_graph<R: Rng>(rng: &mut R, max_vertices: usize) -> ReductionGraph {
    let n = rng.gen_range(1..=max_vertices);
    let mut genus = vec![0u32; n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    let extra = rng.gen_range(0..=3usize);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push((a, b));
    }
    let mut halves: Vec<usize> = Vec::new();
    for _ in 0..rng.gen_range(0..=2usize) {
        halves.push(rng.gen_range(0..n));
    }
    for v in 0..n {
        if rng.gen_bool(0.25) {
            genus[v] = rng.gen_range(1..=2);
        }
    }
    // Raise genus until every vertex is stable.
    for v in 0..n {
        let deg = edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>()
            + halves.iter().filter(|&&h| h == v).count();
        while 2 * genus[v] as usize + deg <= 2 {
            genus[v] += 1;
        }
    }
    let vertices = (0..n).map(|v| (format!("v{v}"), genus[v])).collect();
    let edges = edges
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (format!("e{i}"), format!("v{a}"), format!("v{b}"), small_rational(rng, 4, 4)))
        .collect();
    let halves = halves.iter().enumerate().map(|(i, &v)| (format!("h{i}"), format!("v{v}"))).collect();
    ReductionGraph::from_parts(vertices, edges, halves).expect("generated graph is valid")
}

/// A random rational point: a vertex, an interior edge point or a half-edge point.
pub fn random_point<R: Rng>(rng: &mut R, g: &ReductionGraph) -> GraphPoint {
    loop {
        match rng.gen_range(0..3) {
            0 => return GraphPoint::Vertex(rng.gen_range(0..g.num_vertices())),
            1 if g.num_edges() > 0 => {
                let e = rng.gen_range(0..g.num_edges());
                let d = rng.gen_range(2..=7i64);
                let num = rng.gen_range(1..d);
                let s = qf(num, d) * g.length(e);
                return g.edge_point(e, s);
            }
            2 if !g.half_edges().is_empty() => {
                let h = rng.gen_range(0..g.half_edges().len());
                return g.half_edge_point(h, small_rational(rng, 6, 4)).unwrap();
            }
            _ => {}
        }
    }
}

/// A random mass-zero measure with polynomial densities of degree at most 2.
pub fn random_mass_zero_measure<R: Rng>(rng: &mut R, g: &ReductionGraph) -> Measure {
    let mut m = Measure::zero(g);
    let c = |rng: &mut R| qf(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    for e in 0..g.num_edges() {
        m.edge[e] = Poly::new(vec![c(rng), c(rng), c(rng)]);
    }
    for v in 0..g.num_vertices() {
        m.vertex[v] = c(rng);
    }
    for h in 0..g.half_edges().len() {
        m.half[h] = c(rng);
    }
    let mass = m.total_mass(g);
    m.vertex[0] -= mass;
    m
}

pub fn bundled_graphs() -> Vec<(&'static str, ReductionGraph)> {
    grappa::bundled::all()
}
