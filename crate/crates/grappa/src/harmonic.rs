//! Laplacians, piecewise-polynomial measures and functions, height pairings.

use std::ops::{Add, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GrappaError, Result};
use crate::graph::{divisor_degree, Divisor, GraphPoint, ReductionGraph};
use crate::linalg::Matrix;
use crate::poly::Poly;
use crate::rational::{fmt_q, parse_q, Q};

/// A measure with polynomial densities on edges (stored orientation), point
/// masses at vertices and masses at half-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    pub edge: Vec<Poly>,
    pub vertex: Vec<Q>,
    pub half: Vec<Q>,
}

impl Measure {
    pub fn zero(g: &ReductionGraph) -> Self {
        Measure {
            edge: vec![Poly::zero(); g.num_edges()],
            vertex: vec![Q::zero(); g.num_vertices()],
            half: vec![Q::zero(); g.half_edges().len()],
        }
    }

    pub fn dirac(g: &ReductionGraph, v: usize) -> Self {
        let mut m = Measure::zero(g);
        m.vertex[v] = Q::one();
        m
    }

    pub fn total_mass(&self, g: &ReductionGraph) -> Q {
        let dens: Q = self.edge.iter().enumerate().map(|(e, p)| p.integral(g.length(e))).sum();
        dens + self.vertex.iter().sum::<Q>() + self.half.iter().sum::<Q>()
    }

    pub fn scale(&self, c: &Q) -> Measure {
        Measure {
            edge: self.edge.iter().map(|p| p.scale(c)).collect(),
            vertex: self.vertex.iter().map(|x| x * c).collect(),
            half: self.half.iter().map(|x| x * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.edge.iter().all(Poly::is_zero) && self.vertex.iter().all(Zero::is_zero) && self.half.iter().all(Zero::is_zero)
    }

    pub fn parse(g: &ReductionGraph, text: &str) -> Result<Measure> {
        let file: MeasureFile = serde_json::from_str(text).map_err(|e| GrappaError::Malformed(e.to_string()))?;
        let mut m = Measure::zero(g);
        let mut seen = std::collections::HashSet::new();
        let mut fresh = |id: &str| {
            if seen.insert(id.to_string()) {
                Ok(())
            } else {
                Err(GrappaError::DuplicateId(id.to_string()))
            }
        };
        for rec in file.edges {
            fresh(&rec.id)?;
            let e = g.edge_index(&rec.id).ok_or_else(|| GrappaError::UnknownId(rec.id.clone()))?;
            m.edge[e] = Poly::new(rec.density.iter().map(|c| parse_q(c)).collect::<Result<_>>()?);
        }
        for rec in file.vertices {
            fresh(&rec.id)?;
            let v = g.vertex_index(&rec.id).ok_or_else(|| GrappaError::UnknownId(rec.id.clone()))?;
            m.vertex[v] = parse_q(&rec.mass)?;
        }
        for rec in file.half_edges {
            fresh(&rec.id)?;
            let h = g.half_edge_index(&rec.id).ok_or_else(|| GrappaError::UnknownId(rec.id.clone()))?;
            m.half[h] = parse_q(&rec.mass)?;
        }
        Ok(m)
    }

    pub fn to_value(&self, g: &ReductionGraph) -> serde_json::Value {
        let file = MeasureFile {
            edges: g
                .edges()
                .iter()
                .zip(&self.edge)
                .map(|(e, p)| DensityRecord { id: e.id.clone(), density: p.coeffs().iter().map(fmt_q).collect() })
                .collect(),
            vertices: g.vertices().iter().zip(&self.vertex).map(|(v, x)| MassRecord { id: v.id.clone(), mass: fmt_q(x) }).collect(),
            half_edges: g
                .half_edges()
                .iter()
                .zip(&self.half)
                .map(|(h, x)| MassRecord { id: h.id.clone(), mass: fmt_q(x) })
                .collect(),
        };
        serde_json::to_value(file).expect("measure serialization cannot fail")
    }
}

impl Add for &Measure {
    type Output = Measure;
    fn add(self, rhs: &Measure) -> Measure {
        Measure {
            edge: self.edge.iter().zip(&rhs.edge).map(|(a, b)| a + b).collect(),
            vertex: self.vertex.iter().zip(&rhs.vertex).map(|(a, b)| a + b).collect(),
            half: self.half.iter().zip(&rhs.half).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Measure {
    type Output = Measure;
    fn sub(self, rhs: &Measure) -> Measure {
        Measure {
            edge: self.edge.iter().zip(&rhs.edge).map(|(a, b)| a - b).collect(),
            vertex: self.vertex.iter().zip(&rhs.vertex).map(|(a, b)| a - b).collect(),
            half: self.half.iter().zip(&rhs.half).map(|(a, b)| a - b).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    #[serde(default)]
    edges: Vec<DensityRecord>,
    #[serde(default)]
    vertices: Vec<MassRecord>,
    #[serde(default)]
    half_edges: Vec<MassRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRecord {
    id: String,
    density: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MassRecord {
    id: String,
    mass: String,
}

/// A continuous piecewise-polynomial function, affine on half-edges.
///
/// Vertex values are carried explicitly so that graphs without edges are
/// covered; [`PwFunction::is_continuous`] checks they match the edge data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwFunction {
    pub edge: Vec<Poly>,
    pub half: Vec<Poly>,
    pub vertex: Vec<Q>,
}

impl PwFunction {
    pub fn zero(g: &ReductionGraph) -> Self {
        PwFunction {
            edge: vec![Poly::zero(); g.num_edges()],
            half: vec![Poly::zero(); g.half_edges().len()],
            vertex: vec![Q::zero(); g.num_vertices()],
        }
    }

    /// The piecewise-affine interpolation of vertex values, constant on half-edges.
    pub fn interpolate(g: &ReductionGraph, phi: &[Q]) -> Self {
        let edge = g
            .edges()
            .iter()
            .map(|e| Poly::linear(phi[e.src].clone(), (&phi[e.dst] - &phi[e.src]) / &e.length))
            .collect();
        let half = g.half_edges().iter().map(|h| Poly::constant(phi[h.src].clone())).collect();
        PwFunction { edge, half, vertex: phi.to_vec() }
    }

    pub fn eval(&self, p: &GraphPoint) -> Q {
        match p {
            GraphPoint::Vertex(v) => self.vertex[*v].clone(),
            GraphPoint::Edge { edge, s } => self.edge[*edge].eval(s),
            GraphPoint::HalfEdge { half, t } => self.half[*half].eval(t),
        }
    }

    pub fn add_constant(&self, c: &Q) -> PwFunction {
        let k = Poly::constant(c.clone());
        PwFunction {
            edge: self.edge.iter().map(|p| p + &k).collect(),
            half: self.half.iter().map(|p| p + &k).collect(),
            vertex: self.vertex.iter().map(|x| x + c).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> PwFunction {
        PwFunction {
            edge: self.edge.iter().map(|p| p.scale(c)).collect(),
            half: self.half.iter().map(|p| p.scale(c)).collect(),
            vertex: self.vertex.iter().map(|x| x * c).collect(),
        }
    }

    pub fn is_continuous(&self, g: &ReductionGraph) -> bool {
        let edges_ok = g.edges().iter().zip(&self.edge).all(|(e, p)| p.eval(&Q::zero()) == self.vertex[e.src] && p.eval(&e.length) == self.vertex[e.dst]);
        let halves_ok = g.half_edges().iter().zip(&self.half).all(|(h, p)| p.eval(&Q::zero()) == self.vertex[h.src] && p.degree().unwrap_or(0) <= 1);
        edges_ok && halves_ok
    }
}

impl Add for &PwFunction {
    type Output = PwFunction;
    fn add(self, rhs: &PwFunction) -> PwFunction {
        PwFunction {
            edge: self.edge.iter().zip(&rhs.edge).map(|(a, b)| a + b).collect(),
            half: self.half.iter().zip(&rhs.half).map(|(a, b)| a + b).collect(),
            vertex: self.vertex.iter().zip(&rhs.vertex).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &PwFunction {
    type Output = PwFunction;
    fn sub(self, rhs: &PwFunction) -> PwFunction {
        PwFunction {
            edge: self.edge.iter().zip(&rhs.edge).map(|(a, b)| a - b).collect(),
            half: self.half.iter().zip(&rhs.half).map(|(a, b)| a - b).collect(),
            vertex: self.vertex.iter().zip(&rhs.vertex).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `Δ_{uu} = Σ 1/l` over non-loop darts out of `u`, `Δ_{uv} = −Σ 1/l` over darts `u → v`.
pub fn laplacian_matrix(g: &ReductionGraph) -> Matrix {
    let n = g.num_vertices();
    let mut m = Matrix::zeros(n, n);
    for e in g.edges() {
        if e.is_loop() {
            continue;
        }
        let w = e.length.recip();
        m.add_to(e.src, e.src, &w);
        m.add_to(e.dst, e.dst, &w);
        m.add_to(e.src, e.dst, &-&w);
        m.add_to(e.dst, e.src, &-&w);
    }
    m
}

/// The Laplacian matrix with vertex 0 grounded, inverted once per graph.
#[derive(Debug)]
pub struct GroundedLaplacian {
    inv: Matrix,
}

impl GroundedLaplacian {
    pub fn new(g: &ReductionGraph) -> Self {
        let full = laplacian_matrix(g);
        let n = g.num_vertices();
        let mut red = Matrix::zeros(n - 1, n - 1);
        for i in 1..n {
            for j in 1..n {
                red.set(i - 1, j - 1, full.get(i, j).clone());
            }
        }
        let inv = red.inverse().expect("grounded Laplacian of a connected graph is invertible");
        GroundedLaplacian { inv }
    }

    /// The solution of `ΔΦ = D` with `Φ(vertex 0) = 0`; `D` must have degree 0.
    pub fn solve(&self, d: &[Q]) -> Vec<Q> {
        let mut phi = vec![Q::zero()];
        phi.extend(self.inv.mul_vec(&d[1..]));
        phi
    }
}

/// `∇²f = −Σ f_e″|ds_e| − Σ_v (Σ_{s(e)=v} f_e′(0))·v + Σ_h f_h′·h`, the inner sum
/// running over darts and half-edges leaving `v`.
pub fn laplacian_op(g: &ReductionGraph, f: &PwFunction) -> Measure {
    let mut m = Measure::zero(g);
    for (e, edge) in g.edges().iter().enumerate() {
        let d1 = f.edge[e].derivative();
        m.edge[e] = -&d1.derivative();
        m.vertex[edge.src] -= d1.eval(&Q::zero());
        m.vertex[edge.dst] += d1.eval(&edge.length);
    }
    for (h, half) in g.half_edges().iter().enumerate() {
        let slope = f.half[h].coeff(1);
        m.vertex[half.src] -= &slope;
        m.half[h] += slope;
    }
    m
}

/// The preimage of a mass-zero measure under `∇²`, vanishing at `normalize_at`.
///
/// Densities are integrated twice with zero boundary values, half-edge masses
/// become slopes, and the remaining vertex divisor is absorbed by a
/// piecewise-affine solution of the Laplacian matrix.
pub fn inv_laplacian(g: &ReductionGraph, mu: &Measure, normalize_at: &GraphPoint) -> Result<PwFunction> {
    let mass = mu.total_mass(g);
    if !mass.is_zero() {
        return Err(GrappaError::NotMassZero(fmt_q(&mass)));
    }
    let mut d = mu.vertex.clone();
    let mut k = PwFunction::zero(g);
    for (e, edge) in g.edges().iter().enumerate() {
        let big = mu.edge[e].antiderivative().antiderivative();
        let h = &big - &Poly::linear(Q::zero(), big.eval(&edge.length) / &edge.length);
        let dh = h.derivative();
        d[edge.src] -= dh.eval(&Q::zero());
        d[edge.dst] += dh.eval(&edge.length);
        k.edge[e] = -&h;
    }
    for (h, half) in g.half_edges().iter().enumerate() {
        d[half.src] += &mu.half[h];
        k.half[h] = Poly::linear(Q::zero(), mu.half[h].clone());
    }
    let phi = g.grounded_laplacian().solve(&d);
    let f = &PwFunction::interpolate(g, &phi) + &k;
    let c = f.eval(normalize_at);
    Ok(f.add_constant(&-c))
}

/// `∫ f dμ`, with half-edge masses evaluated at the half-edge's source.
pub fn integrate(g: &ReductionGraph, f: &PwFunction, mu: &Measure) -> Q {
    let dens: Q = g.edges().iter().enumerate().map(|(e, edge)| (&f.edge[e] * &mu.edge[e]).integral(&edge.length)).sum();
    let verts: Q = f.vertex.iter().zip(&mu.vertex).map(|(a, b)| a * b).sum();
    let halves: Q = g.half_edges().iter().zip(&mu.half).map(|(h, m)| &f.vertex[h.src] * m).sum();
    dens + verts + halves
}

/// `⟨μ, ν⟩ = ∫ ∇⁻²(μ) dν` on mass-zero measures.
pub fn measure_height(g: &ReductionGraph, mu: &Measure, nu: &Measure) -> Result<Q> {
    let nu_mass = nu.total_mass(g);
    if !nu_mass.is_zero() {
        return Err(GrappaError::NotMassZero(fmt_q(&nu_mass)));
    }
    let f = inv_laplacian(g, mu, &GraphPoint::Vertex(0))?;
    Ok(integrate(g, &f, nu))
}

/// `x ↦ ⟨x − b, μ⟩`, the potential of `μ` vanishing at `b`.
pub fn potential(g: &ReductionGraph, b: &GraphPoint, mu: &Measure) -> Result<PwFunction> {
    inv_laplacian(g, mu, b)
}

fn divisor_on_vertices(sub: &ReductionGraph, ids: &[String], coeffs: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); sub.num_vertices()];
    for (id, c) in ids.iter().zip(coeffs) {
        out[sub.vertex_index(id).expect("subdivision vertex")] += c;
    }
    out
}

/// `⟨D₁, D₂⟩ = D₁ᵀ Δ⁻ D₂` for degree-zero divisors, subdividing at their supports.
pub fn divisor_height(g: &ReductionGraph, d1: &Divisor, d2: &Divisor) -> Result<Q> {
    for d in [d1, d2] {
        let deg = divisor_degree(d);
        if !deg.is_zero() {
            return Err(GrappaError::NotDegreeZero(fmt_q(&deg)));
        }
    }
    let points: Vec<GraphPoint> = d1.keys().chain(d2.keys()).cloned().collect();
    let (sub, ids) = g.subdivide_all(&points);
    let n1 = d1.len();
    let v1 = divisor_on_vertices(&sub, &ids[..n1], &d1.values().cloned().collect::<Vec<_>>());
    let v2 = divisor_on_vertices(&sub, &ids[n1..], &d2.values().cloned().collect::<Vec<_>>());
    let phi = sub.grounded_laplacian().solve(&v2);
    Ok(v1.iter().zip(&phi).map(|(a, b)| a * b).sum())
}

/// `r(p, q) = ⟨p − q, p − q⟩`.
pub fn resistance(g: &ReductionGraph, p: &GraphPoint, q: &GraphPoint) -> Q {
    if p == q {
        return Q::zero();
    }
    let d: Divisor = [(p.clone(), Q::one()), (q.clone(), -Q::one())].into_iter().collect();
    divisor_height(g, &d, &d).expect("difference of points has degree zero")
}

/// `R_e`: the resistance between the endpoints of `e` with `e` deleted, or
/// `None` (infinite) when `e` is a bridge. Loops give `Some(0)`.
pub fn complementary_resistance(g: &ReductionGraph, e: usize) -> Option<Q> {
    let edge = &g.edges()[e];
    if edge.is_loop() {
        return Some(Q::zero());
    }
    let vertices: Vec<(String, u32)> = g.vertices().iter().map(|v| (v.id.clone(), v.genus)).collect();
    let edges: Vec<(String, String, String, Q)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != e)
        .map(|(_, x)| (x.id.clone(), g.vertices()[x.src].id.clone(), g.vertices()[x.dst].id.clone(), x.length.clone()))
        .collect();
    let minus = ReductionGraph::from_parts(vertices, edges, Vec::new()).ok()?;
    Some(resistance(&minus, &GraphPoint::Vertex(edge.src), &GraphPoint::Vertex(edge.dst)))
}
