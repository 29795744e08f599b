//! Quadratic-Chabauty measures: `μ_F` from endomorphism data, the
//! punctured-curve measure `μ_Z` and Zhang's canonical measure.
//!
//! Pairings `⟨e, c⟩` of an edge with a chain mean the coefficient of `e` in
//! `c`. With this reading `μ_F` has mass `Tr(F|H₁) + ½Σ_v tr_v` and `μ_Z`
//! matches the canonical measure identity on every metric.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GrappaError, Result};
use crate::graph::{GraphPoint, ReductionGraph};
use crate::harmonic::{complementary_resistance, Measure};
use crate::lie::GenKind;
use crate::linalg::Matrix;
use crate::poly::Poly;
use crate::rational::{fmt_q, parse_q, Q};

/// An endomorphism given by its action on `H₁` (in the homology basis) and
/// its traces on the vertex pieces `H(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndomorphismData {
    pub h1: Matrix,
    pub vertex_traces: Vec<Q>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndomorphismFile {
    h1_matrix: Vec<Vec<String>>,
    #[serde(default)]
    vertex_traces: BTreeMap<String, String>,
}

impl EndomorphismData {
    pub fn new(g: &ReductionGraph, h1: Matrix, vertex_traces: Vec<Q>) -> Result<Self> {
        let b = g.first_betti();
        for found in [h1.rows(), h1.cols()] {
            if found != b {
                return Err(GrappaError::DimensionMismatch { expected: b, found });
            }
        }
        if vertex_traces.len() != g.num_vertices() {
            return Err(GrappaError::DimensionMismatch { expected: g.num_vertices(), found: vertex_traces.len() });
        }
        for (v, t) in vertex_traces.iter().enumerate() {
            if g.genus(v) == 0 && !t.is_zero() {
                return Err(GrappaError::Malformed(format!("nonzero trace at genus-0 vertex {:?}", g.vertices()[v].id)));
            }
        }
        Ok(EndomorphismData { h1, vertex_traces })
    }

    /// Identity on `H₁` and on every `H(v)`, so `tr_v = 2g(v)`.
    pub fn identity(g: &ReductionGraph) -> Self {
        EndomorphismData {
            h1: Matrix::identity(g.first_betti()),
            vertex_traces: (0..g.num_vertices()).map(|v| Q::from_integer((2 * g.genus(v)).into())).collect(),
        }
    }

    pub fn parse(g: &ReductionGraph, text: &str) -> Result<Self> {
        let file: EndomorphismFile = serde_json::from_str(text).map_err(|e| GrappaError::Malformed(e.to_string()))?;
        let b = g.first_betti();
        if file.h1_matrix.len() != b {
            return Err(GrappaError::DimensionMismatch { expected: b, found: file.h1_matrix.len() });
        }
        let mut rows = Vec::with_capacity(b);
        for row in &file.h1_matrix {
            if row.len() != b {
                return Err(GrappaError::DimensionMismatch { expected: b, found: row.len() });
            }
            rows.push(row.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>>>()?);
        }
        let mut traces = vec![Q::zero(); g.num_vertices()];
        for (id, t) in &file.vertex_traces {
            let v = g.vertex_index(id).ok_or_else(|| GrappaError::UnknownId(id.clone()))?;
            traces[v] = parse_q(t)?;
        }
        EndomorphismData::new(g, Matrix::from_rows(rows, b), traces)
    }

    pub fn to_value(&self, g: &ReductionGraph) -> serde_json::Value {
        let file = EndomorphismFile {
            h1_matrix: self.h1.to_rows().iter().map(|r| r.iter().map(fmt_q).collect()).collect(),
            vertex_traces: g
                .vertices()
                .iter()
                .zip(&self.vertex_traces)
                .filter(|(_, t)| !t.is_zero())
                .map(|(v, t)| (v.id.clone(), fmt_q(t)))
                .collect(),
        };
        serde_json::to_value(file).expect("endomorphism serialization cannot fail")
    }

    pub fn h1_trace(&self) -> Q {
        (0..self.h1.rows()).map(|i| self.h1.get(i, i).clone()).sum()
    }

    /// Trace on the whole abelianization `H¹ ⊕ H₁ ⊕ ⊕_v H(v)`. `F` acts on
    /// `H¹` by the dual action, so `H₁` is counted twice.
    pub fn total_trace(&self) -> Q {
        self.h1_trace() * Q::from_integer(2.into()) + self.vertex_traces.iter().sum::<Q>()
    }

    pub fn check_trace_zero(&self) -> Result<()> {
        let t = self.total_trace();
        if t.is_zero() {
            Ok(())
        } else {
            Err(GrappaError::NotMassZero(fmt_q(&t)))
        }
    }
}

fn half() -> Q {
    Q::new(1.into(), 2.into())
}

fn vertex_term(m: &mut Measure, traces: &[Q]) {
    for (v, t) in traces.iter().enumerate() {
        m.vertex[v] = t * half();
    }
}

/// `(1/l(e))·coef_e(F(c))` for a cycle `c`.
fn density_of_cycle(g: &ReductionGraph, f: &EndomorphismData, e: usize, cycle: &[Q]) -> Q {
    let hom = g.homology();
    let coords = hom.coords(g, cycle).expect("projection lands in H₁");
    let image = hom.chain_of(&f.h1.mul_vec(&coords));
    &image[e] / g.length(e)
}

/// `μ_F = Σ_e (1/l(e))⟨e, F(π(e))⟩|ds_e| + ½Σ_v tr_v·v`, with `π` the
/// orthogonal projection onto `H₁`.
pub fn mu_f(g: &ReductionGraph, f: &EndomorphismData) -> Result<Measure> {
    EndomorphismData::new(g, f.h1.clone(), f.vertex_traces.clone())?;
    let hom = g.homology();
    let mut m = Measure::zero(g);
    for e in 0..g.num_edges() {
        let mut unit = vec![Q::zero(); g.num_edges()];
        unit[e] = Q::one();
        let (cycle, _) = hom.orth_decompose(g, &unit);
        m.edge[e] = Poly::constant(density_of_cycle(g, f, e, &cycle));
    }
    vertex_term(&mut m, &f.vertex_traces);
    Ok(m)
}

/// On a tree only the vertex traces contribute.
pub fn mu_f_tree(g: &ReductionGraph, f: &EndomorphismData) -> Result<Measure> {
    if g.first_betti() != 0 {
        return Err(GrappaError::WrongShape("tree"));
    }
    EndomorphismData::new(g, f.h1.clone(), f.vertex_traces.clone())?;
    let mut m = Measure::zero(g);
    vertex_term(&mut m, &f.vertex_traces);
    Ok(m)
}

/// Two vertices joined by parallel edges. The loop part of `e` is
/// `e − Σ_{e′} e′/(ν·l(e′))` with `ν = Σ_{e′} 1/l(e′)`, all edges oriented
/// the same way.
pub fn mu_f_banana(g: &ReductionGraph, f: &EndomorphismData) -> Result<Measure> {
    let is_banana = g.num_vertices() == 2 && g.num_edges() >= 2 && g.edges().iter().all(|x| !x.is_loop());
    if !is_banana {
        return Err(GrappaError::WrongShape("banana"));
    }
    EndomorphismData::new(g, f.h1.clone(), f.vertex_traces.clone())?;
    let sign = |e: usize| if g.edges()[e].src == 0 { Q::one() } else { -Q::one() };
    let nu: Q = (0..g.num_edges()).map(|e| g.length(e).recip()).sum();
    let mut m = Measure::zero(g);
    for e in 0..g.num_edges() {
        let mut cycle: Vec<Q> = (0..g.num_edges()).map(|x| -(sign(e) * sign(x)) / (&nu * g.length(x))).collect();
        cycle[e] += Q::one();
        m.edge[e] = Poly::constant(density_of_cycle(g, f, e, &cycle));
    }
    vertex_term(&mut m, &f.vertex_traces);
    Ok(m)
}

/// Zhang's canonical measure `Σ_v (1 − val(v)/2)·v + Σ_e |ds_e|/(l(e) + R_e)`.
/// Valence counts edge ends only; bridges (`R_e = ∞`) carry no density.
pub fn canonical_measure(g: &ReductionGraph) -> Measure {
    let mut m = Measure::zero(g);
    for v in 0..g.num_vertices() {
        m.vertex[v] = Q::one() - Q::from_integer((g.valence(v) as i64).into()) * half();
    }
    for e in 0..g.num_edges() {
        if let Some(r) = complementary_resistance(g, e) {
            m.edge[e] = Poly::constant((g.length(e) + r).recip());
        }
    }
    m
}

/// `g(X) = Σ_v g(v) + b₁`.
pub fn total_genus(g: &ReductionGraph) -> u32 {
    (0..g.num_vertices()).map(|v| g.genus(v)).sum::<u32>() + g.first_betti() as u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturedMeasure {
    pub mu_z: Measure,
    /// `μ_can + ½K − g(X)·e0`, computed independently.
    pub zhang_side: Measure,
}

impl PuncturedMeasure {
    pub fn identity_holds(&self) -> bool {
        self.mu_z == self.zhang_side
    }
}

/// `μ_Z` for a graph with a single half-edge `e0`, together with the
/// canonical-measure side of the identity relating them.
pub fn mu_z_punctured(g: &ReductionGraph) -> Result<PuncturedMeasure> {
    let n = g.half_edges().len();
    if n != 1 {
        return Err(GrappaError::HalfEdgeCount(n));
    }
    let gx = Q::from_integer(total_genus(g).into());
    let hom = g.homology();
    let mut mu_z = Measure::zero(g);
    for e in 0..g.num_edges() {
        let mut unit = vec![Q::zero(); g.num_edges()];
        unit[e] = Q::one();
        let (cycle, _) = hom.orth_decompose(g, &unit);
        mu_z.edge[e] = Poly::constant(&cycle[e] / g.length(e));
    }
    for v in 0..g.num_vertices() {
        mu_z.vertex[v] = Q::from_integer(g.genus(v).into());
    }
    mu_z.half[0] = -gx.clone();

    let mut zhang_side = canonical_measure(g);
    for (p, c) in g.canonical_divisor() {
        if let GraphPoint::Vertex(v) = p {
            zhang_side.vertex[v] += c * half();
        }
    }
    zhang_side.half[0] -= gx;
    Ok(PuncturedMeasure { mu_z, zhang_side })
}

/// The functional on the ambient `(−2, −2)` piece induced by `F`: it sends
/// `[h1_j, estar_i] ↦ F_ij`, `logδ_v ↦ ½tr_v`, and spreads
/// `−(Tr F + ½Σ tr_v)` evenly over the half-edges so that the surface
/// relation is killed. Applied to `μ₂` it recovers `μ_F` plus half-edge masses.
pub fn weight_two_functional(g: &ReductionGraph, f: &EndomorphismData) -> Result<Vec<Q>> {
    EndomorphismData::new(g, f.h1.clone(), f.vertex_traces.clone())?;
    let lie = g.lie();
    let gens = lie.generators();
    let relation_value = f.h1_trace() + f.vertex_traces.iter().sum::<Q>() * half();
    let nh = g.half_edges().len();
    if nh == 0 && !relation_value.is_zero() {
        return Err(GrappaError::NotMassZero(fmt_q(&relation_value)));
    }
    let pair = |a: u8, b: u8| -> Q {
        match (&gens[a as usize].kind, &gens[b as usize].kind) {
            (GenKind::Homology(j), GenKind::Cohomology(i)) => f.h1.get(*i, *j) * half(),
            (GenKind::Cohomology(i), GenKind::Homology(j)) => -(f.h1.get(*i, *j) * half()),
            (
                GenKind::Beta { vertex: v, index: i, primed: p },
                GenKind::Beta { vertex: w, index: k, primed: q },
            ) if v == w && i == k && p != q => {
                let x = &f.vertex_traces[*v] / Q::from_integer((4 * g.genus(*v)).into());
                if *p {
                    x
                } else {
                    -x
                }
            }
            _ => Q::zero(),
        }
    };
    let per_half = if nh == 0 { Q::zero() } else { -relation_value / Q::from_integer((nh as i64).into()) };
    let piece = lie.piece(-2, -2);
    Ok((0..piece.dim())
        .map(|j| {
            piece
                .basis_vector(j)
                .iter()
                .map(|(w, c)| match w.as_slice() {
                    [a] if matches!(gens[*a as usize].kind, GenKind::LogDelta(_)) => c * &per_half,
                    [a, b] => c * pair(*a, *b),
                    _ => Q::zero(),
                })
                .sum()
        })
        .collect())
}

/// `Σ_j φ_j·μ_j` for coordinatewise measures `μ_j`.
pub fn apply_functional(g: &ReductionGraph, phi: &[Q], measures: &[Measure]) -> Measure {
    let mut out = Measure::zero(g);
    for (c, m) in phi.iter().zip(measures) {
        out = &out + &m.scale(c);
    }
    out
}
