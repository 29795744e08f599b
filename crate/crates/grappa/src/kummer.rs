//! The measures `μ_n`, the non-abelian Kummer map `j` and its verification oracles.
//!
//! All intermediate quantities live in ambient quotient coordinates of the
//! `(−r, −2)` piece; results are projected onto `gr^W_{−r} V` at the end.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{GrappaError, Result};
use crate::graph::{GraphPoint, ReductionGraph};
use crate::harmonic::{inv_laplacian, laplacian_op, Measure, PwFunction};
use crate::lie::words::{add_scaled, bracket, letter, WordVec};
use crate::lie::{GenKind, LieAlgebra};
use crate::poly::Poly;
use crate::rational::{factorial, fmt_q, q, Q};

pub const DEFAULT_DEPTH: usize = 4;

fn weight(r: usize) -> i32 {
    -(r as i32)
}

/// `e*` as a Lie element of bidegree `(−1, 0)`.
pub fn estar_element(g: &ReductionGraph, lie: &LieAlgebra, e: usize) -> WordVec {
    lie.cohomology_element(&g.homology().estar(e))
}

/// `logδ_v = Σ_i [betap:v:i, beta:v:i]`.
pub fn log_delta_vertex(g: &ReductionGraph, lie: &LieAlgebra, v: usize) -> WordVec {
    let mut out = WordVec::new();
    for i in 0..g.genus(v) as usize {
        let bp = lie.generator(&GenKind::Beta { vertex: v, index: i, primed: true }).unwrap();
        let bb = lie.generator(&GenKind::Beta { vertex: v, index: i, primed: false }).unwrap();
        add_scaled(&mut out, &bracket(&letter(bp), &letter(bb)), &Q::one());
    }
    out
}

pub fn log_delta_half(lie: &LieAlgebra, h: usize) -> WordVec {
    letter(lie.generator(&GenKind::LogDelta(h)).unwrap())
}

/// `ad_{e*}^k (N(e*))`, an element of bidegree `(−1−k, −2)`.
pub fn ad_power_n_estar(g: &ReductionGraph, lie: &LieAlgebra, e: usize, k: usize) -> WordVec {
    let es = estar_element(g, lie, e);
    let mut x = lie.apply_n_free(&es);
    for _ in 0..k {
        x = bracket(&es, &x);
    }
    x
}

/// Vector-valued objects are stored coordinatewise.
fn measure_from_coords(g: &ReductionGraph, dim: usize, f: impl Fn(&mut Vec<Measure>)) -> Vec<Measure> {
    let mut out = vec![Measure::zero(g); dim];
    f(&mut out);
    out
}

fn apply_to_polys(m: &crate::linalg::Matrix, polys: &[Poly]) -> Vec<Poly> {
    (0..m.rows())
        .map(|i| {
            let mut acc = Poly::zero();
            for (j, p) in polys.iter().enumerate() {
                let c = m.get(i, j);
                if !c.is_zero() && !p.is_zero() {
                    acc = &acc + &p.scale(c);
                }
            }
            acc
        })
        .collect()
}

/// The weight-`r` parts of the Kummer map for one graph, basepoint and depth.
#[derive(Debug, Clone)]
pub struct Kummer {
    graph: ReductionGraph,
    lie: Arc<LieAlgebra>,
    base: GraphPoint,
    depth: usize,
    /// `mu[r][k]`: ambient coordinate `k` of `μ_r`; index 0 unused.
    mu: Vec<Vec<Measure>>,
    /// `j[r][k]`: the potential of `mu[r][k]` vanishing at the basepoint.
    j: Vec<Vec<PwFunction>>,
}

impl Kummer {
    pub fn new(g: &ReductionGraph, base: &GraphPoint, depth: usize) -> Result<Self> {
        if !g.is_semistable() {
            return Err(GrappaError::NotSemistable);
        }
        let lie = g.lie();
        let mut k = Kummer { graph: g.clone(), lie, base: base.clone(), depth, mu: vec![Vec::new()], j: vec![Vec::new()] };
        for r in 1..=depth {
            let mu = k.compute_mu(r);
            let j = mu.iter().map(|m| inv_laplacian(g, m, base)).collect::<Result<Vec<_>>>()?;
            k.mu.push(mu);
            k.j.push(j);
        }
        Ok(k)
    }

    pub fn graph(&self) -> &ReductionGraph {
        &self.graph
    }

    pub fn lie(&self) -> &Arc<LieAlgebra> {
        &self.lie
    }

    pub fn base(&self) -> &GraphPoint {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn check(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.depth {
            return Err(GrappaError::DepthExceeded { n: r, depth: self.depth });
        }
        Ok(())
    }

    fn compute_mu(&self, r: usize) -> Vec<Measure> {
        let g = &self.graph;
        let lie = &self.lie;
        let piece = lie.piece(weight(r), -2);
        let dim = piece.dim();
        if r == 1 {
            return vec![Measure::zero(g); dim];
        }
        if r == 2 {
            return measure_from_coords(g, dim, |out| {
                for e in 0..g.num_edges() {
                    let c = piece.coords(&ad_power_n_estar(g, lie, e, 1));
                    for (k, x) in c.iter().enumerate() {
                        out[k].edge[e] = Poly::constant(-x);
                    }
                }
                for v in 0..g.num_vertices() {
                    let c = piece.coords(&log_delta_vertex(g, lie, v));
                    for (k, x) in c.into_iter().enumerate() {
                        out[k].vertex[v] = x;
                    }
                }
                for h in 0..g.half_edges().len() {
                    let c = piece.coords(&log_delta_half(lie, h));
                    for (k, x) in c.into_iter().enumerate() {
                        out[k].half[h] = x;
                    }
                }
            });
        }
        let hom = g.homology();
        let prev = &self.j[r - 1];
        let prev2 = &self.j[r - 2];
        // ∫ j_{r−2} along each edge, as an ambient vector.
        let integrals: Vec<Vec<Q>> =
            (0..g.num_edges()).map(|e| prev2.iter().map(|f| f.edge[e].integral(g.length(e))).collect()).collect();
        let mut out = vec![Measure::zero(g); dim];
        for e in 0..g.num_edges() {
            let es = hom.estar(e);
            let ad1 = lie.ad_cohomology(&es, weight(r - 1), -2);
            let ad2 = lie.ad_cohomology(&es, weight(r - 2), -2);
            let d1: Vec<Poly> = prev.iter().map(|f| f.edge[e].derivative()).collect();
            let j2: Vec<Poly> = prev2.iter().map(|f| f.edge[e].clone()).collect();
            let mut dens: Vec<Poly> = apply_to_polys(&ad1, &d1).iter().map(|p| p.scale(&q(-2))).collect();
            let second = apply_to_polys(&ad1.mul(&ad2), &j2);
            for (a, b) in dens.iter_mut().zip(&second) {
                *a = &*a + b;
            }
            // − Σ_{e'} λ_{e,e'} ad_{e*} ad_{e'*} ∫ j_{r−2,e'}
            let mut inner = vec![Q::zero(); lie.piece(weight(r - 1), -2).dim()];
            for ep in 0..g.num_edges() {
                let lam = hom.lambda().get(e, ep);
                if lam.is_zero() {
                    continue;
                }
                let adp = lie.ad_cohomology(&hom.estar(ep), weight(r - 2), -2);
                for (acc, x) in inner.iter_mut().zip(adp.mul_vec(&integrals[ep])) {
                    *acc += lam * x;
                }
            }
            let corr = ad1.mul_vec(&inner);
            for (k, p) in dens.into_iter().enumerate() {
                out[k].edge[e] = &p - &Poly::constant(corr[k].clone());
            }
        }
        out
    }

    /// `μ_r` coordinatewise in ambient quotient coordinates of `(−r, −2)`.
    pub fn mu_ambient(&self, r: usize) -> Result<&[Measure]> {
        self.check(r)?;
        Ok(&self.mu[r])
    }

    /// Potentials of `μ_r` vanishing at the basepoint, ambient coordinates.
    pub fn j_ambient(&self, r: usize) -> Result<&[PwFunction]> {
        self.check(r)?;
        Ok(&self.j[r])
    }

    /// `μ_r` in coordinates of the basis of `gr^W_{−r} V`.
    pub fn mu(&self, r: usize) -> Result<Vec<Measure>> {
        self.check(r)?;
        let g = &self.graph;
        let vs = self.lie.v_space(r);
        let amb = &self.mu[r];
        let project = |xs: Vec<Q>| vs.coords(&xs).expect("μ takes values in V");
        let mut out = vec![Measure::zero(g); vs.dim()];
        for e in 0..g.num_edges() {
            let deg = amb.iter().filter_map(|m| m.edge[e].degree()).max();
            let Some(deg) = deg else { continue };
            let mut coeffs: Vec<Vec<Q>> = vec![Vec::new(); vs.dim()];
            for d in 0..=deg {
                let c = project(amb.iter().map(|m| m.edge[e].coeff(d)).collect());
                for (k, x) in c.into_iter().enumerate() {
                    coeffs[k].push(x);
                }
            }
            for (k, c) in coeffs.into_iter().enumerate() {
                out[k].edge[e] = Poly::new(c);
            }
        }
        for v in 0..g.num_vertices() {
            for (k, x) in project(amb.iter().map(|m| m.vertex[v].clone()).collect()).into_iter().enumerate() {
                out[k].vertex[v] = x;
            }
        }
        for h in 0..g.half_edges().len() {
            for (k, x) in project(amb.iter().map(|m| m.half[h].clone()).collect()).into_iter().enumerate() {
                out[k].half[h] = x;
            }
        }
        Ok(out)
    }

    /// `j_{=r}(x)` in ambient coordinates.
    pub fn value_ambient(&self, x: &GraphPoint, r: usize) -> Result<Vec<Q>> {
        self.check(r)?;
        Ok(self.j[r].iter().map(|f| f.eval(x)).collect())
    }

    /// `j_{=r}(x)` in V-coordinates.
    pub fn value(&self, x: &GraphPoint, r: usize) -> Result<Vec<Q>> {
        let amb = self.value_ambient(x, r)?;
        Ok(self.lie.v_space(r).coords(&amb).expect("j takes values in V"))
    }

    /// `(j_{=1}(x), …, j_{=n}(x))` in V-coordinates.
    pub fn values(&self, x: &GraphPoint, n: usize) -> Result<Vec<Vec<Q>>> {
        (1..=n).map(|r| self.value(x, r)).collect()
    }

    /// Per-weight polynomials of `j_{=r}` along edge `e` (stored orientation),
    /// as V-coordinate coefficient vectors indexed `[power][coordinate]`.
    pub fn edge_poly(&self, e: usize, r: usize) -> Result<Vec<Vec<Q>>> {
        self.check(r)?;
        let vs = self.lie.v_space(r);
        let deg = self.j[r].iter().filter_map(|f| f.edge[e].degree()).max().unwrap_or(0);
        Ok((0..=deg).map(|d| vs.coords(&self.j[r].iter().map(|f| f.edge[e].coeff(d)).collect::<Vec<_>>()).expect("V-valued")).collect())
    }

    /// Same as [`Kummer::edge_poly`] along a half-edge.
    pub fn half_edge_poly(&self, h: usize, r: usize) -> Result<Vec<Vec<Q>>> {
        self.check(r)?;
        let vs = self.lie.v_space(r);
        let deg = self.j[r].iter().filter_map(|f| f.half[h].degree()).max().unwrap_or(0);
        Ok((0..=deg).map(|d| vs.coords(&self.j[r].iter().map(|f| f.half[h].coeff(d)).collect::<Vec<_>>()).expect("V-valued")).collect())
    }
}

/// A failed identity, with both sides rendered exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
}

fn render(v: &[Q]) -> String {
    format!("[{}]", v.iter().map(fmt_q).collect::<Vec<_>>().join(", "))
}

fn render_polys(v: &[Poly]) -> String {
    format!("[{}]", v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))
}

#[derive(Debug, Clone, Default)]
pub struct OracleReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn merge(&mut self, other: OracleReport) {
        self.checked += other.checked;
        self.mismatches.extend(other.mismatches);
    }

    pub fn check(&mut self, holds: bool, mismatch: impl FnOnce() -> Mismatch) {
        self.checked += 1;
        if !holds {
            self.mismatches.push(mismatch());
        }
    }

    fn compare_vec(&mut self, identity: impl FnOnce() -> String, lhs: &[Q], rhs: &[Q]) {
        self.checked += 1;
        if lhs != rhs {
            self.mismatches.push(Mismatch { identity: identity(), lhs: render(lhs), rhs: render(rhs) });
        }
    }

    fn compare_polys(&mut self, identity: impl FnOnce() -> String, lhs: &[Poly], rhs: &[Poly]) {
        self.checked += 1;
        if lhs != rhs {
            self.mismatches.push(Mismatch { identity: identity(), lhs: render_polys(lhs), rhs: render_polys(rhs) });
        }
    }
}

/// Checks the differential equations satisfied by `j` up to weight `n`:
/// along edges `j″ − 2 ad j′ + ad² j = ad_{e*} N_b(e*)` with `N_b(e*)`
/// rebuilt from edge integrals, `j_h′ = logδ_h` on half-edges, and
/// `Σ_{s(e)=v} j_e′(0) = −logδ_v` at vertices. Brackets are formed in the
/// free algebra and reduced, independently of the recursion's matrices.
pub fn ode_oracle(k: &Kummer, n: usize) -> Result<OracleReport> {
    k.check(n)?;
    let g = &k.graph;
    let lie = &k.lie;
    let hom = g.homology();
    let mut rep = OracleReport::default();
    let free = |r: usize, coords: &[Q]| lie.piece(weight(r), -2).element(coords);
    let reduce = |r: usize, x: &WordVec| lie.piece(weight(r), -2).coords(x);
    let ad = |es: &WordVec, r: usize, polys: &[Poly]| -> Vec<Poly> {
        // ad_{e*} applied to a polynomial with coefficients in weight r
        let deg = polys.iter().filter_map(Poly::degree).max();
        let dim = lie.piece(weight(r + 1), -2).dim();
        let Some(deg) = deg else { return vec![Poly::zero(); dim] };
        let mut coeffs = vec![Vec::new(); dim];
        for d in 0..=deg {
            let x = free(r, &polys.iter().map(|p| p.coeff(d)).collect::<Vec<_>>());
            for (i, c) in reduce(r + 1, &bracket(es, &x)).into_iter().enumerate() {
                coeffs[i].push(c);
            }
        }
        coeffs.into_iter().map(Poly::new).collect()
    };
    let jpoly = |r: usize, e: usize| -> Vec<Poly> { k.j[r].iter().map(|f| f.edge[e].clone()).collect() };
    for e in 0..g.num_edges() {
        let es = estar_element(g, lie, e);
        for r in 2..=n {
            let mut lhs: Vec<Poly> = jpoly(r, e).iter().map(|p| p.derivative().derivative()).collect();
            let d1: Vec<Poly> = jpoly(r - 1, e).iter().map(Poly::derivative).collect();
            for (a, b) in lhs.iter_mut().zip(ad(&es, r - 1, &d1)) {
                *a = &*a - &b.scale(&q(2));
            }
            if r >= 3 {
                let inner = ad(&es, r - 2, &jpoly(r - 2, e));
                for (a, b) in lhs.iter_mut().zip(ad(&es, r - 1, &inner)) {
                    *a = &*a + &b;
                }
            }
            // N_b(e*) in weight r − 1
            let nb = if r == 2 {
                lie.apply_n_free(&es)
            } else {
                let mut acc = WordVec::new();
                for ep in 0..g.num_edges() {
                    let lam = hom.lambda().get(e, ep);
                    if lam.is_zero() {
                        continue;
                    }
                    let integ: Vec<Q> = k.j[r - 2].iter().map(|f| f.edge[ep].integral(g.length(ep))).collect();
                    let term = bracket(&estar_element(g, lie, ep), &free(r - 2, &integ));
                    add_scaled(&mut acc, &term, lam);
                }
                acc
            };
            let rhs: Vec<Poly> = reduce(r, &bracket(&es, &nb)).into_iter().map(Poly::constant).collect();
            rep.compare_polys(|| format!("edge {} weight {r}: j'' - 2ad j' + ad^2 j = ad N_b(e*)", g.edges()[e].id), &lhs, &rhs);
        }
    }
    for (h, half) in g.half_edges().iter().enumerate() {
        for r in 2..=n {
            let lhs: Vec<Q> = k.j[r].iter().map(|f| f.half[h].coeff(1)).collect();
            let rhs = if r == 2 { reduce(2, &log_delta_half(lie, h)) } else { vec![Q::zero(); lhs.len()] };
            rep.compare_vec(|| format!("half-edge {} weight {r}: j' = logdelta", half.id), &lhs, &rhs);
        }
    }
    for v in 0..g.num_vertices() {
        for r in 2..=n {
            let dim = lie.piece(weight(r), -2).dim();
            let mut lhs = vec![Q::zero(); dim];
            for d in g.out_darts(v) {
                let l = g.length(d.edge);
                for (acc, f) in lhs.iter_mut().zip(&k.j[r]) {
                    let dp = f.edge[d.edge].derivative();
                    if d.forward {
                        *acc += dp.eval(&Q::zero());
                    } else {
                        *acc -= dp.eval(l);
                    }
                }
            }
            for h in g.half_edges_at(v) {
                for (acc, f) in lhs.iter_mut().zip(&k.j[r]) {
                    *acc += f.half[h].coeff(1);
                }
            }
            let rhs = if r == 2 {
                reduce(2, &log_delta_vertex(g, lie, v)).into_iter().map(|x| -x).collect()
            } else {
                vec![Q::zero(); dim]
            };
            rep.compare_vec(|| format!("vertex {} weight {r}: sum of outgoing j' = -logdelta_v", g.vertices()[v].id), &lhs, &rhs);
        }
    }
    Ok(rep)
}

/// Checks `∇² j_{=r} = μ_r`, the degree bounds along edges, bridges and
/// half-edges, and the leading coefficient `((r−1)/r!) ad_{e*}^{r−1} N(e*)`.
pub fn structure_oracle(k: &Kummer, n: usize) -> Result<OracleReport> {
    k.check(n)?;
    let g = &k.graph;
    let lie = &k.lie;
    let hom = g.homology();
    let mut rep = OracleReport::default();
    for r in 1..=n {
        let dim = lie.piece(weight(r), -2).dim();
        for (c, (f, m)) in k.j[r].iter().zip(&k.mu[r]).enumerate() {
            rep.checked += 1;
            if &laplacian_op(g, f) != m {
                rep.mismatches.push(Mismatch {
                    identity: format!("weight {r} coordinate {c}: laplacian of j equals mu"),
                    lhs: format!("{:?}", laplacian_op(g, f).to_value(g)),
                    rhs: format!("{:?}", m.to_value(g)),
                });
            }
            rep.checked += 1;
            if !f.is_continuous(g) {
                rep.mismatches.push(Mismatch { identity: format!("weight {r} coordinate {c}: continuity"), lhs: String::new(), rhs: String::new() });
            }
        }
        for e in 0..g.num_edges() {
            let bridge = hom.estar(e).iter().all(Zero::is_zero);
            let bound = if bridge { 1 } else { r };
            let deg = k.j[r].iter().filter_map(|f| f.edge[e].degree()).max().unwrap_or(0);
            rep.checked += 1;
            if deg > bound {
                rep.mismatches.push(Mismatch {
                    identity: format!("edge {} weight {r}: degree bound", g.edges()[e].id),
                    lhs: deg.to_string(),
                    rhs: bound.to_string(),
                });
            }
            let lead: Vec<Q> = k.j[r].iter().map(|f| f.edge[e].coeff(r)).collect();
            let expected: Vec<Q> = if r == 1 {
                vec![Q::zero(); dim]
            } else {
                let c = q(r as i64 - 1) / factorial(r);
                lie.piece(weight(r), -2).coords(&ad_power_n_estar(g, lie, e, r - 1)).into_iter().map(|x| x * &c).collect()
            };
            rep.compare_vec(|| format!("edge {} weight {r}: leading coefficient", g.edges()[e].id), &lead, &expected);
        }
        for (h, half) in g.half_edges().iter().enumerate() {
            let deg = k.j[r].iter().filter_map(|f| f.half[h].degree()).max().unwrap_or(0);
            rep.checked += 1;
            if deg > 1 {
                rep.mismatches.push(Mismatch { identity: format!("half-edge {} weight {r}: affine", half.id), lhs: deg.to_string(), rhs: "1".into() });
            }
        }
        let zero = vec![Q::zero(); dim];
        if r == 1 {
            for f in &k.j[1] {
                rep.checked += 1;
                if f != &PwFunction::zero(g) {
                    rep.mismatches.push(Mismatch { identity: "weight 1 vanishes".into(), lhs: "nonzero".into(), rhs: render(&zero) });
                }
            }
        }
    }
    Ok(rep)
}

/// The explicit weight-2 potential `g` with `j_{=2}(x) = g(x) − g(b)`, in
/// ambient coordinates: `Σ_e [e*, N e*] s(s−l)/2 + Σ_h logδ_h·s + F(Φ)`
/// where `Φ` solves the Laplacian matrix against the leftover vertex divisor.
pub fn w2_closed_form(g: &ReductionGraph) -> Vec<PwFunction> {
    let lie = g.lie();
    let piece = lie.piece(-2, -2);
    let dim = piece.dim();
    let mut out = vec![PwFunction::zero(g); dim];
    let mut d: Vec<Vec<Q>> = vec![vec![Q::zero(); g.num_vertices()]; dim];
    for e in 0..g.num_edges() {
        let edge = &g.edges()[e];
        let c = piece.coords(&ad_power_n_estar(g, &lie, e, 1));
        let quad = Poly::new(vec![Q::zero(), -&edge.length / q(2), Q::one() / q(2)]);
        for (k, x) in c.iter().enumerate() {
            out[k].edge[e] = quad.scale(x);
            let end = &edge.length * x / q(2);
            d[k][edge.src] -= &end;
            d[k][edge.dst] -= &end;
        }
    }
    for v in 0..g.num_vertices() {
        for (k, x) in piece.coords(&log_delta_vertex(g, &lie, v)).into_iter().enumerate() {
            d[k][v] += x;
        }
    }
    for (h, half) in g.half_edges().iter().enumerate() {
        for (k, x) in piece.coords(&log_delta_half(&lie, h)).into_iter().enumerate() {
            out[k].half[h] = Poly::linear(Q::zero(), x.clone());
            d[k][half.src] += x;
        }
    }
    let lap = g.grounded_laplacian();
    out.into_iter()
        .zip(d)
        .map(|(f, dk)| {
            let phi = lap.solve(&dk);
            &PwFunction::interpolate(g, &phi) + &f
        })
        .collect()
}
