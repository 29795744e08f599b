//! Graph simplifications and the weight-two fibre classification.
//!
//! Two reductions are provided: removing a half-edge and replacing a subgraph
//! between two vertices by a single edge of the effective resistance. Both
//! come with a point map and a pushforward on the Lie algebra so that
//! functoriality of the Kummer map can be tested directly. The rest of the
//! module deals with 2-connected structure: blocks, cut systems, isometric
//! involutions and the census of Kummer collisions on a rational grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{GrappaError, Result};
use crate::graph::{GraphPoint, ReductionGraph, Stability};
use crate::harmonic::{potential, Measure, PwFunction};
use crate::homology::EdgeChain;
use crate::kummer::{Kummer, Mismatch, OracleReport};
use crate::lie::words::{substitute, WordVec};
use crate::lie::GenKind;
use crate::linalg::Matrix;
use crate::rational::{fmt_q, qf, Q};

fn parts(g: &ReductionGraph) -> (Vec<(String, u32)>, Vec<(String, String, String, Q)>, Vec<(String, String)>) {
    let vid = |v: usize| g.vertices()[v].id.clone();
    (
        g.vertices().iter().map(|v| (v.id.clone(), v.genus)).collect(),
        g.edges().iter().map(|e| (e.id.clone(), vid(e.src), vid(e.dst), e.length.clone())).collect(),
        g.half_edges().iter().map(|h| (h.id.clone(), vid(h.src))).collect(),
    )
}

#[derive(Debug, Clone)]
enum PointRule {
    DropHalf(usize),
    Contract {
        /// The contracted subgraph with genus-free vertices and no half-edges.
        inner: ReductionGraph,
        /// `x ↦ ⟨x − w0, w1 − w0⟩` on `inner`.
        height: PwFunction,
        in_c: Vec<bool>,
        interior: Vec<bool>,
        new_edge: usize,
    },
}

/// A reduction `ρ: G → G′` with its point map and Lie pushforward.
#[derive(Debug, Clone)]
pub struct Reduction {
    source: ReductionGraph,
    target: ReductionGraph,
    /// Image in the target's free algebra of each source generator.
    images: Vec<WordVec>,
    rule: PointRule,
}

impl Reduction {
    pub fn source(&self) -> &ReductionGraph {
        &self.source
    }

    pub fn target(&self) -> &ReductionGraph {
        &self.target
    }

    /// Set when the target is not semistable; Kummer maps are then undefined there.
    pub fn semistability_warning(&self) -> bool {
        self.target.stability() == Stability::Neither
    }

    pub fn map_point(&self, p: &GraphPoint) -> GraphPoint {
        let (s, t) = (&self.source, &self.target);
        let vertex = |v: usize| GraphPoint::Vertex(t.vertex_index(&s.vertices()[v].id).expect("surviving vertex"));
        match &self.rule {
            PointRule::DropHalf(h) => match p {
                GraphPoint::HalfEdge { half, .. } if half == h => vertex(s.half_edges()[*h].src),
                _ => self.map_by_id(p),
            },
            PointRule::Contract { inner, height, in_c, interior, new_edge } => {
                let along = |x: Q| t.edge_point(*new_edge, x);
                match p {
                    GraphPoint::Vertex(v) if interior[*v] => along(height.eval(&inner.vertex_point(&s.vertices()[*v].id).unwrap())),
                    GraphPoint::Edge { edge, s: pos } if in_c[*edge] => {
                        let e = inner.edge_index(&s.edges()[*edge].id).unwrap();
                        along(height.eval(&inner.edge_point(e, pos.clone())))
                    }
                    GraphPoint::HalfEdge { half, .. } if interior[s.half_edges()[*half].src] => {
                        let v = &s.vertices()[s.half_edges()[*half].src].id;
                        along(height.eval(&inner.vertex_point(v).unwrap()))
                    }
                    _ => self.map_by_id(p),
                }
            }
        }
    }

    fn map_by_id(&self, p: &GraphPoint) -> GraphPoint {
        let (s, t) = (&self.source, &self.target);
        match p {
            GraphPoint::Vertex(v) => GraphPoint::Vertex(t.vertex_index(&s.vertices()[*v].id).expect("surviving vertex")),
            GraphPoint::Edge { edge, s: pos } => {
                let e = t.edge_index(&s.edges()[*edge].id).expect("surviving edge");
                GraphPoint::Edge { edge: e, s: pos.clone() }
            }
            GraphPoint::HalfEdge { half, t: pos } => {
                let h = t.half_edge_index(&s.half_edges()[*half].id).expect("surviving half-edge");
                GraphPoint::HalfEdge { half: h, t: pos.clone() }
            }
        }
    }

    /// Pushes an element of the source's `(−r, −2)` piece, in ambient
    /// coordinates, to ambient coordinates of the target's piece.
    pub fn push_ambient(&self, r: usize, coords: &[Q]) -> Vec<Q> {
        let w = -(r as i32);
        let x = self.source.lie().piece(w, -2).element(coords);
        self.target.lie().piece(w, -2).coords(&substitute(&x, &self.images))
    }

    /// For a resistance reduction, per segment `e′` of the new edge between
    /// consecutive vertex heights: `(1/l(e′), Σ 1/l(e))` over the pieces of
    /// the subdivided subgraph mapping onto `e′`. Empty for other reductions.
    pub fn quotient_edge_lengths(&self) -> Vec<(Q, Q)> {
        let PointRule::Contract { inner, height, .. } = &self.rule else { return Vec::new() };
        let levels: BTreeSet<Q> = height.vertex.iter().cloned().collect();
        let levels: Vec<Q> = levels.into_iter().collect();
        let mut out = Vec::new();
        for w in levels.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let span = b - a;
            let mut sum = Q::zero();
            for e in inner.edges() {
                let (ha, hb) = (&height.vertex[e.src], &height.vertex[e.dst]);
                let (lo, hi) = if ha < hb { (ha, hb) } else { (hb, ha) };
                if lo <= a && b <= hi && lo != hi {
                    // The piece of `e` over [a, b] has length l·span/|Δh|.
                    let piece = &e.length * &span / (hi - lo);
                    sum += piece.recip();
                }
            }
            out.push((span.recip(), sum));
        }
        out
    }

    /// The free-algebra image of a source element.
    pub fn push_free(&self, x: &WordVec) -> WordVec {
        substitute(x, &self.images)
    }
}

/// Generator images matched by name; missing names map to zero.
fn images_by_name(source: &ReductionGraph, target: &ReductionGraph) -> Vec<WordVec> {
    let tl = target.lie();
    source
        .lie()
        .generators()
        .iter()
        .map(|gen| match tl.generators().iter().position(|x| x.name == gen.name) {
            Some(i) => WordVec::from([(vec![i as u8], Q::one())]),
            None => WordVec::new(),
        })
        .collect()
}

/// Removes half-edge `h`; points on it collapse to its source.
pub fn eliminate_half_edge(g: &ReductionGraph, h: usize) -> Result<Reduction> {
    if h >= g.half_edges().len() {
        return Err(GrappaError::UnknownId(format!("half-edge #{h}")));
    }
    let (vs, es, mut hs) = parts(g);
    hs.remove(h);
    let target = ReductionGraph::from_parts(vs, es, hs)?;
    let images = images_by_name(g, &target);
    Ok(Reduction { source: g.clone(), target, images, rule: PointRule::DropHalf(h) })
}

/// Replaces the subgraph spanned by `c_edges` with one edge from `w0` to `w1`.
///
/// Every vertex of the subgraph other than `w0`, `w1` must have all its edges
/// inside it. Half-edges and genus at such vertices are discarded (their Lie
/// generators map to zero). The new edge takes the smallest id among `c_edges`.
pub fn resistance_reduce(g: &ReductionGraph, c_edges: &[usize], w0: usize, w1: usize) -> Result<Reduction> {
    let bad = |msg: String| GrappaError::InvalidSubgraph(msg);
    if w0 == w1 {
        return Err(bad("boundary vertices coincide".into()));
    }
    let mut in_c = vec![false; g.num_edges()];
    for &e in c_edges {
        if e >= g.num_edges() || in_c[e] {
            return Err(bad(format!("edge #{e} missing or repeated")));
        }
        in_c[e] = true;
    }
    let mut in_vertices = BTreeSet::new();
    for &e in c_edges {
        in_vertices.insert(g.edges()[e].src);
        in_vertices.insert(g.edges()[e].dst);
    }
    if !in_vertices.contains(&w0) || !in_vertices.contains(&w1) {
        return Err(bad("boundary vertices must lie on the subgraph".into()));
    }
    let mut interior = vec![false; g.num_vertices()];
    for &v in &in_vertices {
        if v != w0 && v != w1 {
            interior[v] = true;
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if !in_c[e] && (interior[edge.src] || interior[edge.dst]) {
            return Err(bad(format!("edge {} leaves the subgraph through an interior vertex", edge.id)));
        }
    }
    let vid = |v: usize| g.vertices()[v].id.clone();
    let inner = ReductionGraph::from_parts(
        in_vertices.iter().map(|&v| (vid(v), 0)).collect(),
        c_edges.iter().map(|&e| {
            let x = &g.edges()[e];
            (x.id.clone(), vid(x.src), vid(x.dst), x.length.clone())
        }).collect(),
        Vec::new(),
    )
    .map_err(|e| bad(format!("subgraph is not a valid graph: {e}")))?;
    let iw0 = inner.vertex_index(&vid(w0)).unwrap();
    let iw1 = inner.vertex_index(&vid(w1)).unwrap();
    let unit = &Measure::dirac(&inner, iw1) - &Measure::dirac(&inner, iw0);
    let height = potential(&inner, &GraphPoint::Vertex(iw0), &unit)?;
    let length = height.vertex[iw1].clone();

    let (vs, es, hs) = parts(g);
    let new_id = c_edges.iter().map(|&e| g.edges()[e].id.clone()).min().unwrap();
    let vs = vs.into_iter().enumerate().filter(|(v, _)| !interior[*v]).map(|(_, x)| x).collect();
    let mut es: Vec<_> = es.into_iter().enumerate().filter(|(e, _)| !in_c[*e]).map(|(_, x)| x).collect();
    es.push((new_id.clone(), vid(w0), vid(w1), length.clone()));
    let hs = hs.into_iter().enumerate().filter(|(h, _)| !interior[g.half_edges()[*h].src]).map(|(_, x)| x).collect();
    let target = ReductionGraph::from_parts(vs, es, hs)?;
    let new_edge = target.edge_index(&new_id).unwrap();

    // Edge chains: ρ(e) = (Δh_e / l_C)·e_C on the subgraph, identity elsewhere;
    // the adjoint ι(e_C) = Σ (Δh_e / l_e)·e is the unit current.
    let delta = |e: usize| {
        let ie = inner.edge_index(&g.edges()[e].id).unwrap();
        let x = &inner.edges()[ie];
        &height.vertex[x.dst] - &height.vertex[x.src]
    };
    let push_chain = |c: &[Q]| -> EdgeChain {
        let mut out = vec![Q::zero(); target.num_edges()];
        for (e, x) in c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            if in_c[e] {
                out[new_edge] += x * delta(e) / &length;
            } else {
                out[target.edge_index(&g.edges()[e].id).unwrap()] += x;
            }
        }
        out
    };
    let pull_chain = |c: &[Q]| -> EdgeChain {
        let mut out = vec![Q::zero(); g.num_edges()];
        for (e, x) in g.edges().iter().enumerate() {
            if in_c[e] {
                out[e] = &c[new_edge] * delta(e) / &x.length;
            } else {
                out[e] = c[target.edge_index(&x.id).unwrap()].clone();
            }
        }
        out
    };
    let (sh, th) = (g.homology(), target.homology());
    let (sl, tl) = (g.lie(), target.lie());
    // s(ξ_i) = Σ_j ξ_i(ι γ′_j) ξ′_j
    let pulled: Vec<Vec<Q>> = th
        .basis()
        .iter()
        .map(|gamma| sh.coords(g, &pull_chain(gamma)).ok_or_else(|| GrappaError::Singular("unit current is not closed".into())))
        .collect::<Result<_>>()?;
    let by_name = images_by_name(g, &target);
    let mut images = Vec::with_capacity(sl.generators().len());
    for (k, gen) in sl.generators().iter().enumerate() {
        let img = match gen.kind {
            GenKind::Cohomology(i) => tl.cohomology_element(&pulled.iter().map(|c| c[i].clone()).collect::<Vec<_>>()),
            GenKind::Homology(i) => {
                let c = th.coords(&target, &push_chain(&sh.basis()[i])).ok_or_else(|| GrappaError::Singular("pushed cycle is not closed".into()))?;
                tl.homology_element(&c)
            }
            _ => by_name[k].clone(),
        };
        images.push(img);
    }
    Ok(Reduction {
        source: g.clone(),
        target,
        images,
        rule: PointRule::Contract { inner, height, in_c, interior, new_edge },
    })
}

/// Checks `ρ_*(j_{=r}(x)) = j_{=r}(ρ(x))` for `r ≤ n` with basepoints `b`, `ρ(b)`.
pub fn functoriality_check(red: &Reduction, base: &GraphPoint, points: &[GraphPoint], n: usize) -> Result<OracleReport> {
    let ks = Kummer::new(red.source(), base, n)?;
    let kt = Kummer::new(red.target(), &red.map_point(base), n)?;
    let mut report = OracleReport::default();
    for x in points {
        let y = red.map_point(x);
        for r in 1..=n {
            let lhs = red.push_ambient(r, &ks.value_ambient(x, r)?);
            let rhs = kt.value_ambient(&y, r)?;
            report.checked += 1;
            if lhs != rhs {
                report.mismatches.push(Mismatch {
                    identity: format!("pushforward of j_{r} at {} vs j_{r} at {}", red.source().point_name(x), red.target().point_name(&y)),
                    lhs: render(&lhs),
                    rhs: render(&rhs),
                });
            }
        }
    }
    Ok(report)
}

fn render(v: &[Q]) -> String {
    format!("[{}]", v.iter().map(fmt_q).collect::<Vec<_>>().join(", "))
}

// ----- blocks -----

/// Biconnected components (as edge-index lists) of a multigraph, loops excluded.
/// Works on disconnected inputs; isolated vertices contribute nothing.
pub fn biconnected_components(num_vertices: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    struct Dfs {
        adj: Vec<Vec<(usize, usize)>>,
        disc: Vec<Option<usize>>,
        low: Vec<usize>,
        time: usize,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    impl Dfs {
        fn visit(&mut self, v: usize, parent_edge: Option<usize>) {
            self.disc[v] = Some(self.time);
            self.low[v] = self.time;
            self.time += 1;
            for k in 0..self.adj[v].len() {
                let (w, e) = self.adj[v][k];
                if Some(e) == parent_edge {
                    continue;
                }
                match self.disc[w] {
                    None => {
                        self.stack.push(e);
                        self.visit(w, Some(e));
                        self.low[v] = self.low[v].min(self.low[w]);
                        if self.low[w] >= self.disc[v].unwrap() {
                            let mut comp = Vec::new();
                            while let Some(f) = self.stack.pop() {
                                comp.push(f);
                                if f == e {
                                    break;
                                }
                            }
                            comp.sort_unstable();
                            self.out.push(comp);
                        }
                    }
                    Some(dw) if dw < self.disc[v].unwrap() => {
                        self.stack.push(e);
                        self.low[v] = self.low[v].min(dw);
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let mut adj = vec![Vec::new(); num_vertices];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
    }
    let mut dfs = Dfs { adj, disc: vec![None; num_vertices], low: vec![0; num_vertices], time: 0, stack: Vec::new(), out: Vec::new() };
    for v in 0..num_vertices {
        if dfs.disc[v].is_none() {
            dfs.visit(v, None);
        }
    }
    let mut out = dfs.out;
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    /// A maximal 2-connected subgraph (a single loop, or loopless).
    Component { vertices: Vec<usize>, edges: Vec<usize> },
    Bridge(usize),
    HalfEdge(usize),
    GenusVertex(usize),
}

impl Block {
    pub fn vertices(&self, g: &ReductionGraph) -> Vec<usize> {
        match self {
            Block::Component { vertices, .. } => vertices.clone(),
            Block::Bridge(e) => {
                let x = &g.edges()[*e];
                vec![x.src.min(x.dst), x.src.max(x.dst)]
            }
            Block::HalfEdge(h) => vec![g.half_edges()[*h].src],
            Block::GenusVertex(v) => vec![*v],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub cutvertices: Vec<usize>,
    /// `(block, cutvertex)` incidences, both as indices into the lists above.
    pub incidence: Vec<(usize, usize)>,
}

impl BlockDecomposition {
    /// Whether the bipartite block–cutvertex graph is a tree.
    pub fn is_tree(&self) -> bool {
        let n = self.blocks.len() + self.cutvertices.len();
        self.incidence.len() + 1 == n && connected(n, self.incidence.iter().map(|&(b, c)| (b, self.blocks.len() + c)))
    }

    /// Indices of the 2-connected components containing `p`.
    pub fn components_of(&self, p: &GraphPoint) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| match (b, p) {
                (Block::Component { edges, .. }, GraphPoint::Edge { edge, .. }) => edges.contains(edge),
                (Block::Component { vertices, .. }, GraphPoint::Vertex(v)) => vertices.contains(v),
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_cutvertex(&self, v: usize) -> bool {
        self.cutvertices.binary_search(&v).is_ok()
    }
}

fn connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    if n == 0 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut parts = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            parts -= 1;
        }
    }
    parts == 1
}

pub fn block_decomposition(g: &ReductionGraph) -> BlockDecomposition {
    let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.src, e.dst)).collect();
    let mut blocks = Vec::new();
    for comp in biconnected_components(g.num_vertices(), &pairs) {
        if comp.len() == 1 {
            blocks.push(Block::Bridge(comp[0]));
        } else {
            let vertices: BTreeSet<usize> = comp.iter().flat_map(|&e| [pairs[e].0, pairs[e].1]).collect();
            blocks.push(Block::Component { vertices: vertices.into_iter().collect(), edges: comp });
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if edge.is_loop() {
            blocks.push(Block::Component { vertices: vec![edge.src], edges: vec![e] });
        }
    }
    blocks.extend((0..g.half_edges().len()).map(Block::HalfEdge));
    blocks.extend((0..g.num_vertices()).filter(|&v| g.genus(v) > 0).map(Block::GenusVertex));
    let mut count = vec![0usize; g.num_vertices()];
    for b in &blocks {
        if !matches!(b, Block::GenusVertex(_)) {
            for v in b.vertices(g) {
                count[v] += 1;
            }
        }
    }
    let cutvertices: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.genus(v) > 0 || count[v] >= 2).collect();
    let mut incidence = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        for v in b.vertices(g) {
            if let Ok(c) = cutvertices.binary_search(&v) {
                incidence.push((i, c));
            }
        }
    }
    BlockDecomposition { blocks, cutvertices, incidence }
}

// ----- cut systems -----

/// A maximal cut system: non-bridge edges sharing `e*` up to sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSystem {
    pub edges: Vec<usize>,
    /// `true` when the edge's stored orientation has `e* = functional`.
    pub aligned: Vec<bool>,
    /// The common `e*`, normalized so its first nonzero coordinate is positive.
    pub functional: Vec<Q>,
    pub length: Q,
}

pub fn maximal_cut_systems(g: &ReductionGraph) -> Vec<CutSystem> {
    let hom = g.homology();
    let mut classes: BTreeMap<Vec<Q>, CutSystem> = BTreeMap::new();
    for e in 0..g.num_edges() {
        let mut f = hom.estar(e);
        let Some(first) = f.iter().find(|x| !x.is_zero()) else { continue };
        let aligned = first.is_positive();
        if !aligned {
            f.iter_mut().for_each(|x| *x = -&*x);
        }
        let entry = classes.entry(f.clone()).or_insert_with(|| CutSystem { edges: Vec::new(), aligned: Vec::new(), functional: f, length: Q::zero() });
        entry.edges.push(e);
        entry.aligned.push(aligned);
        entry.length += g.length(e);
    }
    let mut out: Vec<CutSystem> = classes.into_values().collect();
    out.sort_by_key(|c| c.edges[0]);
    out
}

/// Ranks `(image, cut systems, both)` where `image` is spanned by the
/// exterior intersections `Σ_e e*(γ_i) e*(γ_j)·e` and the cut systems by
/// their formal sums. The two spans agree when all three ranks coincide.
pub fn exterior_intersection_ranks(g: &ReductionGraph) -> (usize, usize, usize) {
    let hom = g.homology();
    let basis = hom.basis();
    let mut image = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            image.push(basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).collect::<Vec<Q>>());
        }
    }
    let sums: Vec<Vec<Q>> = maximal_cut_systems(g)
        .iter()
        .map(|c| (0..g.num_edges()).map(|e| if c.edges.contains(&e) { Q::one() } else { Q::zero() }).collect())
        .collect();
    let rank = |rows: &[Vec<Q>]| if rows.is_empty() { 0 } else { Matrix::from_rows(rows.to_vec(), g.num_edges()).rank() };
    let both: Vec<Vec<Q>> = image.iter().chain(&sums).cloned().collect();
    (rank(&image), rank(&sums), rank(&both))
}

// ----- involutions -----

/// An isometric involution of one 2-connected component, extended by the
/// identity to the rest of the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    pub block: usize,
    pub vertex: Vec<usize>,
    /// `edge[e] = (e′, same)`: the point at distance `s` from the stored
    /// source of `e` goes to distance `s` (or `l − s` if not `same`) on `e′`.
    pub edge: Vec<(usize, bool)>,
}

impl Involution {
    pub fn apply(&self, g: &ReductionGraph, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => GraphPoint::Vertex(self.vertex[*v]),
            GraphPoint::Edge { edge, s } => {
                let (e, same) = self.edge[*edge];
                g.edge_point(e, if same { s.clone() } else { g.length(e) - s })
            }
            other => other.clone(),
        }
    }

    /// A readable description listing moved vertices and edges.
    pub fn describe(&self, g: &ReductionGraph) -> String {
        let mut parts = Vec::new();
        for (v, &w) in self.vertex.iter().enumerate() {
            if v < w {
                parts.push(format!("{}<->{}", g.vertices()[v].id, g.vertices()[w].id));
            }
        }
        for (e, &(f, same)) in self.edge.iter().enumerate() {
            if e == f && !same {
                parts.push(format!("{} reversed", g.edges()[e].id));
            } else if e < f {
                let arrow = if same { "<->" } else { "<->'" };
                parts.push(format!("{}{arrow}{}", g.edges()[e].id, g.edges()[f].id));
            }
        }
        parts.join(", ")
    }
}

fn involutive_vertex_maps(verts: &[usize], movable: &dyn Fn(usize, usize) -> bool, n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, verts: &[usize], map: &mut Vec<Option<usize>>, movable: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<usize>>) {
        let Some(&v) = verts[i..].iter().find(|&&v| map[v].is_none()) else {
            out.push(map.iter().enumerate().map(|(k, x)| x.unwrap_or(k)).collect());
            return;
        };
        map[v] = Some(v);
        go(i, verts, map, movable, out);
        for &w in verts {
            if w != v && map[w].is_none() && movable(v, w) {
                map[v] = Some(w);
                map[w] = Some(v);
                go(i, verts, map, movable, out);
                map[w] = None;
            }
        }
        map[v] = None;
    }
    let mut out = Vec::new();
    go(0, verts, &mut vec![None; n], movable, &mut out);
    out
}

/// Involutive permutations of `0..n` (as `perm[i]`).
fn matchings(n: usize) -> Vec<Vec<usize>> {
    fn go(map: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = map.iter().position(Option::is_none) else {
            out.push(map.iter().map(|x| x.unwrap()).collect());
            return;
        };
        map[i] = Some(i);
        go(map, out);
        for j in i + 1..map.len() {
            if map[j].is_none() {
                map[i] = Some(j);
                map[j] = Some(i);
                go(map, out);
                map[j] = None;
            }
        }
        map[i] = None;
    }
    let mut out = Vec::new();
    go(&mut vec![None; n], &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// All isometric, genus-preserving involutions of component `block` that fix
/// the graph's cutvertices and whose quotient is a tree.
pub fn component_involutions(g: &ReductionGraph, bd: &BlockDecomposition, block: usize) -> Vec<Involution> {
    let Block::Component { vertices, edges } = &bd.blocks[block] else { return Vec::new() };
    let incident_lengths = |v: usize| {
        let mut ls: Vec<Q> = Vec::new();
        for &e in edges {
            let x = &g.edges()[e];
            if x.src == v {
                ls.push(x.length.clone());
            }
            if x.dst == v {
                ls.push(x.length.clone());
            }
        }
        ls.sort();
        ls
    };
    let signature: HashMap<usize, (u32, Vec<Q>)> = vertices.iter().map(|&v| (v, (g.genus(v), incident_lengths(v)))).collect();
    let movable = |a: usize, b: usize| !bd.is_cutvertex(a) && !bd.is_cutvertex(b) && signature[&a] == signature[&b];
    let key = |e: usize, pi: &[usize]| {
        let x = &g.edges()[e];
        let (a, b) = (pi[x.src], pi[x.dst]);
        (a.min(b), a.max(b), x.length.clone())
    };
    let ident: Vec<usize> = (0..g.num_vertices()).collect();
    let mut out = Vec::new();
    for pi in involutive_vertex_maps(vertices, &movable, g.num_vertices()) {
        let mut groups: BTreeMap<(usize, usize, Q), Vec<usize>> = BTreeMap::new();
        for &e in edges {
            groups.entry(key(e, &ident)).or_default().push(e);
        }
        // Per group, candidate edge maps (as lists of (e, e′) pairs).
        let mut choices: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
        let mut ok = true;
        for (k, members) in &groups {
            let a = pi[k.0];
            let b = pi[k.1];
            let image_key = (a.min(b), a.max(b), k.2.clone());
            let Some(images) = groups.get(&image_key) else {
                ok = false;
                break;
            };
            if images.len() != members.len() {
                ok = false;
                break;
            }
            if &image_key == k {
                choices.push(matchings(members.len()).into_iter().map(|m| m.iter().enumerate().map(|(i, &j)| (members[i], members[j])).collect()).collect());
            } else if k < &image_key {
                choices.push(
                    permutations(members.len())
                        .into_iter()
                        .map(|p| p.iter().enumerate().flat_map(|(i, &j)| [(members[i], images[j]), (images[j], members[i])]).collect())
                        .collect(),
                );
            }
        }
        if !ok {
            continue;
        }
        let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for c in &choices {
            combos = combos.iter().flat_map(|base| c.iter().map(move |x| base.iter().chain(x).copied().collect())).collect();
        }
        for combo in combos {
            let map: BTreeMap<usize, usize> = combo.into_iter().collect();
            // Orientation is forced except for loops, which may be flipped.
            let loops: Vec<usize> = map.iter().filter(|(&e, &f)| g.edges()[e].is_loop() && e <= f).map(|(&e, _)| e).collect();
            for mask in 0..(1u32 << loops.len()) {
                let mut edge_map: Vec<(usize, bool)> = (0..g.num_edges()).map(|e| (e, true)).collect();
                for (&e, &f) in &map {
                    let x = &g.edges()[e];
                    let same = if x.is_loop() {
                        let i = loops.iter().position(|&l| l == e.min(f)).unwrap();
                        mask & (1 << i) == 0
                    } else {
                        pi[x.src] == g.edges()[f].src
                    };
                    edge_map[e] = (f, same);
                }
                let inv = Involution { block, vertex: pi.clone(), edge: edge_map };
                if quotient_is_tree(vertices, edges, &inv) {
                    out.push(inv);
                }
            }
        }
    }
    out
}

fn quotient_is_tree(vertices: &[usize], edges: &[usize], inv: &Involution) -> bool {
    let vertex_orbits = vertices.iter().filter(|&&v| inv.vertex[v] >= v).count();
    let flipped = edges.iter().filter(|&&e| inv.edge[e] == (e, false)).count();
    let edge_orbits = edges.iter().filter(|&&e| inv.edge[e].0 >= e).count();
    edge_orbits + 1 == vertex_orbits + flipped
}

/// An involution of a common 2-connected component exchanging `x` and `y`.
pub fn find_involution(g: &ReductionGraph, bd: &BlockDecomposition, x: &GraphPoint, y: &GraphPoint) -> Option<Involution> {
    let cy = bd.components_of(y);
    bd.components_of(x)
        .into_iter()
        .filter(|b| cy.contains(b))
        .flat_map(|b| component_involutions(g, bd, b))
        .find(|inv| &inv.apply(g, x) == y)
}

// ----- weight-two fibres -----

/// The harmonic criterion for `j_{≤2}(x) = j_{≤2}(y)`: with `∇²Φ = y − x`, the
/// averages of `Φ` over every maximal cut system and its values at half-edge
/// sources and positive-genus vertices all coincide.
pub fn harmonic_criterion(g: &ReductionGraph, x: &GraphPoint, y: &GraphPoint) -> bool {
    let (sub, ids) = g.subdivide_all(&[x.clone(), y.clone()]);
    let mut d = vec![Q::zero(); sub.num_vertices()];
    d[sub.vertex_index(&ids[1]).unwrap()] += Q::one();
    d[sub.vertex_index(&ids[0]).unwrap()] -= Q::one();
    let phi = sub.grounded_laplacian().solve(&d);
    let mut values: Vec<Q> = Vec::new();
    for c in maximal_cut_systems(&sub) {
        let total: Q = c
            .edges
            .iter()
            .map(|&e| {
                let x = &sub.edges()[e];
                &x.length * (&phi[x.src] + &phi[x.dst]) / Q::from_integer(2.into())
            })
            .sum();
        values.push(total / &c.length);
    }
    values.extend(sub.half_edges().iter().map(|h| phi[h.src].clone()));
    values.extend((0..sub.num_vertices()).filter(|&v| sub.genus(v) > 0).map(|v| phi[v].clone()));
    values.windows(2).all(|w| w[0] == w[1])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberReport {
    pub harmonic_equal: bool,
    pub kummer_equal: bool,
    pub witness: Option<Involution>,
}

impl FiberReport {
    /// Criterion, direct computation and involution search all agree.
    pub fn consistent(&self) -> bool {
        self.harmonic_equal == self.kummer_equal && self.kummer_equal == self.witness.is_some()
    }
}

/// Decides `j_{≤2}(x) = j_{≤2}(y)` on a stable graph three ways.
pub fn weight2_fiber(g: &ReductionGraph, x: &GraphPoint, y: &GraphPoint) -> Result<FiberReport> {
    if g.stability() != Stability::Stable {
        return Err(GrappaError::NotStable);
    }
    if x == y {
        return Err(GrappaError::SamePoint);
    }
    let k = Kummer::new(g, x, 2)?;
    let kummer_equal = (1..=2).all(|r| k.value_ambient(y, r).map(|v| v.iter().all(Zero::is_zero)).unwrap_or(false));
    let bd = block_decomposition(g);
    Ok(FiberReport { harmonic_equal: harmonic_criterion(g, x, y), kummer_equal, witness: find_involution(g, &bd, x, y) })
}

#[derive(Debug, Clone)]
pub struct Collision {
    pub x: GraphPoint,
    pub y: GraphPoint,
    pub witness: Option<Involution>,
}

#[derive(Debug, Clone)]
pub struct CensusReport {
    pub points: Vec<GraphPoint>,
    pub j1_constant: bool,
    /// Pairs with equal `j_{≤2}`, each with the involution exchanging them.
    pub collisions: Vec<Collision>,
    /// Pairs exchanged by a qualifying involution whose `j_{≤2}` differ.
    pub missed: Vec<(GraphPoint, GraphPoint)>,
    /// Pairs with equal `j_{≤n}` for the requested `n ≥ 3`.
    pub higher_collisions: Vec<(GraphPoint, GraphPoint)>,
}

impl CensusReport {
    pub fn ok(&self) -> bool {
        self.j1_constant && self.collisions.iter().all(|c| c.witness.is_some()) && self.missed.is_empty() && self.higher_collisions.is_empty()
    }
}

/// Vertices, edge points at `l·p/q` and half-edge points at `p/q ≤ 1`, `q ≤ denominator`.
pub fn rational_grid(g: &ReductionGraph, denominator: u32) -> Vec<GraphPoint> {
    let mut fracs = BTreeSet::new();
    for qd in 1..=denominator as i64 {
        for p in 1..=qd {
            if p.gcd(&qd) == 1 {
                fracs.insert(qf(p, qd));
            }
        }
    }
    let mut out: Vec<GraphPoint> = (0..g.num_vertices()).map(GraphPoint::Vertex).collect();
    for e in 0..g.num_edges() {
        out.extend(fracs.iter().filter(|f| !f.is_one()).map(|f| GraphPoint::Edge { edge: e, s: f * g.length(e) }));
    }
    for h in 0..g.half_edges().len() {
        out.extend(fracs.iter().map(|f| GraphPoint::HalfEdge { half: h, t: f.clone() }));
    }
    out
}

/// Classifies Kummer collisions on the rational grid.
pub fn injectivity_census(g: &ReductionGraph, denominator: u32, n: usize) -> Result<CensusReport> {
    if g.stability() != Stability::Stable {
        return Err(GrappaError::NotStable);
    }
    let depth = n.max(2);
    let k = Kummer::new(g, &GraphPoint::Vertex(0), depth)?;
    let points = rational_grid(g, denominator);
    let values: Vec<Vec<Vec<Q>>> = points.iter().map(|p| (1..=depth).map(|r| k.value_ambient(p, r)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let j1_constant = values.windows(2).all(|w| w[0][0] == w[1][0]);
    let bd = block_decomposition(g);
    let involutions: Vec<Involution> = (0..bd.blocks.len()).flat_map(|b| component_involutions(g, &bd, b)).collect();

    let mut by_w2: BTreeMap<&[Vec<Q>], Vec<usize>> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        by_w2.entry(&v[..2]).or_default().push(i);
    }
    let mut collisions = Vec::new();
    let mut colliding = BTreeSet::new();
    for group in by_w2.values() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                let (x, y) = (&points[i], &points[j]);
                let witness = involutions.iter().find(|inv| &inv.apply(g, x) == y).cloned();
                collisions.push(Collision { x: x.clone(), y: y.clone(), witness });
                colliding.insert((i, j));
            }
        }
    }
    let index: HashMap<&GraphPoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut missed = Vec::new();
    for inv in &involutions {
        for (i, p) in points.iter().enumerate() {
            let q = inv.apply(g, p);
            if let Some(&j) = index.get(&q) {
                if i < j && !colliding.contains(&(i, j)) {
                    missed.push((p.clone(), q));
                }
            }
        }
    }
    let mut higher_collisions = Vec::new();
    if n >= 3 {
        let mut by_all: BTreeMap<&[Vec<Q>], Vec<usize>> = BTreeMap::new();
        for (i, v) in values.iter().enumerate() {
            by_all.entry(&v[..n]).or_default().push(i);
        }
        for group in by_all.values().filter(|g| g.len() > 1) {
            for (a, &i) in group.iter().enumerate() {
                for &j in &group[a + 1..] {
                    higher_collisions.push((points[i].clone(), points[j].clone()));
                }
            }
        }
    }
    Ok(CensusReport { points, j1_constant, collisions, missed, higher_collisions })
}
