//! Metrized reduction graphs, rational points and subdivision.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GrappaError, Result};
use crate::harmonic::GroundedLaplacian;
use crate::homology::Homology;
use crate::lie::LieAlgebra;
use crate::rational::{fmt_q, parse_q, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
}

/// An unoriented edge stored with a reference orientation `src → dst`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: usize,
    pub dst: usize,
    pub length: Q,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEdge {
    pub id: String,
    pub src: usize,
}

/// An oriented edge: the stored orientation when `forward`, its inverse otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub edge: usize,
    pub forward: bool,
}

impl Dart {
    pub fn fwd(edge: usize) -> Self {
        Dart { edge, forward: true }
    }

    pub fn inverse(self) -> Self {
        Dart { edge: self.edge, forward: !self.forward }
    }

    /// `+1` for the stored orientation, `-1` for its inverse.
    pub fn sign(self) -> i64 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Semistable,
    Neither,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Semistable => "semistable",
            Stability::Neither => "neither",
        })
    }
}

/// A rational point: a vertex, an interior point of an edge measured from the
/// stored source, or a point at positive distance along a half-edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Vertex(usize),
    Edge { edge: usize, s: Q },
    HalfEdge { half: usize, t: Q },
}

pub type Divisor = BTreeMap<GraphPoint, Q>;

pub fn divisor_degree(d: &Divisor) -> Q {
    d.values().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Invariants {
    pub first_betti: usize,
    pub total_genus: usize,
    pub euler_char: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    half_edges: Vec<HalfEdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: String,
    #[serde(default)]
    genus: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    id: String,
    src: String,
    dst: String,
    length: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfEdgeRecord {
    id: String,
    src: String,
}

#[derive(Default)]
struct Caches {
    homology: OnceLock<Arc<Homology>>,
    laplacian: OnceLock<Arc<GroundedLaplacian>>,
    lie: OnceLock<Arc<LieAlgebra>>,
}

impl Clone for Caches {
    fn clone(&self) -> Self {
        Caches::default()
    }
}

impl fmt::Debug for Caches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Caches")
    }
}

/// A finite connected metrized graph with genus function and half-edges.
///
/// Vertices, edges and half-edges are kept sorted by id, so indices are
/// deterministic for a given set of ids.
#[derive(Debug, Clone)]
pub struct ReductionGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    half_edges: Vec<HalfEdge>,
    caches: Caches,
}

impl PartialEq for ReductionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.half_edges == other.half_edges
    }
}

impl Eq for ReductionGraph {}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id.bytes().all(|b| b.is_ascii_graphic() && !matches!(b, b'@' | b'\'' | b','));
    if ok {
        Ok(())
    } else {
        Err(GrappaError::InvalidId(id.to_string()))
    }
}

impl ReductionGraph {
    /// Builds and validates a graph from id-based records.
    pub fn from_parts(
        vertices: Vec<(String, u32)>,
        edges: Vec<(String, String, String, Q)>,
        half_edges: Vec<(String, String)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(GrappaError::Empty);
        }
        let mut seen = std::collections::HashSet::new();
        let all_ids = vertices.iter().map(|v| &v.0).chain(edges.iter().map(|e| &e.0)).chain(half_edges.iter().map(|h| &h.0));
        for id in all_ids {
            check_id(id)?;
            if !seen.insert(id.clone()) {
                return Err(GrappaError::DuplicateId(id.clone()));
            }
        }
        let mut vs: Vec<Vertex> = vertices.into_iter().map(|(id, genus)| Vertex { id, genus }).collect();
        vs.sort_by(|a, b| a.id.cmp(&b.id));
        let index: HashMap<&str, usize> = vs.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let lookup = |item: &str, v: &str| {
            index.get(v).copied().ok_or_else(|| GrappaError::DanglingEndpoint { item: item.to_string(), vertex: v.to_string() })
        };
        let mut es = Vec::with_capacity(edges.len());
        for (id, src, dst, length) in edges {
            if !length.is_positive() {
                return Err(GrappaError::NonPositiveLength(id));
            }
            let (src, dst) = (lookup(&id, &src)?, lookup(&id, &dst)?);
            es.push(Edge { id, src, dst, length });
        }
        es.sort_by(|a, b| a.id.cmp(&b.id));
        let mut hs = Vec::with_capacity(half_edges.len());
        for (id, src) in half_edges {
            let src = lookup(&id, &src)?;
            hs.push(HalfEdge { id, src });
        }
        hs.sort_by(|a, b| a.id.cmp(&b.id));
        let g = ReductionGraph { vertices: vs, edges: es, half_edges: hs, caches: Caches::default() };
        if !g.is_connected() {
            return Err(GrappaError::Disconnected);
        }
        Ok(g)
    }

    /// Parses the JSON graph format.
    pub fn parse(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GrappaError::Malformed(e.to_string()))?;
        let mut edges = Vec::with_capacity(file.edges.len());
        for e in file.edges {
            let length = parse_q(&e.length)?;
            edges.push((e.id, e.src, e.dst, length));
        }
        ReductionGraph::from_parts(
            file.vertices.into_iter().map(|v| (v.id, v.genus)).collect(),
            edges,
            file.half_edges.into_iter().map(|h| (h.id, h.src)).collect(),
        )
    }

    /// Serializes to the JSON graph format (pretty-printed, id-sorted).
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.vertices.iter().map(|v| VertexRecord { id: v.id.clone(), genus: v.genus }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    src: self.vertices[e.src].id.clone(),
                    dst: self.vertices[e.dst].id.clone(),
                    length: fmt_q(&e.length),
                })
                .collect(),
            half_edges: self
                .half_edges
                .iter()
                .map(|h| HalfEdgeRecord { id: h.id.clone(), src: self.vertices[h.src].id.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_darts(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.id.as_str().cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn half_edge_index(&self, id: &str) -> Option<usize> {
        self.half_edges.binary_search_by(|h| h.id.as_str().cmp(id)).ok()
    }

    pub fn length(&self, e: usize) -> &Q {
        &self.edges[e].length
    }

    pub fn genus(&self, v: usize) -> u32 {
        self.vertices[v].genus
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        (0..self.edges.len()).flat_map(|e| [Dart { edge: e, forward: true }, Dart { edge: e, forward: false }])
    }

    pub fn dart_src(&self, d: Dart) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.src
        } else {
            e.dst
        }
    }

    pub fn dart_dst(&self, d: Dart) -> usize {
        self.dart_src(d.inverse())
    }

    pub fn dart_name(&self, d: Dart) -> String {
        let id = &self.edges[d.edge].id;
        if d.forward {
            id.clone()
        } else {
            format!("{id}'")
        }
    }

    /// Darts leaving `v`; a loop at `v` contributes both of its darts.
    pub fn out_darts(&self, v: usize) -> Vec<Dart> {
        self.darts().filter(|&d| self.dart_src(d) == v).collect()
    }

    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.half_edges.len()).filter(|&h| self.half_edges[h].src == v).collect()
    }

    /// Number of edge-ends at `v` (loops count twice), ignoring half-edges.
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|e| usize::from(e.src == v) + usize::from(e.dst == v)).sum()
    }

    /// Outgoing darts plus half-edges at `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.valence(v) + self.half_edges.iter().filter(|h| h.src == v).count()
    }

    pub fn stability(&self) -> Stability {
        let min = (0..self.vertices.len()).map(|v| 2 * self.genus(v) as usize + self.degree(v)).min().unwrap_or(0);
        if min > 2 {
            Stability::Stable
        } else if min == 2 {
            Stability::Semistable
        } else {
            Stability::Neither
        }
    }

    pub fn is_semistable(&self) -> bool {
        self.stability() != Stability::Neither
    }

    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn invariants(&self) -> Invariants {
        let first_betti = self.first_betti();
        let total_genus = first_betti + self.vertices.iter().map(|v| v.genus as usize).sum::<usize>();
        let euler_char = 2 - 2 * total_genus as i64 - self.half_edges.len() as i64;
        Invariants { first_betti, total_genus, euler_char }
    }

    /// `K = Σ_v (2g(v) + val(v) − 2)·v` with edge valence.
    pub fn canonical_divisor(&self) -> Divisor {
        (0..self.vertices.len())
            .map(|v| (GraphPoint::Vertex(v), Q::from_integer((2 * self.genus(v) as i64 + self.valence(v) as i64 - 2).into())))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn homology(&self) -> Arc<Homology> {
        self.caches.homology.get_or_init(|| Arc::new(Homology::new(self))).clone()
    }

    pub(crate) fn grounded_laplacian(&self) -> Arc<GroundedLaplacian> {
        self.caches.laplacian.get_or_init(|| Arc::new(GroundedLaplacian::new(self))).clone()
    }

    pub fn lie(&self) -> Arc<LieAlgebra> {
        self.caches.lie.get_or_init(|| Arc::new(LieAlgebra::new(self))).clone()
    }

    // ----- points -----

    pub fn vertex_point(&self, id: &str) -> Result<GraphPoint> {
        self.vertex_index(id).map(GraphPoint::Vertex).ok_or_else(|| GrappaError::UnknownId(id.to_string()))
    }

    /// The point at distance `s` from the source of `d`, normalized.
    pub fn point_on_dart(&self, d: Dart, s: Q) -> Result<GraphPoint> {
        let l = self.length(d.edge).clone();
        if s.is_negative() || s > l {
            return Err(GrappaError::PointOutOfRange(format!("{}@{}", self.dart_name(d), fmt_q(&s))));
        }
        let s = if d.forward { s } else { &l - s };
        Ok(self.edge_point(d.edge, s))
    }

    /// Normalized point at distance `s ∈ [0, l]` from the stored source.
    pub fn edge_point(&self, edge: usize, s: Q) -> GraphPoint {
        let e = &self.edges[edge];
        if s.is_zero() {
            GraphPoint::Vertex(e.src)
        } else if s == e.length {
            GraphPoint::Vertex(e.dst)
        } else {
            GraphPoint::Edge { edge, s }
        }
    }

    pub fn half_edge_point(&self, half: usize, t: Q) -> Result<GraphPoint> {
        if t.is_negative() {
            return Err(GrappaError::PointOutOfRange(format!("{}@{}", self.half_edges[half].id, fmt_q(&t))));
        }
        Ok(if t.is_zero() { GraphPoint::Vertex(self.half_edges[half].src) } else { GraphPoint::HalfEdge { half, t } })
    }

    /// Parses `"u"`, `"e@s"` (from the source) or `"e'@s"` (from the target).
    pub fn parse_point(&self, text: &str) -> Result<GraphPoint> {
        let bad = || GrappaError::BadPoint(text.to_string());
        let Some((name, dist)) = text.split_once('@') else {
            check_id(text).map_err(|_| bad())?;
            return self.vertex_point(text);
        };
        let s = parse_q(dist).map_err(|_| bad())?;
        let (name, reversed) = match name.strip_suffix('\'') {
            Some(n) => (n, true),
            None => (name, false),
        };
        check_id(name).map_err(|_| bad())?;
        if let Some(e) = self.edge_index(name) {
            return self.point_on_dart(Dart { edge: e, forward: !reversed }, s);
        }
        if let Some(h) = self.half_edge_index(name) {
            if reversed {
                return Err(bad());
            }
            return self.half_edge_point(h, s);
        }
        Err(GrappaError::UnknownId(name.to_string()))
    }

    pub fn point_name(&self, p: &GraphPoint) -> String {
        match p {
            GraphPoint::Vertex(v) => self.vertices[*v].id.clone(),
            GraphPoint::Edge { edge, s } => format!("{}@{}", self.edges[*edge].id, fmt_q(s)),
            GraphPoint::HalfEdge { half, t } => format!("{}@{}", self.half_edges[*half].id, fmt_q(t)),
        }
    }

    /// Canonical key: an edge point is measured from its lexicographically
    /// smaller endpoint (the stored source for loops).
    pub fn canonical_key(&self, p: &GraphPoint) -> (String, Q) {
        match p {
            GraphPoint::Vertex(v) => (self.vertices[*v].id.clone(), Q::zero()),
            GraphPoint::Edge { edge, s } => {
                let e = &self.edges[*edge];
                let s = if self.vertices[e.src].id <= self.vertices[e.dst].id { s.clone() } else { &e.length - s };
                (e.id.clone(), s)
            }
            GraphPoint::HalfEdge { half, t } => (self.half_edges[*half].id.clone(), t.clone()),
        }
    }

    // ----- subdivision -----

    fn fresh_id(&self, base: String) -> String {
        let mut id = base;
        while self.vertex_index(&id).is_some() || self.edge_index(&id).is_some() || self.half_edge_index(&id).is_some() {
            id.push('_');
        }
        id
    }

    /// Promotes an interior point to a genus-0 vertex. Returns the new graph
    /// and the id of the vertex at `p` (unchanged graph if `p` is a vertex).
    pub fn subdivide(&self, p: &GraphPoint) -> (ReductionGraph, String) {
        let vertices: Vec<(String, u32)> = self.vertices.iter().map(|v| (v.id.clone(), v.genus)).collect();
        let mut edges: Vec<(String, String, String, Q)> = self
            .edges
            .iter()
            .map(|e| (e.id.clone(), self.vertices[e.src].id.clone(), self.vertices[e.dst].id.clone(), e.length.clone()))
            .collect();
        let mut halves: Vec<(String, String)> =
            self.half_edges.iter().map(|h| (h.id.clone(), self.vertices[h.src].id.clone())).collect();
        let mut vertices = vertices;
        let new_id = match p {
            GraphPoint::Vertex(v) => return (self.clone(), self.vertices[*v].id.clone()),
            GraphPoint::Edge { edge, s } => {
                let e = &self.edges[*edge];
                let mid = self.fresh_id(format!("{}.m", e.id));
                let a = self.fresh_id(format!("{}.0", e.id));
                let b = self.fresh_id(format!("{}.1", e.id));
                let (src, dst) = (self.vertices[e.src].id.clone(), self.vertices[e.dst].id.clone());
                edges.retain(|x| x.0 != e.id);
                edges.push((a, src, mid.clone(), s.clone()));
                edges.push((b, mid.clone(), dst, &e.length - s));
                mid
            }
            GraphPoint::HalfEdge { half, t } => {
                let h = &self.half_edges[*half];
                let mid = self.fresh_id(format!("{}.m", h.id));
                let seg = self.fresh_id(format!("{}.0", h.id));
                edges.push((seg, self.vertices[h.src].id.clone(), mid.clone(), t.clone()));
                halves.retain(|x| x.0 != h.id);
                halves.push((h.id.clone(), mid.clone()));
                mid
            }
        };
        vertices.push((new_id.clone(), 0));
        let g = ReductionGraph::from_parts(vertices, edges, halves).expect("subdivision preserves validity");
        (g, new_id)
    }

    /// Subdivides at every listed point; returns the graph and, for each
    /// input point, the id of the vertex it became.
    pub fn subdivide_all(&self, points: &[GraphPoint]) -> (ReductionGraph, Vec<String>) {
        let mut g = self.clone();
        let mut on_edges: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
        let mut on_halves: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
        for p in points {
            match p {
                GraphPoint::Vertex(_) => {}
                GraphPoint::Edge { edge, s } => on_edges.entry(*edge).or_default().push(s.clone()),
                GraphPoint::HalfEdge { half, t } => on_halves.entry(*half).or_default().push(t.clone()),
            }
        }
        let mut names: HashMap<GraphPoint, String> = HashMap::new();
        for (edge, mut ss) in on_edges {
            ss.sort();
            ss.dedup();
            let mut cur = self.edges[edge].id.clone();
            let mut offset = Q::zero();
            for s in ss {
                let e = g.edge_index(&cur).expect("remaining segment exists");
                let (ng, mid, rest) = g.split_edge(e, &s - &offset);
                g = ng;
                names.insert(GraphPoint::Edge { edge, s: s.clone() }, mid);
                cur = rest;
                offset = s;
            }
        }
        for (half, mut ts) in on_halves {
            ts.sort();
            ts.dedup();
            let id = self.half_edges[half].id.clone();
            let mut offset = Q::zero();
            for t in ts {
                let h = g.half_edge_index(&id).expect("half-edge keeps its id");
                let (ng, mid) = g.subdivide(&GraphPoint::HalfEdge { half: h, t: &t - &offset });
                g = ng;
                names.insert(GraphPoint::HalfEdge { half, t: t.clone() }, mid);
                offset = t;
            }
        }
        let ids = points
            .iter()
            .map(|p| match p {
                GraphPoint::Vertex(v) => self.vertices[*v].id.clone(),
                other => names[other].clone(),
            })
            .collect();
        (g, ids)
    }

    fn split_edge(&self, edge: usize, s: Q) -> (ReductionGraph, String, String) {
        let (g, mid) = self.subdivide(&GraphPoint::Edge { edge, s });
        let m = g.vertex_index(&mid).unwrap();
        let dst = &self.vertices[self.edges[edge].dst].id;
        let rest = g
            .edges
            .iter()
            .find(|e| e.src == m && &g.vertices[e.dst].id == dst && e.id.starts_with(&format!("{}.1", self.edges[edge].id)))
            .expect("second segment present")
            .id
            .clone();
        (g, mid, rest)
    }
}

impl fmt::Display for ReductionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}
