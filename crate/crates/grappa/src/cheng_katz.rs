//! Iterated integrals along paths, the duality with the tensor algebra on
//! H¹, canonical paths, and the monodromy operator on path combinations.
//!
//! Paths are lists of darts, first traversed dart first. Composition is
//! written with the later path on the left, so `Θ(γ′γ) = Θ(γ′)Θ(γ)`. Words
//! `ω₁…ω_n` of the higher cycle pairing are lists of H₁ basis indices, `ω₁`
//! integrated first. The coefficient of a tensor series at `ξ_{a₁}⊗…⊗ξ_{a_k}`
//! is the integral of the reversed word `γ_{a_k}…γ_{a₁}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{GrappaError, Result};
use crate::graph::{Dart, GraphPoint, ReductionGraph};
use crate::kummer::{log_delta_half, log_delta_vertex, Kummer, Mismatch, OracleReport};
use crate::lie::words::{add_scaled, add_term, bracket, concat, letter, WordVec};
use crate::lie::{cohomology_words, GenKind, LieAlgebra};
use crate::linalg::Matrix;
use crate::rational::{factorial, pow, Q};

pub type Path = Vec<Dart>;

/// A finite formal combination of paths with common endpoints.
pub type PathComb = BTreeMap<Path, Q>;

/// Checks consecutive darts meet; returns the endpoints of a non-empty path.
pub fn endpoints(g: &ReductionGraph, p: &[Dart]) -> Result<Option<(usize, usize)>> {
    for (i, w) in p.windows(2).enumerate() {
        if g.dart_dst(w[0]) != g.dart_src(w[1]) {
            return Err(GrappaError::NotComposable(i + 1));
        }
    }
    Ok(p.first().map(|d| (g.dart_src(*d), g.dart_dst(*p.last().unwrap()))))
}

pub fn reverse(p: &[Dart]) -> Path {
    p.iter().rev().map(|d| d.inverse()).collect()
}

/// `first` followed by `then`.
pub fn compose(first: &[Dart], then: &[Dart]) -> Path {
    [first, then].concat()
}

pub fn comb_compose(first: &PathComb, then: &PathComb) -> PathComb {
    let mut out = PathComb::new();
    for (p, a) in first {
        for (q, b) in then {
            *out.entry(compose(p, q)).or_insert_with(Q::zero) += a * b;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn comb_reverse(c: &PathComb) -> PathComb {
    c.iter().map(|(p, x)| (reverse(p), x.clone())).collect()
}

/// `∫_d γ_a = ±l(e)·γ_a(e)` for every H₁ basis element.
fn dart_pairings(g: &ReductionGraph, d: Dart) -> Vec<Q> {
    let l = g.length(d.edge);
    g.homology().dart_estar(d).into_iter().map(|c| c * l).collect()
}

/// The higher cycle pairing `∫_γ ω₁…ω_n`.
pub fn iterated_integral(g: &ReductionGraph, path: &[Dart], word: &[usize]) -> Q {
    let n = word.len();
    let mut dp = vec![Q::zero(); n + 1];
    dp[0] = Q::one();
    for &d in path {
        let c = dart_pairings(g, d);
        let mut next = vec![Q::zero(); n + 1];
        for k in 0..=n {
            if dp[k].is_zero() {
                continue;
            }
            let mut block = Q::one();
            for i in k..=n {
                if i > k {
                    block *= &c[word[i - 1]];
                }
                next[i] += &dp[k] * &block / factorial(i - k);
            }
        }
        dp = next;
    }
    dp.swap_remove(n)
}

pub fn comb_integral(g: &ReductionGraph, comb: &PathComb, word: &[usize]) -> Q {
    comb.iter().map(|(p, c)| c * iterated_integral(g, p, word)).sum()
}

/// An element of the tensor algebra on H¹ truncated above tensor length `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSeries {
    letters: usize,
    depth: usize,
    /// `coeffs[k]` lists length-`k` words in lexicographic order.
    coeffs: Vec<Vec<Q>>,
}

impl TensorSeries {
    pub fn zero(letters: usize, depth: usize) -> Self {
        let coeffs = (0..=depth).map(|k| vec![Q::zero(); letters.pow(k as u32)]).collect();
        TensorSeries { letters, depth, coeffs }
    }

    pub fn one(letters: usize, depth: usize) -> Self {
        let mut s = Self::zero(letters, depth);
        s.coeffs[0][0] = Q::one();
        s
    }

    /// `exp(Σ c_a ξ_a)`.
    pub fn exp_linear(c: &[Q], depth: usize) -> Self {
        let letters = c.len();
        let mut s = Self::zero(letters, depth);
        for k in 0..=depth {
            for (idx, w) in cohomology_words(letters, k).iter().enumerate() {
                let prod: Q = w.iter().map(|&a| c[a as usize].clone()).product();
                s.coeffs[k][idx] = prod / factorial(k);
            }
        }
        s
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn index(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &a| acc * self.letters + a)
    }

    /// The coefficient at `ξ_{a₁}⊗…⊗ξ_{a_k}`.
    pub fn coeff(&self, word: &[usize]) -> &Q {
        &self.coeffs[word.len()][self.index(word)]
    }

    pub fn by_length(&self, k: usize) -> &[Q] {
        &self.coeffs[k]
    }

    pub fn mul(&self, other: &TensorSeries) -> TensorSeries {
        let mut out = Self::zero(self.letters, self.depth);
        for i in 0..=self.depth {
            for j in 0..=self.depth - i {
                let stride = self.letters.pow(j as u32);
                for (a, x) in self.coeffs[i].iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (b, y) in other.coeffs[j].iter().enumerate() {
                        if !y.is_zero() {
                            out.coeffs[i + j][a * stride + b] += x * y;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &TensorSeries) -> TensorSeries {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> TensorSeries {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    pub fn is_one(&self) -> bool {
        self == &Self::one(self.letters, self.depth)
    }

    /// The series as a word vector over letter codes `0..letters`.
    pub fn to_word_vec(&self) -> WordVec {
        let mut out = WordVec::new();
        for k in 0..=self.depth {
            for (w, c) in cohomology_words(self.letters, k).into_iter().zip(&self.coeffs[k]) {
                add_term(&mut out, w, c.clone());
            }
        }
        out
    }
}

/// `Θ(e) = exp(l(e)·e*)`.
pub fn edge_exponential(g: &ReductionGraph, e: usize, depth: usize) -> TensorSeries {
    theta(g, &[Dart::fwd(e)], depth)
}

/// The image of a path in the truncated tensor algebra, as a product of edge exponentials.
pub fn theta(g: &ReductionGraph, path: &[Dart], depth: usize) -> TensorSeries {
    let b = g.first_betti();
    let mut acc = TensorSeries::one(b, depth);
    for &d in path {
        acc = TensorSeries::exp_linear(&dart_pairings(g, d), depth).mul(&acc);
    }
    acc
}

pub fn theta_comb(g: &ReductionGraph, comb: &PathComb, depth: usize) -> TensorSeries {
    let mut acc = TensorSeries::zero(g.first_betti(), depth);
    for (p, c) in comb {
        acc = acc.add(&theta(g, p, depth).scale(c));
    }
    acc
}

/// The fundamental loop `i` based at `u`.
pub fn loop_at(g: &ReductionGraph, u: usize, i: usize) -> Path {
    let hom = g.homology();
    let mut p = hom.tree_path(g, u, 0);
    p.extend(hom.fundamental_loop(g, i));
    p.extend(hom.tree_path(g, 0, u));
    p
}

/// Tree path `u → v` after products of at most `depth` fundamental loops at `u`.
pub fn spanning_paths(g: &ReductionGraph, u: usize, v: usize, depth: usize) -> Vec<Path> {
    let hom = g.homology();
    let b = hom.betti();
    let loops: Vec<Path> = (0..b).map(|i| loop_at(g, u, i)).collect();
    let tail = hom.tree_path(g, u, v);
    let mut out = Vec::new();
    for k in 0..=depth {
        for w in cohomology_words(b, k) {
            let mut p: Path = w.iter().flat_map(|&a| loops[a as usize].iter().copied()).collect();
            p.extend_from_slice(&tail);
            out.push(p);
        }
    }
    out
}

/// All words of length at most `depth` in `b` letters, shortest first.
pub fn words_up_to(b: usize, depth: usize) -> Vec<Vec<usize>> {
    (0..=depth).flat_map(|k| cohomology_words(b, k)).map(|w| w.into_iter().map(usize::from).collect()).collect()
}

#[derive(Debug, Clone)]
pub struct DualityGram {
    pub paths: Vec<Path>,
    pub words: Vec<Vec<usize>>,
    /// `matrix[i][j] = ∫_{paths[i]} words[j]`.
    pub matrix: Matrix,
    pub rank: usize,
}

impl DualityGram {
    pub fn nonsingular(&self) -> bool {
        self.rank == self.words.len()
    }
}

pub fn duality_gram(g: &ReductionGraph, u: usize, v: usize, depth: usize) -> DualityGram {
    let paths = spanning_paths(g, u, v, depth);
    let words = words_up_to(g.first_betti(), depth);
    let rows = paths.iter().map(|p| words.iter().map(|w| iterated_integral(g, p, w)).collect()).collect();
    let matrix = Matrix::from_rows(rows, words.len());
    let rank = matrix.rank();
    DualityGram { paths, words, matrix, rank }
}

/// The combination of spanning paths `u → v` whose image is `target`.
pub fn preimage(g: &ReductionGraph, u: usize, v: usize, target: &TensorSeries) -> Result<PathComb> {
    let depth = target.depth();
    let gram = duality_gram(g, u, v, depth);
    if !gram.nonsingular() {
        return Err(GrappaError::Singular("duality pairing".into()));
    }
    // column j of the transposed Gram pairs all paths against word j; the
    // series coefficient at ξ_{a₁}…ξ_{a_k} is the integral of the reversed word
    let rhs: Vec<Q> = gram.words.iter().map(|w| target.coeff(&w.iter().rev().copied().collect::<Vec<_>>()).clone()).collect();
    let c = gram.matrix.transpose().solve(&rhs).ok_or_else(|| GrappaError::Singular("duality pairing".into()))?;
    let mut out = PathComb::new();
    for (p, x) in gram.paths.into_iter().zip(c) {
        if !x.is_zero() {
            *out.entry(p).or_insert_with(Q::zero) += x;
        }
    }
    out.retain(|_, x| !x.is_zero());
    Ok(out)
}

/// The truncated canonical path: every nonempty iterated integral up to `depth` vanishes.
pub fn canonical_path(g: &ReductionGraph, u: usize, v: usize, depth: usize) -> Result<PathComb> {
    preimage(g, u, v, &TensorSeries::one(g.first_betti(), depth))
}

/// The trivialised monodromy operator `ΘN` on paths, truncated at weight `−depth`.
///
/// The images `D_d` of `log δ_d` under the trivialisation are the unique
/// solution of the edge relations `D_{e⁻¹} = −exp(l ad_{e*}) D_e`, the vertex
/// relations `Σ_{s(d)=v} D_d + logδ_v + Σ_h logδ_h = 0` and the homology
/// relations `Σ_e γ_k(e) ((exp(l ad_{e*}) − 1)/ad_{e*}) D_e = γ_k`. Then
/// `N(e) = l(e)·e·log δ_e` and the derivation rule give `ΘN` on any path.
#[derive(Debug, Clone)]
pub struct PathMonodromy {
    graph: ReductionGraph,
    lie: Arc<LieAlgebra>,
    depth: usize,
    offsets: Vec<usize>,
    dim: usize,
    forward: Vec<WordVec>,
    backward: Vec<WordVec>,
}

impl PathMonodromy {
    pub fn new(g: &ReductionGraph, depth: usize) -> Result<Self> {
        let lie = g.lie();
        let mut offsets = vec![0];
        for r in 1..=depth {
            offsets.push(offsets[r - 1] + lie.assoc_piece(-(r as i32)).dim());
        }
        let dim = offsets[depth];
        let mut pm = PathMonodromy { graph: g.clone(), lie, depth, offsets, dim, forward: Vec::new(), backward: Vec::new() };
        pm.solve()?;
        Ok(pm)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Dimension of the truncated target `⊕_{r=1}^{depth} gr^W_{−r}gr^M_{−2}`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn weight(&self, w: &[u8]) -> i32 {
        w.iter().map(|&a| self.lie.generators()[a as usize].w).sum()
    }

    /// Drops words beyond the truncation.
    fn truncate(&self, x: &mut WordVec) {
        let n = self.depth as i32;
        x.retain(|w, _| self.weight(w) >= -n);
    }

    /// Coordinates of a truncated element of M-degree −2.
    pub fn coords(&self, x: &WordVec) -> Vec<Q> {
        let mut parts: Vec<WordVec> = vec![WordVec::new(); self.depth + 1];
        for (w, c) in x {
            let r = (-self.weight(w)) as usize;
            if r <= self.depth {
                add_term(&mut parts[r], w.clone(), c.clone());
            }
        }
        let mut out = Vec::with_capacity(self.dim);
        for (r, part) in parts.iter().enumerate().skip(1) {
            out.extend(self.lie.assoc_piece(-(r as i32)).coords(part));
        }
        out
    }

    fn element(&self, v: &[Q]) -> WordVec {
        let mut out = WordVec::new();
        for r in 1..=self.depth {
            let piece = self.lie.assoc_piece(-(r as i32));
            for (i, w) in piece.basis_words().iter().enumerate() {
                add_term(&mut out, w.clone(), v[self.offsets[r - 1] + i].clone());
            }
        }
        out
    }

    fn basis_element(&self, k: usize) -> WordVec {
        let mut v = vec![Q::zero(); self.dim];
        v[k] = Q::one();
        self.element(&v)
    }

    fn estar(&self, e: usize) -> WordVec {
        self.lie.cohomology_element(&self.graph.homology().estar(e))
    }

    /// `Σ_k c_k ad_{x}^k` as a matrix on the truncated target.
    fn ad_series(&self, x: &WordVec, c: impl Fn(usize) -> Q) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            let mut y = self.basis_element(k);
            for p in 0..=self.depth {
                let coeff = c(p);
                if !coeff.is_zero() {
                    for (i, v) in self.coords(&y).into_iter().enumerate() {
                        m.add_to(i, k, &(v * &coeff));
                    }
                }
                y = bracket(x, &y);
                self.truncate(&mut y);
                if y.is_empty() {
                    break;
                }
            }
        }
        m
    }

    fn solve(&mut self) -> Result<()> {
        let g = self.graph.clone();
        let hom = g.homology();
        let (ne, d) = (g.num_edges(), self.dim);
        let b = hom.betti();
        let rows = (g.num_vertices() + b) * d;
        let mut a = Matrix::zeros(rows, ne * d);
        let mut rhs = vec![Q::zero(); rows];
        let mut exps = Vec::with_capacity(ne);
        for e in 0..ne {
            let x = self.estar(e);
            let l = g.length(e).clone();
            let exp = self.ad_series(&x, |k| pow(&l, k) / factorial(k));
            let phi = self.ad_series(&x, |k| pow(&l, k + 1) / factorial(k + 1));
            let edge = &g.edges()[e];
            for i in 0..d {
                a.add_to(edge.src * d + i, e * d + i, &Q::one());
                for j in 0..d {
                    a.add_to(edge.dst * d + i, e * d + j, &-exp.get(i, j));
                }
            }
            for (k, gamma) in hom.basis().iter().enumerate() {
                let row0 = (g.num_vertices() + k) * d;
                if gamma[e].is_zero() {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        a.add_to(row0 + i, e * d + j, &(phi.get(i, j) * &gamma[e]));
                    }
                }
            }
            exps.push(exp);
        }
        for v in 0..g.num_vertices() {
            let mut x = log_delta_vertex(&g, &self.lie, v);
            for h in g.half_edges_at(v) {
                add_scaled(&mut x, &log_delta_half(&self.lie, h), &Q::one());
            }
            self.truncate(&mut x);
            for (i, c) in self.coords(&x).into_iter().enumerate() {
                rhs[v * d + i] = -c;
            }
        }
        for k in 0..b {
            let h1 = letter(self.lie.generator(&GenKind::Homology(k)).unwrap());
            if self.depth >= 1 {
                for (i, c) in self.coords(&h1).into_iter().enumerate() {
                    rhs[(g.num_vertices() + k) * d + i] = c;
                }
            }
        }
        if a.rank() != ne * d {
            return Err(GrappaError::Singular("edge images of log delta are not determined".into()));
        }
        let sol = a.solve(&rhs).ok_or_else(|| GrappaError::Singular("edge images of log delta are inconsistent".into()))?;
        for e in 0..ne {
            let de = &sol[e * d..(e + 1) * d];
            let back: Vec<Q> = exps[e].mul_vec(de).into_iter().map(|x| -x).collect();
            self.forward.push(self.element(de));
            self.backward.push(self.element(&back));
        }
        Ok(())
    }

    /// `Θ(log δ_d)` for a dart.
    pub fn log_delta(&self, d: Dart) -> &WordVec {
        if d.forward {
            &self.forward[d.edge]
        } else {
            &self.backward[d.edge]
        }
    }

    fn theta_words(&self, path: &[Dart]) -> WordVec {
        // estar letters are the first `b` generators, in H¹ basis order
        let s = theta(&self.graph, path, self.depth.saturating_sub(1));
        s.to_word_vec()
    }

    /// `ΘN(γ) = Σ_j Θ(d_m…d_j)·l(d_j)·D_{d_j}·Θ(d_{j−1}…d_1)`.
    pub fn apply_words(&self, path: &[Dart]) -> WordVec {
        let mut out = WordVec::new();
        for (j, &d) in path.iter().enumerate() {
            let after = self.theta_words(&path[j..]);
            let before = self.theta_words(&path[..j]);
            let mut term = concat(&concat(&after, self.log_delta(d)), &before);
            self.truncate(&mut term);
            add_scaled(&mut out, &term, self.graph.length(d.edge));
        }
        out
    }

    pub fn apply(&self, path: &[Dart]) -> Vec<Q> {
        self.coords(&self.apply_words(path))
    }

    pub fn apply_comb(&self, comb: &PathComb) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim];
        for (p, c) in comb {
            for (acc, x) in out.iter_mut().zip(self.apply(p)) {
                *acc += x * c;
            }
        }
        out
    }

    /// Embeds Kummer values `j_{=1..depth}` (ambient Lie coordinates) into the target.
    pub fn embed_kummer(&self, ambient: &[Vec<Q>]) -> Vec<Q> {
        let mut x = WordVec::new();
        for (r, coords) in ambient.iter().enumerate() {
            let piece = self.lie.piece(-(r as i32 + 1), -2);
            add_scaled(&mut x, &piece.element(coords), &Q::one());
        }
        self.coords(&x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantPathReport {
    /// Dimension of the kernel of `N` on path classes modulo `W_{−n−1}`.
    pub kernel_dim: usize,
    /// Whether `j_{≤n}(x) = j_{≤n}(y)`.
    pub kummer_equal: bool,
    /// Whether `ΘN(γ^can_{x,y}) = j(y) − j(x)`.
    pub canonical_matches: bool,
}

impl InvariantPathReport {
    /// The kernel is nonzero exactly when the Kummer values agree, and then it is a line.
    pub fn consistent(&self) -> bool {
        self.canonical_matches && (self.kummer_equal == (self.kernel_dim > 0)) && self.kernel_dim <= 1
    }
}

/// Compares the kernel of `N` on paths `x → y` with equality of Kummer values.
pub fn invariant_paths(g: &ReductionGraph, x: &GraphPoint, y: &GraphPoint, n: usize) -> Result<InvariantPathReport> {
    let (sub, ids) = g.subdivide_all(&[x.clone(), y.clone()]);
    let vx = sub.vertex_index(&ids[0]).expect("subdivision vertex");
    let vy = sub.vertex_index(&ids[1]).expect("subdivision vertex");
    let pm = PathMonodromy::new(&sub, n)?;
    let paths = spanning_paths(&sub, vx, vy, n);
    let cols: Vec<Vec<Q>> = paths.iter().map(|p| pm.apply(p)).collect();
    let m = Matrix::from_cols(&cols, pm.dim());
    let kernel_dim = paths.len() - m.rank();
    let k = Kummer::new(g, x, n)?;
    let kummer_equal = (1..=n).all(|r| k.value(y, r).map(|v| v.iter().all(Zero::is_zero)).unwrap_or(false));
    let ks = Kummer::new(&sub, &GraphPoint::Vertex(vx), n)?;
    let jy: Vec<Vec<Q>> = (1..=n).map(|r| ks.value_ambient(&GraphPoint::Vertex(vy), r)).collect::<Result<_>>()?;
    let can = canonical_path(&sub, vx, vy, n)?;
    let canonical_matches = pm.apply_comb(&can) == pm.embed_kummer(&jy);
    Ok(InvariantPathReport { kernel_dim, kummer_equal, canonical_matches })
}

/// Path-side checks at depth `n`: canonical paths from vertex 0 are trivial
/// under `Θ` (also reversed), the duality Gram matrix towards each vertex is
/// nonsingular, and on the pair `l/3, 2l/3` of each edge (plus one
/// vertex-to-midpoint pair) the kernel of `N` on paths is nonzero exactly
/// when the Kummer values agree.
pub fn path_oracle(g: &ReductionGraph, n: usize) -> Result<OracleReport> {
    let mut rep = OracleReport::default();
    for v in 0..g.num_vertices() {
        let name = &g.vertices()[v].id;
        let can = canonical_path(g, 0, v, n)?;
        for (label, comb) in [("canonical", can.clone()), ("reversed canonical", comb_reverse(&can))] {
            let t = theta_comb(g, &comb, n);
            rep.check(t.is_one(), || Mismatch {
                identity: format!("{label} path to {name}: Θ = 1"),
                lhs: format!("{:?}", t.to_word_vec()),
                rhs: "1".into(),
            });
        }
        let gram = duality_gram(g, 0, v, n);
        rep.check(gram.nonsingular(), || Mismatch {
            identity: format!("duality gram towards {name} at depth {n}"),
            lhs: format!("rank {}", gram.rank),
            rhs: format!("rank {}", gram.words.len()),
        });
    }
    let mut pairs = Vec::new();
    for e in 0..g.num_edges() {
        let l = g.length(e);
        let third = l / Q::from_integer(3.into());
        pairs.push((g.edge_point(e, third.clone()), g.edge_point(e, l - &third)));
        if e == 0 {
            pairs.push((GraphPoint::Vertex(g.edges()[e].src), g.edge_point(e, l / Q::from_integer(2.into()))));
        }
    }
    for (x, y) in pairs {
        if x == y {
            continue;
        }
        let r = invariant_paths(g, &x, &y, n)?;
        rep.check(r.consistent(), || Mismatch {
            identity: format!("invariant paths {} -> {}", g.point_name(&x), g.point_name(&y)),
            lhs: format!("kummer_equal={}", r.kummer_equal),
            rhs: format!("kernel_dim={}, canonical_matches={}", r.kernel_dim, r.canonical_matches),
        });
    }
    Ok(rep)
}

/// Shuffle product of two words.
pub fn shuffle(a: &[usize], b: &[usize]) -> BTreeMap<Vec<usize>, Q> {
    let mut out = BTreeMap::new();
    fn go(a: &[usize], b: &[usize], prefix: &mut Vec<usize>, out: &mut BTreeMap<Vec<usize>, Q>) {
        if a.is_empty() || b.is_empty() {
            let mut w = prefix.clone();
            w.extend_from_slice(a);
            w.extend_from_slice(b);
            *out.entry(w).or_insert_with(Q::zero) += Q::one();
            return;
        }
        prefix.push(a[0]);
        go(&a[1..], b, prefix, out);
        prefix.pop();
        prefix.push(b[0]);
        go(a, &b[1..], prefix, out);
        prefix.pop();
    }
    go(a, b, &mut Vec::new(), &mut out);
    out
}
