//! The bigraded Lie algebra of a reduction graph: free Lie algebra on the
//! graph's generators modulo the surface relation, with monodromy `N`.
//!
//! Elements are handled as word vectors in the tensor algebra. Each bidegree
//! piece of the quotient gets a basis of Lyndon brackets, chosen greedily in
//! word order after the relations, plus a reducer that turns any Lie element
//! of that bidegree into quotient coordinates.

pub mod echelon;
pub mod words;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde_json::Value;

use crate::graph::ReductionGraph;
use crate::linalg::{ColumnProjector, Matrix};
use crate::rational::Q;
use echelon::{Reducer, Tag};
use words::{add_scaled, apply_derivation, bracket, concat, is_lyndon, letter, standard_split, words_of_bidegree, Word, WordVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenKind {
    /// Basis element of H¹ (dual to basis cycle `i`).
    Cohomology(usize),
    Beta { vertex: usize, index: usize, primed: bool },
    /// Basis cycle `i` of H₁.
    Homology(usize),
    LogDelta(usize),
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub kind: GenKind,
    pub w: i32,
    pub m: i32,
}

/// Basis and reducer for one bidegree of the quotient.
#[derive(Debug)]
pub struct Piece {
    pub w: i32,
    pub m: i32,
    pub free_dim: usize,
    pub relation_dim: usize,
    words: Vec<Word>,
    basis: Vec<WordVec>,
    reducer: Reducer,
}

impl Piece {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Lyndon words labelling the basis.
    pub fn basis_words(&self) -> &[Word] {
        &self.words
    }

    pub fn basis_vector(&self, j: usize) -> &WordVec {
        &self.basis[j]
    }

    /// Quotient coordinates of a Lie element of this bidegree, or `None`
    /// if `x` is not in the free Lie algebra's piece.
    pub fn try_coords(&self, x: &WordVec) -> Option<Vec<Q>> {
        let (rem, tag) = self.reducer.reduce(x);
        rem.is_empty().then(|| dense(&tag, self.dim()))
    }

    pub fn coords(&self, x: &WordVec) -> Vec<Q> {
        self.try_coords(x).unwrap_or_else(|| panic!("element outside bidegree ({}, {})", self.w, self.m))
    }

    pub fn element(&self, coords: &[Q]) -> WordVec {
        let mut out = WordVec::new();
        for (c, b) in coords.iter().zip(&self.basis) {
            add_scaled(&mut out, b, c);
        }
        out
    }
}

fn dense(tag: &Tag, n: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    for (k, x) in tag {
        v[*k] = x.clone();
    }
    v
}

/// `gr^W_{−n} V = ker N^{n−1}` inside the `(−n, −2)` piece.
#[derive(Debug)]
pub struct VSpace {
    pub n: usize,
    pub ambient_dim: usize,
    projector: Option<ColumnProjector>,
}

impl VSpace {
    pub fn dim(&self) -> usize {
        self.projector.as_ref().map_or(0, |p| p.basis().cols())
    }

    /// Basis vectors as columns in ambient coordinates.
    pub fn basis(&self) -> Matrix {
        self.projector.as_ref().map_or_else(|| Matrix::zeros(self.ambient_dim, 0), |p| p.basis().clone())
    }

    /// V-coordinates of an ambient vector, `None` if it lies outside V.
    pub fn coords(&self, ambient: &[Q]) -> Option<Vec<Q>> {
        match &self.projector {
            Some(p) => p.coords(ambient),
            None => ambient.iter().all(Zero::is_zero).then(Vec::new),
        }
    }

    pub fn ambient(&self, coords: &[Q]) -> Vec<Q> {
        match &self.projector {
            Some(p) => p.basis().mul_vec(coords),
            None => vec![Q::zero(); self.ambient_dim],
        }
    }
}

/// Result of checking that `N^i` is bijective between two bidegrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WmReport {
    pub n: usize,
    pub i: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

impl WmReport {
    pub fn bijective(&self) -> bool {
        self.source_dim == self.target_dim && self.rank == self.source_dim
    }
}

/// Basis and reducer for `gr^W_w gr^M_{−2}` of the associative quotient.
#[derive(Debug)]
pub struct AssocPiece {
    pub w: i32,
    words: Vec<Word>,
    reducer: Reducer,
}

impl AssocPiece {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn basis_words(&self) -> &[Word] {
        &self.words
    }

    pub fn coords(&self, x: &WordVec) -> Vec<Q> {
        let (rem, tag) = self.reducer.reduce(x);
        assert!(rem.is_empty(), "element outside associative bidegree ({}, -2)", self.w);
        dense(&tag, self.dim())
    }
}

type Cache<K, V> = Mutex<HashMap<K, Arc<V>>>;

fn cached<K: std::hash::Hash + Eq + Clone, V>(cache: &Cache<K, V>, key: K, make: impl FnOnce() -> V) -> Arc<V> {
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = Arc::new(make());
    cache.lock().unwrap().entry(key).or_insert(v).clone()
}

#[derive(Debug)]
pub struct LieAlgebra {
    gens: Vec<Generator>,
    degrees: Vec<(i32, i32)>,
    betti: usize,
    n_images: Vec<Option<WordVec>>,
    sigma: WordVec,
    lyndon: Mutex<HashMap<Word, WordVec>>,
    ideals: Cache<(i32, i32), Vec<WordVec>>,
    pieces: Cache<(i32, i32), Piece>,
    ad: Cache<(u8, i32, i32), Matrix>,
    nmat: Cache<(i32, i32), Matrix>,
    vspaces: Cache<usize, VSpace>,
    assoc: Cache<i32, AssocPiece>,
}

impl LieAlgebra {
    pub fn new(g: &ReductionGraph) -> Self {
        let hom = g.homology();
        let b = hom.betti();
        let mut gens = Vec::new();
        for i in 0..b {
            gens.push(Generator { name: format!("estar:{}", i + 1), kind: GenKind::Cohomology(i), w: -1, m: 0 });
        }
        for (v, vert) in g.vertices().iter().enumerate() {
            for i in 0..vert.genus as usize {
                for primed in [false, true] {
                    let stem = if primed { "betap" } else { "beta" };
                    gens.push(Generator {
                        name: format!("{stem}:{}:{}", vert.id, i + 1),
                        kind: GenKind::Beta { vertex: v, index: i, primed },
                        w: -1,
                        m: -1,
                    });
                }
            }
        }
        for i in 0..b {
            gens.push(Generator { name: format!("h1:{}", i + 1), kind: GenKind::Homology(i), w: -1, m: -2 });
        }
        for (h, half) in g.half_edges().iter().enumerate() {
            gens.push(Generator { name: format!("logdelta:{}", half.id), kind: GenKind::LogDelta(h), w: -2, m: -2 });
        }
        assert!(gens.len() < 256, "too many generators");
        let degrees = gens.iter().map(|x| (x.w, x.m)).collect();
        let h1_offset = gens.iter().position(|x| matches!(x.kind, GenKind::Homology(_))).unwrap_or(0);
        let ginv = hom.gram_inv();
        let n_images = gens
            .iter()
            .map(|x| match x.kind {
                GenKind::Cohomology(i) => {
                    let mut img = WordVec::new();
                    for j in 0..b {
                        words::add_term(&mut img, vec![(h1_offset + j) as u8], ginv.get(i, j).clone());
                    }
                    Some(img)
                }
                _ => None,
            })
            .collect();
        let mut sigma = WordVec::new();
        let find = |k: &GenKind| gens.iter().position(|x| &x.kind == k).unwrap() as u8;
        for i in 0..b {
            let t = bracket(&letter(find(&GenKind::Homology(i))), &letter(find(&GenKind::Cohomology(i))));
            add_scaled(&mut sigma, &t, &Q::one());
        }
        for (v, vert) in g.vertices().iter().enumerate() {
            for i in 0..vert.genus as usize {
                let bp = find(&GenKind::Beta { vertex: v, index: i, primed: true });
                let bb = find(&GenKind::Beta { vertex: v, index: i, primed: false });
                add_scaled(&mut sigma, &bracket(&letter(bp), &letter(bb)), &Q::one());
            }
        }
        for h in 0..g.half_edges().len() {
            add_scaled(&mut sigma, &letter(find(&GenKind::LogDelta(h))), &Q::one());
        }
        LieAlgebra {
            gens,
            degrees,
            betti: b,
            n_images,
            sigma,
            lyndon: Mutex::default(),
            ideals: Mutex::default(),
            pieces: Mutex::default(),
            ad: Mutex::default(),
            nmat: Mutex::default(),
            vspaces: Mutex::default(),
            assoc: Mutex::default(),
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn betti(&self) -> usize {
        self.betti
    }

    pub fn generator(&self, kind: &GenKind) -> Option<u8> {
        self.gens.iter().position(|x| &x.kind == kind).map(|i| i as u8)
    }

    /// The surface relation `σ = Σ[h1:i, estar:i] + Σ[betap, beta] + Σ logdelta`.
    pub fn sigma(&self) -> &WordVec {
        &self.sigma
    }

    /// Images of the generators under `N` (`None` where `N` vanishes).
    pub fn n_images(&self) -> &[Option<WordVec>] {
        &self.n_images
    }

    pub fn apply_n_free(&self, x: &WordVec) -> WordVec {
        apply_derivation(x, &self.n_images)
    }

    /// The H¹ element `Σ c_i estar:i` as a word vector.
    pub fn cohomology_element(&self, c: &[Q]) -> WordVec {
        let mut out = WordVec::new();
        for (i, x) in c.iter().enumerate() {
            words::add_term(&mut out, vec![i as u8], x.clone());
        }
        out
    }

    /// The H₁ element `Σ c_i h1:i` as a word vector.
    pub fn homology_element(&self, c: &[Q]) -> WordVec {
        let off = self.generator(&GenKind::Homology(0)).unwrap_or(0);
        let mut out = WordVec::new();
        for (i, x) in c.iter().enumerate() {
            words::add_term(&mut out, vec![off + i as u8], x.clone());
        }
        out
    }

    pub fn bidegree(&self, w: &[u8]) -> (i32, i32) {
        w.iter().fold((0, 0), |(a, b), &x| (a + self.degrees[x as usize].0, b + self.degrees[x as usize].1))
    }

    /// Standard bracketing of a Lyndon word, expanded in the tensor algebra.
    pub fn lyndon_element(&self, w: &[u8]) -> WordVec {
        if let Some(v) = self.lyndon.lock().unwrap().get(w) {
            return v.clone();
        }
        let v = if w.len() == 1 {
            letter(w[0])
        } else {
            let k = standard_split(w);
            bracket(&self.lyndon_element(&w[..k]), &self.lyndon_element(&w[k..]))
        };
        self.lyndon.lock().unwrap().insert(w.to_vec(), v.clone());
        v
    }

    /// Bracket tree of a Lyndon word over generator names.
    pub fn bracket_tree(&self, w: &[u8]) -> Value {
        if w.len() == 1 {
            return Value::String(self.gens[w[0] as usize].name.clone());
        }
        let k = standard_split(w);
        Value::Array(vec![Value::String("[,]".into()), self.bracket_tree(&w[..k]), self.bracket_tree(&w[k..])])
    }

    /// Lyndon words of the free Lie algebra in bidegree `(w, m)`.
    pub fn free_basis(&self, w: i32, m: i32) -> Vec<Word> {
        let mut ws: Vec<Word> = words_of_bidegree(&self.degrees, w, m).into_iter().filter(|x| is_lyndon(x)).collect();
        ws.sort();
        ws
    }

    /// A basis (echelonized) of the ideal generated by `σ` in bidegree `(w, m)`.
    pub fn ideal(&self, w: i32, m: i32) -> Arc<Vec<WordVec>> {
        if let Some(v) = self.ideals.lock().unwrap().get(&(w, m)) {
            return v.clone();
        }
        let rows = if w > -2 || m > -2 {
            Vec::new()
        } else if (w, m) == (-2, -2) {
            if self.sigma.is_empty() {
                Vec::new()
            } else {
                vec![self.sigma.clone()]
            }
        } else {
            let mut red = Reducer::new();
            for (a, &(dw, dm)) in self.degrees.iter().enumerate() {
                let lower = self.ideal(w - dw, m - dm);
                for y in lower.iter() {
                    red.insert(&bracket(&letter(a as u8), y), &Tag::new());
                }
            }
            red.row_vectors()
        };
        let rows = Arc::new(rows);
        self.ideals.lock().unwrap().insert((w, m), rows.clone());
        rows
    }

    pub fn piece(&self, w: i32, m: i32) -> Arc<Piece> {
        cached(&self.pieces, (w, m), || {
            let ideal = self.ideal(w, m);
            let mut reducer = Reducer::new();
            for r in ideal.iter() {
                reducer.insert(r, &Tag::new());
            }
            let relation_dim = reducer.rank();
            let free = self.free_basis(w, m);
            let free_dim = free.len();
            let mut words = Vec::new();
            let mut basis = Vec::new();
            for lw in free {
                let p = self.lyndon_element(&lw);
                if reducer.insert(&p, &Tag::from([(basis.len(), Q::one())])) {
                    words.push(lw);
                    basis.push(p);
                }
            }
            Piece { w, m, free_dim, relation_dim, words, basis, reducer }
        })
    }

    /// Matrix of `ad_a` from `(w, m)` to `(w + deg a)`, for a generator `a`.
    pub fn ad_generator(&self, a: u8, w: i32, m: i32) -> Arc<Matrix> {
        cached(&self.ad, (a, w, m), || {
            let (dw, dm) = self.degrees[a as usize];
            let src = self.piece(w, m);
            let tgt = self.piece(w + dw, m + dm);
            let cols: Vec<Vec<Q>> = (0..src.dim()).map(|j| tgt.coords(&bracket(&letter(a), src.basis_vector(j)))).collect();
            Matrix::from_cols(&cols, tgt.dim())
        })
    }

    /// Matrix of `ad_x` for `x = Σ c_i estar:i`, from `(w, m)` to `(w − 1, m)`.
    pub fn ad_cohomology(&self, c: &[Q], w: i32, m: i32) -> Matrix {
        let src = self.piece(w, m);
        let tgt = self.piece(w - 1, m);
        let mut out = Matrix::zeros(tgt.dim(), src.dim());
        for (i, x) in c.iter().enumerate() {
            if !x.is_zero() {
                out = out.add(&self.ad_generator(i as u8, w, m).scale(x));
            }
        }
        out
    }

    /// Matrix of `N` from `(w, m)` to `(w, m − 2)`.
    pub fn n_matrix(&self, w: i32, m: i32) -> Arc<Matrix> {
        cached(&self.nmat, (w, m), || {
            let src = self.piece(w, m);
            let tgt = self.piece(w, m - 2);
            let cols: Vec<Vec<Q>> = (0..src.dim()).map(|j| tgt.coords(&self.apply_n_free(src.basis_vector(j)))).collect();
            Matrix::from_cols(&cols, tgt.dim())
        })
    }

    /// `N^k` from `(w, m)` to `(w, m − 2k)`.
    pub fn n_power(&self, w: i32, m: i32, k: usize) -> Matrix {
        let mut acc = Matrix::identity(self.piece(w, m).dim());
        for step in 0..k {
            acc = self.n_matrix(w, m - 2 * step as i32).mul(&acc);
        }
        acc
    }

    pub fn v_space(&self, n: usize) -> Arc<VSpace> {
        cached(&self.vspaces, n, || {
            let w = -(n as i32);
            let ambient_dim = self.piece(w, -2).dim();
            let kernel = self.n_power(w, -2, n.saturating_sub(1)).nullspace();
            let projector = (!kernel.is_empty()).then(|| ColumnProjector::new(Matrix::from_cols(&kernel, ambient_dim)));
            VSpace { n, ambient_dim, projector }
        })
    }

    /// Checks that `N^i: gr^M_{−n+i} gr^W_{−n} → gr^M_{−n−i} gr^W_{−n}` is bijective.
    pub fn wm_check(&self, n: usize, i: usize) -> WmReport {
        let w = -(n as i32);
        let m = -(n as i32) + i as i32;
        let source_dim = self.piece(w, m).dim();
        let target_dim = self.piece(w, m - 2 * i as i32).dim();
        let rank = if i == 0 { source_dim } else { self.n_power(w, m, i).rank() };
        WmReport { n, i, source_dim, target_dim, rank }
    }

    // ----- elements -----

    pub fn element(&self, w: i32, m: i32, coords: Vec<Q>) -> LieElement {
        assert_eq!(coords.len(), self.piece(w, m).dim(), "coordinate length");
        LieElement { w, m, coords }
    }

    pub fn from_free(&self, x: &WordVec, w: i32, m: i32) -> LieElement {
        LieElement { w, m, coords: self.piece(w, m).coords(x) }
    }

    pub fn to_free(&self, x: &LieElement) -> WordVec {
        self.piece(x.w, x.m).element(&x.coords)
    }

    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let (w, m) = (x.w + y.w, x.m + y.m);
        self.from_free(&bracket(&self.to_free(x), &self.to_free(y)), w, m)
    }

    pub fn apply_n(&self, x: &LieElement) -> LieElement {
        LieElement { w: x.w, m: x.m - 2, coords: self.n_matrix(x.w, x.m).mul_vec(&x.coords) }
    }

    // ----- associative quotient in M-degree −2 -----

    pub fn assoc_piece(&self, w: i32) -> Arc<AssocPiece> {
        cached(&self.assoc, w, || {
            let mut reducer = Reducer::new();
            let k = (-w - 2).max(-1);
            if k >= 0 && !self.sigma.is_empty() {
                for split in 0..=k as usize {
                    for u in cohomology_words(self.betti, split) {
                        for v in cohomology_words(self.betti, k as usize - split) {
                            let uv = concat(&concat(&single(&u), &self.sigma), &single(&v));
                            reducer.insert(&uv, &Tag::new());
                        }
                    }
                }
            }
            let mut all = words_of_bidegree(&self.degrees, w, -2);
            all.sort();
            let mut words = Vec::new();
            for x in all {
                if reducer.insert(&single(&x), &Tag::from([(words.len(), Q::one())])) {
                    words.push(x);
                }
            }
            AssocPiece { w, words, reducer }
        })
    }
}

fn single(w: &[u8]) -> WordVec {
    WordVec::from([(w.to_vec(), Q::one())])
}

/// All words of length `k` in the H¹ letters `0..b`.
pub fn cohomology_words(b: usize, k: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|w| (0..b as u8).map(move |a| [w.as_slice(), &[a]].concat())).collect();
    }
    out
}

/// An element of one bidegree piece, in that piece's quotient basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieElement {
    pub w: i32,
    pub m: i32,
    pub coords: Vec<Q>,
}

impl LieElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}
