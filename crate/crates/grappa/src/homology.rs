//! Edge space, first homology, the cycle pairing and the functionals `e*`.

use std::collections::VecDeque;

use num_traits::{One, Zero};

use crate::graph::{Dart, ReductionGraph};
use crate::linalg::Matrix;
use crate::rational::Q;

/// A chain in the edge space, dense over the unoriented edges (stored orientation).
pub type EdgeChain = Vec<Q>;

pub fn dart_chain(g: &ReductionGraph, d: Dart) -> EdgeChain {
    let mut c = vec![Q::zero(); g.num_edges()];
    c[d.edge] = Q::from_integer(d.sign().into());
    c
}

/// `∂(e) = t(e) − s(e)`, dense over vertices.
pub fn boundary(g: &ReductionGraph, c: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); g.num_vertices()];
    for (e, x) in c.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let edge = &g.edges()[e];
        out[edge.dst] += x;
        out[edge.src] -= x;
    }
    out
}

/// `⟨a, b⟩ = Σ a_e b_e l(e)`.
pub fn edge_pairing(g: &ReductionGraph, a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).enumerate().filter(|(_, (x, y))| !x.is_zero() && !y.is_zero()).map(|(e, (x, y))| x * y * g.length(e)).sum()
}

/// Homology data for a fixed breadth-first spanning tree.
///
/// The tree is grown from vertex 0 (smallest id), scanning incident edges in id
/// order. Basis cycle `i` is the fundamental loop of the `i`-th non-tree edge,
/// traversed along its stored orientation.
#[derive(Debug, Clone)]
pub struct Homology {
    tree: Vec<bool>,
    parent: Vec<Option<Dart>>,
    depth: Vec<usize>,
    non_tree: Vec<usize>,
    basis: Vec<EdgeChain>,
    gram: Matrix,
    gram_inv: Matrix,
    lambda: Matrix,
}

impl Homology {
    pub fn new(g: &ReductionGraph) -> Self {
        let n = g.num_vertices();
        let m = g.num_edges();
        let mut tree = vec![false; m];
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for e in 0..m {
                let edge = &g.edges()[e];
                if edge.is_loop() {
                    continue;
                }
                let d = if edge.src == v {
                    Dart { edge: e, forward: true }
                } else if edge.dst == v {
                    Dart { edge: e, forward: false }
                } else {
                    continue;
                };
                let w = g.dart_dst(d);
                if !seen[w] {
                    seen[w] = true;
                    tree[e] = true;
                    parent[w] = Some(d);
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut root_chain = vec![vec![Q::zero(); m]; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| depth[v]);
        for &v in &order {
            if let Some(d) = parent[v] {
                let mut c = root_chain[g.dart_src(d)].clone();
                c[d.edge] += Q::from_integer(d.sign().into());
                root_chain[v] = c;
            }
        }
        let non_tree: Vec<usize> = (0..m).filter(|&e| !tree[e]).collect();
        let basis: Vec<EdgeChain> = non_tree
            .iter()
            .map(|&e| {
                let edge = &g.edges()[e];
                let mut c: EdgeChain = root_chain[edge.src].iter().zip(&root_chain[edge.dst]).map(|(a, b)| a - b).collect();
                c[e] += Q::one();
                c
            })
            .collect();
        let b = basis.len();
        let mut gram = Matrix::zeros(b, b);
        for i in 0..b {
            for j in 0..b {
                gram.set(i, j, edge_pairing(g, &basis[i], &basis[j]));
            }
        }
        let gram_inv = gram.inverse().expect("cycle pairing is positive definite");
        // λ_{e,e'} = Σ_{i,j} e*(γ_i) G⁻¹_{ij} e'*(γ_j)
        let coef = Matrix::from_cols(&basis, m);
        let lambda = coef.mul(&gram_inv).mul(&coef.transpose());
        Homology { tree, parent, depth, non_tree, basis, gram, gram_inv, lambda }
    }

    pub fn betti(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[EdgeChain] {
        &self.basis
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.tree[e]
    }

    /// The non-tree edge defining each basis cycle.
    pub fn non_tree_edges(&self) -> &[usize] {
        &self.non_tree
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn gram_inv(&self) -> &Matrix {
        &self.gram_inv
    }

    /// Coordinates of a cycle in the basis, or `None` if `c` is not a cycle.
    pub fn coords(&self, g: &ReductionGraph, c: &[Q]) -> Option<Vec<Q>> {
        if boundary(g, c).iter().any(|x| !x.is_zero()) {
            return None;
        }
        Some(self.non_tree.iter().map(|&e| c[e].clone()).collect())
    }

    pub fn chain_of(&self, coords: &[Q]) -> EdgeChain {
        let m = self.tree.len();
        let mut c = vec![Q::zero(); m];
        for (x, gamma) in coords.iter().zip(&self.basis) {
            if x.is_zero() {
                continue;
            }
            for (ce, ge) in c.iter_mut().zip(gamma) {
                *ce += x * ge;
            }
        }
        c
    }

    /// `e*` in the dual basis: `e*(γ_i)`; zero for bridges.
    pub fn estar(&self, e: usize) -> Vec<Q> {
        self.basis.iter().map(|gamma| gamma[e].clone()).collect()
    }

    pub fn dart_estar(&self, d: Dart) -> Vec<Q> {
        let v = self.estar(d.edge);
        if d.forward {
            v
        } else {
            v.into_iter().map(|x| -x).collect()
        }
    }

    /// `N(ξ_i) = Σ_j (G⁻¹)_{ij} γ_j`: a functional in dual coordinates to H₁ coordinates.
    pub fn n_on_functional(&self, xi: &[Q]) -> Vec<Q> {
        self.gram_inv.transpose().mul_vec(xi)
    }

    /// `N(e*) = Σ_{e'} λ_{e,e'} e'` as an edge chain.
    pub fn n_of_estar(&self, e: usize) -> EdgeChain {
        self.lambda.row(e).to_vec()
    }

    /// The table `λ_{e,e'}` over unoriented edges.
    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    /// `c = π(c) + (c − π(c))` with `π` the orthogonal projection onto H₁.
    pub fn orth_decompose(&self, g: &ReductionGraph, c: &[Q]) -> (EdgeChain, EdgeChain) {
        let pairings: Vec<Q> = self.basis.iter().map(|gamma| edge_pairing(g, c, gamma)).collect();
        let coords = self.gram_inv.mul_vec(&pairings);
        let h = self.chain_of(&coords);
        let d = c.iter().zip(&h).map(|(a, b)| a - b).collect();
        (h, d)
    }

    /// Darts of the tree path from `u` to `v`.
    pub fn tree_path(&self, g: &ReductionGraph, u: usize, v: usize) -> Vec<Dart> {
        let (mut a, mut b) = (u, v);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let d = self.parent[a].expect("non-root vertex has a parent");
                up.push(d.inverse());
                a = g.dart_src(d);
            } else {
                let d = self.parent[b].expect("non-root vertex has a parent");
                down.push(d);
                b = g.dart_src(d);
            }
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// The closed walk at vertex 0 realizing basis cycle `i`.
    pub fn fundamental_loop(&self, g: &ReductionGraph, i: usize) -> Vec<Dart> {
        let e = self.non_tree[i];
        let edge = &g.edges()[e];
        let mut w = self.tree_path(g, 0, edge.src);
        w.push(Dart::fwd(e));
        w.extend(self.tree_path(g, edge.dst, 0));
        w
    }
}
