//! Incremental semi-echelon reduction of word vectors with coordinate tags.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::words::{add_scaled, add_term, Word, WordVec};
use crate::rational::Q;

/// Sparse coordinate vector in a quotient basis.
pub type Tag = BTreeMap<usize, Q>;

fn tag_add(acc: &mut Tag, t: &Tag, c: &Q) {
    for (k, x) in t {
        let e = acc.entry(*k).or_insert_with(Q::zero);
        *e += x * c;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    rest: WordVec,
    tag: Tag,
}

/// Rows keyed by their largest word, each with leading coefficient 1.
///
/// Every row carries a tag: the quotient coordinates it is congruent to.
/// Rows spanning the relations have empty tags.
#[derive(Debug, Clone, Default)]
pub struct Reducer {
    rows: BTreeMap<Word, Row>,
}

impl Reducer {
    pub fn new() -> Self {
        Reducer::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Returns `(remainder, tag)` with `x ≡ tag + remainder` and no remainder word a pivot.
    pub fn reduce(&self, x: &WordVec) -> (WordVec, Tag) {
        let mut x = x.clone();
        let mut rem = WordVec::new();
        let mut tag = Tag::new();
        while let Some((w, c)) = x.pop_last() {
            match self.rows.get(&w) {
                Some(row) => {
                    add_scaled(&mut x, &row.rest, &-&c);
                    tag_add(&mut tag, &row.tag, &c);
                }
                None => {
                    rem.insert(w, c);
                }
            }
        }
        (rem, tag)
    }

    /// Adds `x`, congruent to `tag`, as a new row; returns `false` if dependent.
    pub fn insert(&mut self, x: &WordVec, tag: &Tag) -> bool {
        let (mut rem, t) = self.reduce(x);
        let Some((pivot, lead)) = rem.pop_last() else {
            return false;
        };
        let inv = lead.recip();
        let rest: WordVec = rem.into_iter().map(|(w, c)| (w, c * &inv)).collect();
        let mut row_tag = Tag::new();
        tag_add(&mut row_tag, tag, &inv);
        tag_add(&mut row_tag, &t, &-&inv);
        self.rows.insert(pivot, Row { rest, tag: row_tag });
        true
    }

    /// The row vectors themselves, leading word included.
    pub fn row_vectors(&self) -> Vec<WordVec> {
        self.rows
            .iter()
            .map(|(p, r)| {
                let mut v = r.rest.clone();
                add_term(&mut v, p.clone(), Q::one());
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn wv(terms: &[(&[u8], i64)]) -> WordVec {
        let mut v = WordVec::new();
        for (w, c) in terms {
            add_term(&mut v, w.to_vec(), q(*c));
        }
        v
    }

    #[test]
    fn quotient_coordinates() {
        let mut r = Reducer::new();
        // relation: [0,1] = [1,0]
        assert!(r.insert(&wv(&[(&[0, 1], 1), (&[1, 0], -1)]), &Tag::new()));
        let t0 = Tag::from([(0, q(1))]);
        assert!(r.insert(&wv(&[(&[0, 1], 1)]), &t0));
        assert!(!r.insert(&wv(&[(&[1, 0], 2)]), &Tag::from([(1, q(1))])));
        let (rem, tag) = r.reduce(&wv(&[(&[1, 0], 3)]));
        assert!(rem.is_empty());
        assert_eq!(tag, Tag::from([(0, q(3))]));
    }
}
