//! Words, sparse word vectors and Lyndon words over a finite ordered alphabet.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rational::Q;

pub type Word = Vec<u8>;

/// A sparse linear combination of words; zero coefficients are never stored.
pub type WordVec = BTreeMap<Word, Q>;

pub fn letter(a: u8) -> WordVec {
    WordVec::from([(vec![a], Q::from_integer(1.into()))])
}

pub fn add_term(v: &mut WordVec, w: Word, c: Q) {
    if c.is_zero() {
        return;
    }
    match v.entry(w) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

pub fn add_scaled(acc: &mut WordVec, x: &WordVec, c: &Q) {
    if c.is_zero() {
        return;
    }
    for (w, a) in x {
        add_term(acc, w.clone(), a * c);
    }
}

pub fn scaled(x: &WordVec, c: &Q) -> WordVec {
    let mut out = WordVec::new();
    add_scaled(&mut out, x, c);
    out
}

pub fn sum(a: &WordVec, b: &WordVec) -> WordVec {
    let mut out = a.clone();
    add_scaled(&mut out, b, &Q::from_integer(1.into()));
    out
}

pub fn concat(a: &WordVec, b: &WordVec) -> WordVec {
    let mut out = WordVec::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut w = u.clone();
            w.extend_from_slice(v);
            add_term(&mut out, w, x * y);
        }
    }
    out
}

/// The commutator `ab − ba` in the tensor algebra.
pub fn bracket(a: &WordVec, b: &WordVec) -> WordVec {
    let mut out = concat(a, b);
    let ba = concat(b, a);
    add_scaled(&mut out, &ba, &-Q::from_integer(1.into()));
    out
}

/// Applies a derivation given by its values on letters (`None` for zero).
pub fn apply_derivation(x: &WordVec, images: &[Option<WordVec>]) -> WordVec {
    let mut out = WordVec::new();
    for (w, c) in x {
        for (i, &a) in w.iter().enumerate() {
            let Some(img) = &images[a as usize] else { continue };
            for (v, d) in img {
                let mut nw = w[..i].to_vec();
                nw.extend_from_slice(v);
                nw.extend_from_slice(&w[i + 1..]);
                add_term(&mut out, nw, c * d);
            }
        }
    }
    out
}

/// Applies the algebra homomorphism sending each letter `a` to `images[a]`.
pub fn substitute(x: &WordVec, images: &[WordVec]) -> WordVec {
    let mut out = WordVec::new();
    for (w, c) in x {
        let mut acc = WordVec::from([(Word::new(), c.clone())]);
        for &a in w {
            acc = concat(&acc, &images[a as usize]);
            if acc.is_empty() {
                break;
            }
        }
        for (v, d) in acc {
            add_term(&mut out, v, d);
        }
    }
    out
}

/// A word is Lyndon when it is strictly smaller than each of its proper suffixes.
pub fn is_lyndon(w: &[u8]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// Split point of the standard factorization `w = uv`, with `v` the longest proper Lyndon suffix.
pub fn standard_split(w: &[u8]) -> usize {
    (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("words of length ≥ 2 have a Lyndon suffix")
}

/// All words whose letters' degrees sum to `(w, m)`; every letter has negative weight.
pub fn words_of_bidegree(degrees: &[(i32, i32)], w: i32, m: i32) -> Vec<Word> {
    fn go(degrees: &[(i32, i32)], rw: i32, rm: i32, cur: &mut Word, out: &mut Vec<Word>) {
        if rw == 0 {
            if rm == 0 && !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        for (a, &(dw, dm)) in degrees.iter().enumerate() {
            // Remaining degrees are ≤ 0; each step must not overshoot.
            if dw < rw || dm < rm {
                continue;
            }
            cur.push(a as u8);
            go(degrees, rw - dw, rm - dm, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if w < 0 && m <= 0 {
        go(degrees, w, m, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyndon_examples() {
        assert!(is_lyndon(&[0]));
        assert!(is_lyndon(&[0, 1]));
        assert!(!is_lyndon(&[1, 0]));
        assert!(is_lyndon(&[0, 0, 1]));
        assert!(!is_lyndon(&[0, 1, 0]));
        assert!(!is_lyndon(&[0, 0]));
        assert!(is_lyndon(&[0, 1, 1]));
    }

    #[test]
    fn lyndon_count_matches_necklace_formula() {
        // Binary Lyndon words of length 6: (1/6) Σ_{d|6} μ(d) 2^{6/d} = 9.
        let degs = [(-1, 0), (-1, 0)];
        let n = words_of_bidegree(&degs, -6, 0).into_iter().filter(|w| is_lyndon(w)).count();
        assert_eq!(n, 9);
    }

    #[test]
    fn standard_factorization() {
        assert_eq!(standard_split(&[0, 0, 1]), 1);
        assert_eq!(standard_split(&[0, 1, 1]), 2);
        assert_eq!(standard_split(&[0, 1, 0, 1, 1]), 2);
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let a = letter(0);
        let b = sum(&letter(1), &concat(&letter(0), &letter(2)));
        assert_eq!(bracket(&a, &b), scaled(&bracket(&b, &a), &-Q::from_integer(1.into())));
    }
}
