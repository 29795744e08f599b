//! Univariate polynomials with exact rational coefficients, constant term first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_q, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        Poly::new(vec![c])
    }

    /// The identity polynomial `s`.
    pub fn x() -> Self {
        Poly::new(vec![Q::zero(), Q::one()])
    }

    pub fn linear(c0: Q, c1: Q) -> Self {
        Poly::new(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, s: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * q(k as i64)).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Poly {
        let mut out = vec![Q::zero()];
        out.extend(self.coeffs.iter().enumerate().map(|(k, c)| c / q(k as i64 + 1)));
        Poly::new(out)
    }

    /// `∫_0^l p(s) ds`.
    pub fn integral(&self, l: &Q) -> Q {
        self.antiderivative().eval(l)
    }

    /// `s ↦ p(a + b s)`.
    pub fn compose_affine(&self, a: &Q, b: &Q) -> Poly {
        let inner = Poly::linear(a.clone(), b.clone());
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Poly::constant(c.clone());
        }
        acc
    }

    /// `s ↦ p(l − s)`, the same function read along the reversed edge.
    pub fn reflect(&self, l: &Q) -> Poly {
        self.compose_affine(l, &-Q::one())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => fmt_q(c),
                1 => format!("{}*s", fmt_q(c)),
                _ => format!("{}*s^{k}", fmt_q(c)),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn trims_and_degrees() {
        assert_eq!(p(&[1, 0, 0]).degree(), Some(0));
        assert_eq!(p(&[0]).degree(), None);
    }

    #[test]
    fn calculus() {
        let f = p(&[0, 1, -1]);
        assert_eq!(f.derivative(), p(&[1, -2]));
        assert_eq!(f.integral(&q(1)), qf(1, 6));
        assert_eq!(f.antiderivative().derivative(), f);
    }

    #[test]
    fn reflection_is_involutive() {
        let f = p(&[3, -1, 2, 5]);
        let l = qf(7, 3);
        assert_eq!(f.reflect(&l).reflect(&l), f);
        assert_eq!(f.reflect(&l).eval(&q(1)), f.eval(&(&l - q(1))));
    }

    #[test]
    fn product_evaluates_pointwise() {
        let a = p(&[1, 2]);
        let b = p(&[-3, 0, 1]);
        let s = qf(5, 4);
        assert_eq!((&a * &b).eval(&s), a.eval(&s) * b.eval(&s));
    }
}
