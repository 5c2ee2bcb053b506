//! Sparse multivariate polynomials over an arbitrary coefficient ring.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors under the graded
//! lexicographic order, so the leading term is always the last entry and the
//! printed form of a polynomial is canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Minimal ring interface needed by [`Poly`].
///
/// Coefficient types may carry a context (the scalar field does), so zero and
/// one are produced from an existing value rather than out of thin air.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn is_nil(&self) -> bool;
    fn is_identity(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
    fn scale_int(&self, k: i64) -> Self;
}

/// A ring in which every nonzero element has an inverse.
pub trait Field: Ring {
    fn inverse(&self) -> Option<Self>;

    fn divide(&self, other: &Self) -> Option<Self> {
        other.inverse().map(|inv| self.times(&inv))
    }
}

/// Exponent vector ordered by total degree, then lexicographically with the
/// first variable most significant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Mono) -> Mono {
        Mono(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn gcd(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C: Ring> {
    nvars: usize,
    terms: BTreeMap<Mono, C>,
}

impl<C: Ring> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(Mono::one(nvars), c)
    }

    pub fn monomial(mono: Mono, c: C) -> Self {
        let nvars = mono.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_nil() {
            terms.insert(mono, c);
        }
        Poly { nvars, terms }
    }

    /// The variable `x_i` with coefficient `one`.
    pub fn var(nvars: usize, i: usize, one: C) -> Self {
        Self::monomial(Mono::var(nvars, i), one)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Mono::is_one)
    }

    /// Constant coefficient, if the polynomial is a constant (zero gives `None`).
    pub fn as_constant(&self) -> Option<&C> {
        if self.terms.len() == 1 && self.is_constant() {
            self.terms.values().next()
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Mono, C)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Mono) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn leading(&self) -> Option<(&Mono, &C)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_nil() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.plus(&c);
                if s.is_nil() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.negate());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.negate())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.times(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_nil() {
            return Poly::zero(self.nvars);
        }
        let mut out = Poly::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.times(c));
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.scale_int(k));
        }
        out
    }

    pub fn mul_term(&self, mono: &Mono, c: &C) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.mul(mono), a.times(c));
        }
        out
    }

    pub fn pow(&self, e: u32, one: &C) -> Self {
        let mut acc = Poly::constant(self.nvars, one.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] -= 1;
            out.add_term(m2, c.scale_int(e as i64));
        }
        out
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&C) -> C) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Change coefficient ring (terms whose image is zero are dropped).
    pub fn map_into<D: Ring>(&self, mut f: impl FnMut(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Rewrite exponent vectors (e.g. to embed into more variables).
    pub fn map_monos(&self, nvars: usize, mut f: impl FnMut(&Mono) -> Mono) -> Self {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    /// Evaluate with every variable replaced by a coefficient value.
    pub fn eval(&self, point: &[C]) -> Option<C> {
        let mut acc: Option<C> = None;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.times(&point[i]);
                }
            }
            acc = Some(match acc {
                Some(a) => a.plus(&t),
                None => t,
            });
        }
        acc
    }

    /// Substitute some variables by polynomials (same variable set).
    pub fn substitute(&self, subs: &[(usize, Poly<C>)], one: &C) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut t = Poly::constant(self.nvars, c.clone());
            for (var, p) in subs {
                let e = rest.0[*var];
                if e > 0 {
                    rest.0[*var] = 0;
                    t = t.mul(&p.pow(e, one));
                }
            }
            out = out.add(&t.mul_term(&rest, one));
        }
        out
    }

    /// Split by the exponent of `var`: returns `(exponent, coefficient)` pairs
    /// where coefficients no longer involve `var`.
    pub fn coefficients_in(&self, var: usize) -> BTreeMap<u32, Poly<C>> {
        let mut out: BTreeMap<u32, Poly<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut m2 = m.clone();
            m2.0[var] = 0;
            out.entry(e)
                .or_insert_with(|| Poly::zero(self.nvars))
                .add_term(m2, c.clone());
        }
        out
    }
}

impl<C: Field> Poly<C> {
    /// Multivariate division by a single divisor under the graded order.
    /// Returns `(quotient, remainder)`; the remainder is zero iff `divisor`
    /// divides `self`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let (lm, lc) = divisor.leading().expect("division by zero polynomial");
        let lm = lm.clone();
        let lc_inv = lc.inverse().expect("leading coefficient not invertible");
        let mut q = Poly::zero(self.nvars);
        let mut r = Poly::zero(self.nvars);
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.iter().next_back() {
            let (m, c) = (m.clone(), c.clone());
            if lm.divides(&m) {
                let t = lm.quotient_of(&m);
                let tc = c.times(&lc_inv);
                p = p.sub(&divisor.mul_term(&t, &tc));
                q.add_term(t, tc);
            } else {
                p.terms.remove(&m);
                r.add_term(m, c);
            }
        }
        (q, r)
    }

    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(Poly::zero(self.nvars));
        }
        let (q, r) = self.div_rem(divisor);
        r.is_zero().then_some(q)
    }

    /// Scale so that the leading coefficient is one.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, lc)) => {
                let inv = lc.inverse().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, Rational};

    fn x(i: usize) -> Poly<Rational> {
        Poly::var(3, i, rat(1, 1))
    }

    #[test]
    fn grlex_leading_term() {
        let p = x(0).add(&x(1).mul(&x(1)));
        assert_eq!(p.leading().unwrap().0, &Mono(vec![0, 2, 0]));
    }

    #[test]
    fn division_detects_divisibility() {
        let a = x(0).add(&x(1));
        let b = x(0).sub(&x(2));
        let prod = a.mul(&b);
        assert_eq!(prod.exact_div(&a), Some(b.clone()));
        assert!(prod.add(&x(2)).exact_div(&a).is_none());
    }

    #[test]
    fn derivative_and_pow() {
        let one = rat(1, 1);
        let p = x(0).add(&x(1)).pow(3, &one);
        let d = p.derivative(0);
        let expect = x(0).add(&x(1)).pow(2, &one).scale_int(3);
        assert_eq!(d, expect);
    }
}
