//! Polynomials in the fiber coordinates `u1..un` with scalar coefficients.

use std::sync::Arc;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::poly::{Mono, Poly, Ring};
use crate::rational::format_rational;
use crate::scalar::{Scalar, ScalarField};

pub type FiberPoly = Poly<Scalar>;

pub fn fzero(n: usize) -> FiberPoly {
    Poly::zero(n)
}

pub fn fconst(n: usize, c: Scalar) -> FiberPoly {
    Poly::constant(n, c)
}

/// The coordinate `u_{i+1}` (zero-based index).
pub fn u(field: &Arc<ScalarField>, n: usize, i: usize) -> FiberPoly {
    Poly::var(n, i, field.one())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector(pub Vec<u32>);

impl WeightVector {
    /// Checks positivity, monotonicity and `w_i = 1` on the first `m` entries.
    pub fn new(w: Vec<u32>, m: usize) -> Result<Self> {
        if w.contains(&0) {
            return Err(Error::BadInput("weights must be positive".into()));
        }
        if w.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::BadInput("weights must be nondecreasing".into()));
        }
        if w.iter().take(m).any(|&x| x != 1) || w.iter().skip(m).any(|&x| x == 1) {
            return Err(Error::BadInput(format!("exactly the first {m} weights must equal 1")));
        }
        Ok(WeightVector(w))
    }

    /// Weights of a growth vector `m1 < m2 < ... < mr`.
    pub fn from_growth(growth: &[usize]) -> Self {
        let mut w = Vec::new();
        let mut prev = 0;
        for (s, &ms) in growth.iter().enumerate() {
            w.extend(std::iter::repeat_n((s + 1) as u32, ms - prev));
            prev = ms;
        }
        WeightVector(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mono_degree(&self, m: &Mono) -> u32 {
        m.0.iter().zip(&self.0).map(|(e, w)| e * w).sum()
    }

    /// Layer dimensions `m_1, m_2, ...` implied by the weights.
    pub fn growth(&self) -> Vec<usize> {
        let top = self.0.last().copied().unwrap_or(0);
        (1..=top)
            .map(|s| self.0.iter().filter(|&&w| w <= s).count())
            .collect()
    }
}

pub fn weighted_degree(p: &FiberPoly, w: &WeightVector) -> Result<u32> {
    p.terms()
        .map(|(m, _)| w.mono_degree(m))
        .max()
        .ok_or(Error::ZeroPolynomial)
}

/// Smallest weighted degree among the monomials of `p`.
pub fn weighted_low_degree(p: &FiberPoly, w: &WeightVector) -> Result<u32> {
    p.terms()
        .map(|(m, _)| w.mono_degree(m))
        .min()
        .ok_or(Error::ZeroPolynomial)
}

pub fn highest_weight_part(p: &FiberPoly, w: &WeightVector) -> Result<FiberPoly> {
    let d = weighted_degree(p, w)?;
    Ok(Poly::from_terms(
        p.nvars(),
        p.terms()
            .filter(|(m, _)| w.mono_degree(m) == d)
            .map(|(m, c)| (m.clone(), c.clone())),
    ))
}

pub fn is_w_homogeneous(p: &FiberPoly, w: &WeightVector) -> bool {
    let mut degs = p.terms().map(|(m, _)| w.mono_degree(m));
    match degs.next() {
        None => true,
        Some(d) => degs.all(|e| e == d),
    }
}

/// Exact division by a diagonal positive quadratic form `P = Σ a_i u_i²`.
///
/// The first variable of `P` is eliminated: every `u_l²` is rewritten via
/// `P`, so the remainder has degree below two in `u_l`.
pub fn divide_by_p(p: &FiberPoly, pp: &FiberPoly) -> Result<Option<FiberPoly>> {
    let n = pp.nvars();
    let mut lead: Option<(usize, Scalar)> = None;
    for (m, c) in pp.terms() {
        let sq: Vec<usize> = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect();
        if sq.len() != 1 || m.0[sq[0]] != 2 {
            return Err(Error::BadDivisor("not a diagonal quadratic form".into()));
        }
        if lead.as_ref().is_none_or(|(l, _)| sq[0] < *l) {
            lead = Some((sq[0], c.clone()));
        }
    }
    let (l, c) = lead.ok_or_else(|| Error::BadDivisor("zero form".into()))?;
    let cinv = c.inv()?;
    let mut rest = pp.clone();
    let mut lm = Mono::one(n);
    lm.0[l] = 2;
    rest.add_term(lm, c.neg());
    // u_l² = (P - rest)/c
    let mut q = Poly::zero(n);
    let mut r = p.clone();
    loop {
        let top = r.degree_in(l).unwrap_or(0);
        if top < 2 {
            break;
        }
        let mut chunk = Poly::zero(n);
        for (m, a) in r.terms() {
            if m.0[l] == top {
                let mut m2 = m.clone();
                m2.0[l] -= 2;
                chunk.add_term(m2, a.times(&cinv));
            }
        }
        q = q.add(&chunk);
        r = r.sub(&chunk.mul(pp));
    }
    Ok(r.is_zero().then_some(q))
}

/// Strip as many factors of `P` as possible; returns the quotient and count.
pub fn strip_p(p: &FiberPoly, pp: &FiberPoly, max: u32) -> (FiberPoly, u32) {
    let mut cur = p.clone();
    let mut k = 0;
    while k < max && !cur.is_zero() {
        match divide_by_p(&cur, pp) {
            Ok(Some(q)) => {
                cur = q;
                k += 1;
            }
            _ => break,
        }
    }
    (cur, k)
}

/// Apply the derivation `f ↦ Σ_l X(x_l) ∂f/∂x_l` to every coefficient.
pub fn map_coeff_derivative(f: &FiberPoly, dir: &[Scalar]) -> FiberPoly {
    f.map_coeffs(|c| {
        let mut acc = c.zero_like();
        for (l, a) in dir.iter().enumerate() {
            if !a.is_zero() && !c.is_const() {
                acc = acc.add(&a.mul(&c.diff(l)));
            }
        }
        acc
    })
}

/// Evaluate the fiber variables at scalar values.
pub fn eval_u(f: &FiberPoly, point: &[Scalar], zero: &Scalar) -> Scalar {
    f.eval(point).unwrap_or_else(|| zero.clone())
}

/// Text form with `u1..un` names.
pub fn fiber_to_expr(f: &FiberPoly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in f.terms().rev().enumerate() {
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(format!("u{}", i + 1)),
                _ => factors.push(format!("u{}^{}", i + 1, e)),
            }
        }
        let (neg, cs) = match c.as_const() {
            Some(r) if r.is_negative() => (true, format_rational(&-r)),
            Some(r) => (false, format_rational(r)),
            None => (false, format!("({})", c.to_expr())),
        };
        if k > 0 {
            out.push_str(if neg { " - " } else { " + " });
        } else if neg {
            out.push('-');
        }
        let is_unit = c.as_const().is_some_and(|r| r.abs().is_one());
        if factors.is_empty() || !is_unit {
            factors.insert(0, cs);
        }
        out.push_str(&factors.join("*"));
    }
    out
}

/// `num / P^p_pow` representation of a possibly rational b-column entry.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberFrac {
    pub num: FiberPoly,
    pub p_pow: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn setup() -> (Arc<ScalarField>, Vec<FiberPoly>) {
        let f = ScalarField::new(vec![]);
        let us = (0..3).map(|i| u(&f, 3, i)).collect();
        (f, us)
    }

    #[test]
    fn weighted_degrees() {
        let (f, u) = setup();
        let w = WeightVector(vec![1, 1, 2]);
        assert_eq!(weighted_degree(&u[0].mul(&u[2]), &w).unwrap(), 3);
        assert_eq!(weighted_degree(&u[0].mul(&u[0]).add(&u[2]), &w).unwrap(), 2);
        assert_eq!(weighted_degree(&fconst(3, f.constant(int(5))), &w).unwrap(), 0);
        assert_eq!(weighted_degree(&fzero(3), &w), Err(Error::ZeroPolynomial));
        let p = u[0].mul(&u[2]).add(&u[1].mul(&u[1]));
        assert_eq!(highest_weight_part(&p, &w).unwrap(), u[0].mul(&u[2]));
    }

    #[test]
    fn division_by_quadratic_form() {
        let (_, u) = setup();
        let pp = u[0].mul(&u[0]).add(&u[1].mul(&u[1]));
        let prod = pp.mul(&u[0].add(&u[1]));
        assert_eq!(divide_by_p(&prod, &pp).unwrap(), Some(u[0].add(&u[1])));
        assert_eq!(divide_by_p(&u[0].mul(&u[0]).mul(&u[0]), &pp).unwrap(), None);
        assert_eq!(divide_by_p(&fzero(3), &pp).unwrap(), Some(fzero(3)));
        assert!(matches!(divide_by_p(&u[0], &u[0].mul(&u[1])), Err(Error::BadDivisor(_))));
    }

    #[test]
    fn growth_round_trip() {
        let w = WeightVector::from_growth(&[2, 3, 5]);
        assert_eq!(w.0, vec![1, 1, 2, 3, 3]);
        assert_eq!(w.growth(), vec![2, 3, 5]);
    }

    #[test]
    fn printing() {
        let (f, u) = setup();
        let p = u[0].mul(&u[0]).scale(&f.constant(crate::rational::rat(1, 2))).sub(&u[2]);
        assert_eq!(fiber_to_expr(&p), "1/2*u1^2 - u3");
    }

    fn arb_fiber() -> impl Strategy<Value = FiberPoly> {
        proptest::collection::vec(((0u32..3, 0u32..3, 0u32..2), -3i64..4), 1..5).prop_map(|ts| {
            let f = ScalarField::new(vec![]);
            Poly::from_terms(
                3,
                ts.into_iter().map(|((a, b, c), k)| (Mono(vec![a, b, c]), f.constant(int(k)))),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(80))]
        #[test]
        fn degree_is_additive(p in arb_fiber(), q in arb_fiber()) {
            prop_assume!(!p.is_zero() && !q.is_zero());
            let w = WeightVector(vec![1, 1, 2]);
            let pq = p.mul(&q);
            prop_assert_eq!(
                weighted_degree(&pq, &w).unwrap(),
                weighted_degree(&p, &w).unwrap() + weighted_degree(&q, &w).unwrap()
            );
            prop_assert_eq!(
                highest_weight_part(&pq, &w).unwrap(),
                highest_weight_part(&p, &w).unwrap().mul(&highest_weight_part(&q, &w).unwrap())
            );
        }

        #[test]
        fn division_round_trip(p in arb_fiber(), a in 1i64..5, b in 1i64..5) {
            let f = ScalarField::new(vec![]);
            let us: Vec<FiberPoly> = (0..3).map(|i| u(&f, 3, i)).collect();
            let pp = us[0].mul(&us[0]).scale(&f.constant(int(a)))
                .add(&us[1].mul(&us[1]).scale(&f.constant(int(b))));
            prop_assert_eq!(divide_by_p(&p.mul(&pp), &pp).unwrap(), Some(p.clone()));
            if let Some(q) = divide_by_p(&p, &pp).unwrap() {
                prop_assert_eq!(q.mul(&pp), p);
            }
        }
    }
}
