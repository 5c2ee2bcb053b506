//! Polynomials over the rationals: gcd, square roots and univariate helpers.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::{Mono, Poly};
use crate::rational::{rational_sqrt, Rational};

pub type QPoly = Poly<Rational>;

pub fn qconst(nvars: usize, c: Rational) -> QPoly {
    Poly::constant(nvars, c)
}

pub fn qone(nvars: usize) -> QPoly {
    Poly::constant(nvars, Rational::one())
}

fn lowest_var(a: &QPoly, b: &QPoly) -> Option<usize> {
    (0..a.nvars()).find(|&v| a.uses_var(v) || b.uses_var(v))
}

/// Leading coefficient (as a polynomial in the other variables) w.r.t. `var`.
fn lead_in(p: &QPoly, var: usize) -> (u32, QPoly) {
    let coeffs = p.coefficients_in(var);
    let (d, c) = coeffs.into_iter().next_back().expect("nonzero polynomial");
    (d, c)
}

fn var_power(nvars: usize, var: usize, e: u32) -> Mono {
    let mut m = Mono::one(nvars);
    m.0[var] = e;
    m
}

/// Pseudo-remainder of `a` by `b` as polynomials in `var`.
fn prem(a: &QPoly, b: &QPoly, var: usize) -> QPoly {
    let (db, lb) = lead_in(b, var);
    let one = Rational::one();
    let mut r = a.clone();
    while !r.is_zero() {
        let (dr, lr) = lead_in(&r, var);
        if dr < db {
            break;
        }
        let shift = lr.mul(&Poly::monomial(var_power(r.nvars(), var, dr - db), one.clone()));
        r = r.mul(&lb).sub(&shift.mul(b));
    }
    r
}

/// Gcd of the coefficients of `p` seen as a polynomial in `var`.
fn content_in(p: &QPoly, var: usize) -> QPoly {
    let mut g: Option<QPoly> = None;
    for (_, c) in p.coefficients_in(var) {
        g = Some(match g {
            None => normalize(&c),
            Some(g) => gcd(&g, &c),
        });
        if g.as_ref().is_some_and(|g| g.is_constant()) {
            break;
        }
    }
    g.unwrap_or_else(|| Poly::zero(p.nvars()))
}

/// Scale so the grlex-leading coefficient is one.
pub fn normalize(p: &QPoly) -> QPoly {
    if p.is_zero() {
        return p.clone();
    }
    p.monic()
}

/// Monic greatest common divisor over the rationals (zero iff both are zero).
pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    if a.is_constant() || b.is_constant() {
        return qone(a.nvars());
    }
    if a == b {
        return normalize(a);
    }
    let only_a: Vec<usize> = (0..a.nvars()).filter(|&v| a.uses_var(v) && !b.uses_var(v)).collect();
    let only_b: Vec<usize> = (0..a.nvars()).filter(|&v| b.uses_var(v) && !a.uses_var(v)).collect();
    if !only_a.is_empty() {
        return gcd_with_parts(b, a, &only_a);
    }
    if !only_b.is_empty() {
        return gcd_with_parts(a, b, &only_b);
    }
    let v = lowest_var(a, b).expect("nonconstant input");
    let (ua, ub) = (a.uses_var(v), b.uses_var(v));
    if !ua {
        return gcd(a, &content_in(b, v));
    }
    if !ub {
        return gcd(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let gc = gcd(&ca, &cb);
    let mut p = a.exact_div(&ca).expect("content divides");
    let mut q = b.exact_div(&cb).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = prem(&p, &q, v);
        if r.is_zero() {
            break;
        }
        if !r.uses_var(v) {
            return gc;
        }
        let cr = content_in(&r, v);
        p = q;
        q = normalize(&r.exact_div(&cr).expect("content divides"));
    }
    let cq = content_in(&q, v);
    let pq = q.exact_div(&cq).expect("content divides");
    normalize(&gc.mul(&pq))
}

/// Gcd of `a` with all coefficients of `b` taken w.r.t. `vars` (which `a`
/// does not involve).
fn gcd_with_parts(a: &QPoly, b: &QPoly, vars: &[usize]) -> QPoly {
    let mut parts: Vec<QPoly> = split_by_vars(b, vars).into_values().collect();
    parts.sort_by_key(|p| (p.total_degree(), p.num_terms()));
    let mut g = normalize(a);
    for p in parts {
        g = gcd(&g, &p);
        if g.is_constant() {
            break;
        }
    }
    g
}

pub fn lcm(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero(a.nvars());
    }
    let g = gcd(a, b);
    normalize(&a.exact_div(&g).expect("gcd divides").mul(b))
}

/// Exact square root when `p` is the square of a polynomial with rational
/// coefficients. The root returned has positive leading coefficient.
pub fn poly_sqrt(p: &QPoly) -> Option<QPoly> {
    if p.is_zero() {
        return Some(p.clone());
    }
    let (lm, lc) = p.leading().map(|(m, c)| (m.clone(), c.clone()))?;
    if lm.0.iter().any(|e| e % 2 == 1) {
        return None;
    }
    let c0 = rational_sqrt(&lc)?;
    let m0 = Mono(lm.0.iter().map(|e| e / 2).collect());
    let lead = Poly::monomial(m0.clone(), c0.clone());
    let two_lead_c = &c0 + &c0;
    let mut q = lead.clone();
    let mut last = m0.clone();
    for _ in 0..=p.num_terms() {
        let r = p.sub(&q.mul(&q));
        if r.is_zero() {
            return Some(q);
        }
        let (rm, rc) = r.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        if !m0.divides(&rm) {
            return None;
        }
        let t = m0.quotient_of(&rm);
        if t >= last {
            return None;
        }
        last = t.clone();
        q.add_term(t, &rc / &two_lead_c);
    }
    None
}

/// Dense univariate representation (index = power) of a polynomial in `var`
/// with constant coefficients.
pub fn to_univariate(p: &QPoly, var: usize) -> Option<Vec<Rational>> {
    let deg = p.degree_in(var).unwrap_or(0) as usize;
    let mut out = vec![Rational::zero(); deg + 1];
    for (m, c) in p.terms() {
        if m.0.iter().enumerate().any(|(i, &e)| i != var && e > 0) {
            return None;
        }
        out[m.0[var] as usize] = c.clone();
    }
    Some(out)
}

pub fn from_univariate(nvars: usize, var: usize, coeffs: &[Rational]) -> QPoly {
    let mut p = Poly::zero(nvars);
    for (e, c) in coeffs.iter().enumerate() {
        p.add_term(var_power(nvars, var, e as u32), c.clone());
    }
    p
}

/// All rational roots of a univariate polynomial with rational coefficients,
/// with multiplicities.
pub fn rational_roots(coeffs: &[Rational]) -> Vec<(Rational, usize)> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let mut c: Vec<Rational> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    let mut roots = Vec::new();
    if c.len() <= 1 {
        return roots;
    }
    let mut zero_mult = 0;
    while c.len() > 1 && c[0].is_zero() {
        c.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }
    // clear denominators to an integer polynomial
    let mut l = BigInt::one();
    for x in &c {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = c.iter().map(|x| (x * &l).to_integer()).collect();
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    let divisors = |n: &BigInt| -> Vec<BigInt> {
        let n = num_traits::Signed::abs(n);
        let mut ds = Vec::new();
        let mut i = BigInt::one();
        while &i * &i <= n {
            if (&n % &i).is_zero() {
                ds.push(i.clone());
                ds.push(&n / &i);
            }
            i += 1;
        }
        ds.sort();
        ds.dedup();
        ds
    };
    let mut cur: Vec<Rational> = c.clone();
    let mut cands = Vec::new();
    for p in divisors(&a0) {
        for q in divisors(&an) {
            let r = Rational::new(p.clone(), q.clone());
            cands.push(r.clone());
            cands.push(-r);
        }
    }
    cands.sort();
    cands.dedup();
    for r in cands {
        let mut mult = 0;
        loop {
            if cur.len() <= 1 {
                break;
            }
            let (q, rem) = synthetic_div(&cur, &r);
            if rem.is_zero() {
                cur = q;
                mult += 1;
            } else {
                break;
            }
        }
        if mult > 0 {
            roots.push((r, mult));
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    roots
}

/// Divide by `(t - r)`: returns quotient coefficients and remainder.
pub fn synthetic_div(coeffs: &[Rational], r: &Rational) -> (Vec<Rational>, Rational) {
    let n = coeffs.len();
    let mut q = vec![Rational::zero(); n - 1];
    let mut acc = Rational::zero();
    for i in (0..n).rev() {
        acc = &acc * r + &coeffs[i];
        if i > 0 {
            q[i - 1] = acc.clone();
        }
    }
    (q, acc)
}

/// Groups terms by the exponents of the selected variables.
pub fn split_by_vars(p: &QPoly, vars: &[usize]) -> BTreeMap<Vec<u32>, QPoly> {
    let mut out: BTreeMap<Vec<u32>, QPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key: Vec<u32> = vars.iter().map(|&v| m.0[v]).collect();
        let mut rest = m.clone();
        for &v in vars {
            rest.0[v] = 0;
        }
        out.entry(key)
            .or_insert_with(|| Poly::zero(p.nvars()))
            .add_term(rest, c.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn x(i: usize) -> QPoly {
        Poly::var(3, i, Rational::one())
    }
    fn c(v: i64) -> QPoly {
        qconst(3, int(v))
    }

    #[test]
    fn gcd_multivariate() {
        let f = x(0).add(&x(1)).mul(&x(2).sub(&c(1)));
        let g = x(0).add(&x(1)).mul(&x(0).add(&c(3)));
        assert_eq!(gcd(&f, &g), x(0).add(&x(1)));
        assert_eq!(gcd(&x(0), &x(1)), qone(3));
    }

    #[test]
    fn square_roots() {
        let p = x(0).sub(&x(1).scale_int(2)).add(&c(3));
        let sq = p.mul(&p).scale(&rat(9, 4));
        let r = poly_sqrt(&sq).unwrap();
        assert_eq!(r.mul(&r), sq);
        assert!(poly_sqrt(&x(0).add(&c(1))).is_none());
        assert!(poly_sqrt(&c(3)).is_none());
    }

    #[test]
    fn roots_with_multiplicity() {
        // (t-1)^2 (2t+3) = 2t^3 - t^2 - 4t + 3
        let r = rational_roots(&[int(3), int(-4), int(-1), int(2)]);
        assert_eq!(r, vec![(rat(-3, 2), 1), (int(1), 2)]);
    }

    fn small_poly() -> impl Strategy<Value = QPoly> {
        proptest::collection::vec(((0u32..3, 0u32..3, 0u32..2), -4i64..5), 1..4).prop_map(|ts| {
            Poly::from_terms(3, ts.into_iter().map(|((a, b, c), k)| (Mono(vec![a, b, c]), int(k))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn gcd_divides_both(a in small_poly(), b in small_poly(), f in small_poly()) {
            let fa = a.mul(&f);
            let fb = b.mul(&f);
            let g = gcd(&fa, &fb);
            if !fa.is_zero() {
                prop_assert!(fa.exact_div(&g).is_some());
            }
            if !fb.is_zero() {
                prop_assert!(fb.exact_div(&g).is_some());
            }
            if !f.is_zero() && !g.is_zero() {
                prop_assert!(g.exact_div(&normalize(&f)).is_some());
            }
        }
    }
}
