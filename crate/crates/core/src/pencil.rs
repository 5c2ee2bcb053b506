//! Skew-symmetric pencils `λA + μB`: Pfaffians, minor gcds, elementary
//! divisors, minimal indices, and the decomposability test for step-two
//! graded algebras described by their space of forms.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::poly::{Mono, Poly};
use crate::qpoly::{self, rational_roots, QPoly};
use crate::rational::{format_rational, rational_sqrt, Rational};

/// Homogeneous form in `(λ, μ)`; `coeffs[i]` multiplies `λ^{d-i} μ^i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryForm {
    pub coeffs: Vec<Rational>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a binary form has a degree");
        BinaryForm { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm { coeffs: vec![Rational::zero(); degree + 1] }
    }

    pub fn one() -> Self {
        BinaryForm { coeffs: vec![Rational::one()] }
    }

    /// `aλ + bμ`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        BinaryForm { coeffs: vec![a, b] }
    }

    pub fn lambda() -> Self {
        Self::linear(Rational::one(), Rational::zero())
    }

    pub fn mu() -> Self {
        Self::linear(Rational::zero(), Rational::one())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() && self.degree() != o.degree() {
            return o.clone();
        }
        if o.is_zero() && self.degree() != o.degree() {
            return self.clone();
        }
        assert_eq!(self.degree(), o.degree(), "adding forms of different degree");
        BinaryForm { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> Self {
        BinaryForm { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        BinaryForm { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![Rational::zero(); self.degree() + o.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BinaryForm { coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, l: &Rational, m: &Rational) -> Rational {
        let d = self.degree();
        let mut s = Rational::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                s += c * num_traits::pow(l.clone(), d - i) * num_traits::pow(m.clone(), i);
            }
        }
        s
    }

    fn to_qpoly(&self) -> QPoly {
        let d = self.degree() as u32;
        Poly::from_terms(
            2,
            self.coeffs.iter().enumerate().map(|(i, c)| (Mono(vec![d - i as u32, i as u32]), c.clone())),
        )
    }

    fn from_qpoly(p: &QPoly, degree: usize) -> Self {
        let mut out = vec![Rational::zero(); degree + 1];
        for (m, c) in p.terms() {
            out[m.0[1] as usize] = c.clone();
        }
        BinaryForm { coeffs: out }
    }

    /// Scaled so the first nonzero coefficient (in powers of `λ`, descending) is one.
    pub fn normalized(&self) -> Self {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(c) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Normalized gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.normalized();
        }
        if o.is_zero() {
            return self.normalized();
        }
        let g = qpoly::gcd(&self.to_qpoly(), &o.to_qpoly());
        Self::from_qpoly(&g, g.total_degree().unwrap_or(0) as usize).normalized()
    }

    pub fn exact_div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() || o.degree() > self.degree() {
            return None;
        }
        let q = self.to_qpoly().exact_div(&o.to_qpoly())?;
        Some(Self::from_qpoly(&q, self.degree() - o.degree()))
    }

    /// Discriminant `b² − 4ac` of a quadratic form.
    pub fn discriminant(&self) -> Option<Rational> {
        (self.degree() == 2).then(|| {
            let (a, b, c) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
            b * b - Rational::from_integer(4.into()) * a * c
        })
    }

    /// Irreducible factors over the rationals with multiplicities, each normalized.
    pub fn factor(&self) -> Vec<(BinaryForm, u32)> {
        let d = self.degree();
        if self.is_zero() || d == 0 {
            return vec![];
        }
        let a = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        let b = self.coeffs.iter().rev().take_while(|c| c.is_zero()).count();
        let mut out = Vec::new();
        if a > 0 {
            out.push((Self::mu(), a as u32));
        }
        if b > 0 {
            out.push((Self::lambda(), b as u32));
        }
        // dehomogenize at μ = 1; index = power of t = λ
        let core: Vec<Rational> = self.coeffs[a..=d - b].iter().rev().cloned().collect();
        for (h, e) in factor_univariate(&core) {
            let form = BinaryForm { coeffs: h.iter().rev().cloned().collect() };
            out.push((form.normalized(), e));
        }
        out.sort_by(divisor_order);
        out
    }
}

fn divisor_order(x: &(BinaryForm, u32), y: &(BinaryForm, u32)) -> std::cmp::Ordering {
    (x.0.degree(), &x.0, x.1).cmp(&(y.0.degree(), &y.0, y.1))
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match (d - i, i) {
                (0, 0) => String::new(),
                (l, m) => {
                    let p = |s: &str, e: usize| match e {
                        0 => None,
                        1 => Some(s.to_string()),
                        e => Some(format!("{s}^{e}")),
                    };
                    [p("λ", l), p("μ", m)].into_iter().flatten().collect::<Vec<_>>().join("*")
                }
            };
            let mag = c.abs();
            let body = if mono.is_empty() {
                format_rational(&mag)
            } else if mag.is_one() {
                mono
            } else {
                format!("{}*{}", format_rational(&mag), mono)
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            parts.push(if parts.is_empty() {
                if c.is_negative() { format!("-{body}") } else { body }
            } else {
                format!("{sign} {body}")
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn udivrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    let lb = b[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        if dr < db {
            break;
        }
        let c = &r[dr] / &lb;
        for (k, bk) in b.iter().enumerate() {
            r[dr - db + k] -= &c * bk;
        }
        q[dr - db] = c;
        r.pop();
        r = trim(r);
        if r.len() - 1 < db || (db == 0) {
            if db == 0 {
                r = vec![Rational::zero()];
            }
            break;
        }
    }
    (trim(q), r)
}

fn ueval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Lagrange interpolation through `(xs[i], ys[i])`; index = power.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let s = &ys[i] / denom;
        for (o, c) in out.iter_mut().zip(&basis) {
            *o += c * &s;
        }
    }
    out
}

const KRONECKER_BUDGET: usize = 200_000;

/// Irreducible monic factors of a univariate rational polynomial.
fn factor_univariate(p: &[Rational]) -> Vec<(Vec<Rational>, u32)> {
    let mut rest = trim(p.to_vec());
    let mut out: Vec<(Vec<Rational>, u32)> = Vec::new();
    for (r, e) in rational_roots(&rest) {
        for _ in 0..e {
            rest = qpoly::synthetic_div(&rest, &r).0;
        }
        out.push((vec![-r, Rational::one()], e as u32));
    }
    while rest.len() > 1 {
        let n = rest.len() - 1;
        let found = (2..=n / 2).find_map(|k| kronecker_factor(&rest, k));
        let g = match found {
            Some(g) => g,
            None => monic(&rest),
        };
        let mut e = 0;
        loop {
            let (q, r) = udivrem(&rest, &g);
            if r.iter().all(Zero::is_zero) && rest.len() > 1 {
                rest = q;
                e += 1;
            } else {
                break;
            }
        }
        out.push((g, e));
    }
    out
}

fn monic(p: &[Rational]) -> Vec<Rational> {
    let l = p.last().unwrap().clone();
    p.iter().map(|c| c / &l).collect()
}

/// A monic factor of degree exactly `k`, by Kronecker's divisor search.
fn kronecker_factor(p: &[Rational], k: usize) -> Option<Vec<Rational>> {
    let mut l = BigInt::one();
    for c in p {
        l = l.lcm(c.denom());
    }
    let ints: Vec<Rational> = p.iter().map(|c| c * Rational::from_integer(l.clone())).collect();
    let mut xs = Vec::new();
    let mut cands: Vec<Vec<Rational>> = Vec::new();
    let mut x = 0i64;
    while xs.len() < k + 1 {
        let xr = Rational::from_integer(x.into());
        let v = ueval(&ints, &xr);
        if !v.is_zero() {
            let ds = int_divisors(&v.to_integer());
            let mut signed: Vec<Rational> = Vec::new();
            for d in ds {
                signed.push(Rational::from_integer(d.clone()));
                if !xs.is_empty() {
                    signed.push(-Rational::from_integer(d));
                }
            }
            cands.push(signed);
            xs.push(xr);
        }
        x = if x <= 0 { 1 - x } else { -x };
    }
    let total: usize = cands.iter().map(Vec::len).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX);
    if total > KRONECKER_BUDGET {
        // TODO: switch to Zassenhaus lifting for pieces with large values
        return None;
    }
    let mut idx = vec![0usize; k + 1];
    loop {
        let ys: Vec<Rational> = idx.iter().zip(&cands).map(|(&i, c)| c[i].clone()).collect();
        let g = trim(interpolate(&xs, &ys));
        if g.len() == k + 1 && g.iter().all(|c| c.is_integer()) {
            let (_, r) = udivrem(p, &g);
            if r.iter().all(Zero::is_zero) {
                return Some(monic(&g));
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return None;
            }
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn int_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
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
}

fn check_skew(m: &Matrix<Rational>, dim: usize, what: &str) -> Result<()> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!("{what} is not {dim}×{dim}")));
    }
    for i in 0..dim {
        for j in 0..dim {
            if m[i][j] != -m[j][i].clone() {
                return Err(Error::BadInput(format!("{what} is not skew-symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// The pencil `λA + μB` of skew-symmetric matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewPencil {
    pub a: Matrix<Rational>,
    pub b: Matrix<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PencilInvariants {
    pub regular: bool,
    pub pfaffian: Option<BinaryForm>,
    /// `d_1, …, d_m` (zero beyond the generic rank).
    pub minor_gcds: Vec<BinaryForm>,
    pub elementary_divisors: Vec<(BinaryForm, u32)>,
    pub first_minimal_index: Option<usize>,
}

impl SkewPencil {
    pub fn new(a: Matrix<Rational>, b: Matrix<Rational>) -> Result<Self> {
        let dim = a.len();
        check_skew(&a, dim, "A")?;
        check_skew(&b, dim, "B")?;
        Ok(SkewPencil { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn at(&self, l: &Rational, m: &Rational) -> Matrix<Rational> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| l * x + m * y).collect())
            .collect()
    }

    fn entry(&self, i: usize, j: usize) -> BinaryForm {
        BinaryForm::linear(self.a[i][j].clone(), self.b[i][j].clone())
    }

    /// Recursive first-row expansion, memoized on index subsets.
    pub fn pfaffian(&self) -> Result<BinaryForm> {
        let m = self.dim();
        if m % 2 == 1 {
            return Err(Error::OddDimension(m));
        }
        let mut memo = std::collections::HashMap::new();
        Ok(self.pf_rec((1u64 << m) - 1, &mut memo))
    }

    fn pf_rec(&self, set: u64, memo: &mut std::collections::HashMap<u64, BinaryForm>) -> BinaryForm {
        if set == 0 {
            return BinaryForm::one();
        }
        if let Some(v) = memo.get(&set) {
            return v.clone();
        }
        let idx: Vec<usize> = (0..64).filter(|b| set >> b & 1 == 1).collect();
        let deg = idx.len() / 2;
        let i0 = idx[0];
        let mut acc = BinaryForm::zero(deg);
        for (t, &j) in idx.iter().enumerate().skip(1) {
            let e = self.entry(i0, j);
            if e.is_zero() {
                continue;
            }
            let sub = self.pf_rec(set & !(1 << i0) & !(1 << j), memo);
            let term = e.mul(&sub);
            acc = if t % 2 == 1 { acc.add(&term) } else { acc.add(&term.neg()) };
        }
        memo.insert(set, acc.clone());
        acc
    }

    /// `det(λA + μB)` by interpolation along `λ = 1`.
    pub fn det(&self) -> BinaryForm {
        let rows: Vec<usize> = (0..self.dim()).collect();
        self.minor(&rows, &rows)
    }

    fn minor(&self, rows: &[usize], cols: &[usize]) -> BinaryForm {
        let k = rows.len();
        let xs: Vec<Rational> = (0..=k as i64).map(|t| Rational::from_integer(t.into())).collect();
        let ys: Vec<Rational> = xs
            .iter()
            .map(|t| {
                let sub: Matrix<Rational> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| &self.a[i][j] + t * &self.b[i][j]).collect())
                    .collect();
                linalg::det(&sub, &Rational::zero())
            })
            .collect();
        let mut coeffs = interpolate(&xs, &ys);
        coeffs.resize(k + 1, Rational::zero());
        // f(1, t) = Σ c_i t^i
        BinaryForm { coeffs }
    }

    pub fn is_regular(&self) -> bool {
        !self.det().is_zero()
    }

    /// Rank of the pencil over the field of rational functions.
    pub fn generic_rank(&self) -> usize {
        let m = self.dim();
        (0..=m as i64)
            .map(|t| linalg::rank(&self.at(&Rational::one(), &Rational::from_integer((t * 7 + 3).into()))))
            .max()
            .unwrap_or(0)
    }

    /// `d_k` = normalized gcd of all `k × k` minors, for `k = 1..=m`.
    pub fn minor_gcds(&self) -> Vec<BinaryForm> {
        let m = self.dim();
        let r = self.generic_rank();
        let mut out = Vec::new();
        for k in 1..=m {
            if k > r {
                out.push(BinaryForm::zero(k));
                continue;
            }
            let subsets = subsets(m, k);
            let mut g = BinaryForm::zero(k);
            'outer: for rs in &subsets {
                for cs in &subsets {
                    let mnr = self.minor(rs, cs);
                    if mnr.is_zero() {
                        continue;
                    }
                    g = g.gcd(&mnr);
                    if g.degree() == 0 {
                        break 'outer;
                    }
                }
            }
            out.push(g);
        }
        out
    }

    /// Irreducible factors of the invariant factors `d_k / d_{k−1}`.
    pub fn elementary_divisors(&self) -> (Vec<BinaryForm>, Vec<(BinaryForm, u32)>) {
        let d = self.minor_gcds();
        let mut divs = Vec::new();
        let mut prev = BinaryForm::one();
        for dk in &d {
            if dk.is_zero() {
                break;
            }
            let inv = dk.exact_div(&prev).expect("minor gcds form a divisibility chain");
            divs.extend(inv.factor());
            prev = dk.clone();
        }
        divs.sort_by(divisor_order);
        (d, divs)
    }

    /// Least degree of a polynomial kernel branch; `None` for regular pencils.
    pub fn first_minimal_index(&self) -> Option<usize> {
        self.minimal_branch().map(|(d, _)| d)
    }

    /// Minimal kernel branch `v_0, …, v_d` with `v(λ,μ) = Σ v_j λ^{d−j} μ^j`.
    pub fn minimal_branch(&self) -> Option<(usize, Vec<Vec<Rational>>)> {
        if self.is_regular() {
            return None;
        }
        let m = self.dim();
        for d in 0..=m {
            let cols = m * (d + 1);
            let mut rows: Matrix<Rational> = Vec::new();
            for i in 0..=d + 1 {
                for r in 0..m {
                    let mut row = vec![Rational::zero(); cols];
                    if i <= d {
                        for c in 0..m {
                            row[i * m + c] += &self.a[r][c];
                        }
                    }
                    if i >= 1 {
                        for c in 0..m {
                            row[(i - 1) * m + c] += &self.b[r][c];
                        }
                    }
                    rows.push(row);
                }
            }
            if let Some(v) = linalg::kernel(&rows, cols, &Rational::zero()).into_iter().next() {
                return Some((d, v.chunks(m).map(<[Rational]>::to_vec).collect()));
            }
        }
        None
    }

    pub fn invariants(&self) -> PencilInvariants {
        let (minor_gcds, elementary_divisors) = self.elementary_divisors();
        PencilInvariants {
            regular: self.is_regular(),
            pfaffian: self.pfaffian().ok(),
            minor_gcds,
            elementary_divisors,
            first_minimal_index: self.first_minimal_index(),
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exact kernel of all forms at once.
pub fn common_kernel(forms: &[Matrix<Rational>]) -> Vec<Vec<Rational>> {
    let Some(first) = forms.first() else { return vec![] };
    let dim = first.len();
    let stacked: Matrix<Rational> = forms.iter().flatten().cloned().collect();
    linalg::kernel(&stacked, dim, &Rational::zero())
}

/// Two complementary subspaces of the first layer.
pub type Splitting = [Vec<Vec<Rational>>; 2];

#[derive(Clone, Debug, PartialEq)]
pub enum Decomposability {
    Decomposable { splitting: Splitting, reason: String },
    Indecomposable { certificate: String },
    Inconclusive { reason: String },
}

impl Decomposability {
    pub fn name(&self) -> &'static str {
        match self {
            Decomposability::Decomposable { .. } => "decomposable",
            Decomposability::Indecomposable { .. } => "indecomposable",
            Decomposability::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    pub plane_budget: usize,
    pub seed: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { plane_budget: 32, seed: 0 }
    }
}

/// Every form vanishes on `S₁ × S₂`.
pub fn splitting_block_diagonalizes(forms: &[Matrix<Rational>], s: &Splitting) -> bool {
    forms.iter().all(|w| {
        s[0].iter().all(|v| {
            let wv: Vec<Rational> = (0..w.len())
                .map(|c| (0..w.len()).map(|r| &v[r] * &w[r][c]).sum())
                .collect();
            s[1].iter().all(|u| wv.iter().zip(u).map(|(a, b)| a * b).sum::<Rational>().is_zero())
        })
    })
}

/// Coordinate complement of a subspace given by its RREF kernel basis.
fn complement(basis: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    let mut m = basis.to_vec();
    let pivots = linalg::row_reduce(&mut m);
    (0..dim)
        .filter(|c| !pivots.contains(c))
        .map(|c| (0..dim).map(|k| if k == c { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

fn rref_key(basis: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m = basis.to_vec();
    let piv = linalg::row_reduce(&mut m);
    m.truncate(piv.len());
    m
}

fn same_splitting(a: &Splitting, b: &Splitting) -> bool {
    let ka = BTreeSet::from([rref_key(&a[0]), rref_key(&a[1])]);
    let kb = BTreeSet::from([rref_key(&b[0]), rref_key(&b[1])]);
    ka == kb
}

enum PlaneOutcome {
    Split(Splitting),
    Definite(Rational),
    Degenerate,
    Irrational,
    Singular,
}

/// Four-dimensional regular pencil: read the Pfaffian quadratic.
fn four_dim_plane(p: &SkewPencil) -> PlaneOutcome {
    let pf = p.pfaffian().expect("even dimension");
    if pf.is_zero() {
        return PlaneOutcome::Singular;
    }
    let disc = pf.discriminant().expect("quadratic");
    if disc.is_negative() {
        return PlaneOutcome::Definite(disc);
    }
    if disc.is_zero() {
        return PlaneOutcome::Degenerate;
    }
    let Some(sq) = rational_sqrt(&disc) else { return PlaneOutcome::Irrational };
    // roots (λ:μ) of aλ² + bλμ + cμ², ordered by μ/λ with λ = 0 last
    let (a, b, c) = (&pf.coeffs[0], &pf.coeffs[1], &pf.coeffs[2]);
    let two = Rational::from_integer(2.into());
    let mut roots: Vec<(Rational, Rational)> = if c.is_zero() {
        // λ(aλ + bμ)
        vec![(Rational::zero(), Rational::one()), (b.clone(), -a.clone())]
    } else {
        // t = μ/λ solves c t² + b t + a = 0
        let t1 = (-b - &sq) / (&two * c);
        let t2 = (-b + &sq) / (&two * c);
        vec![(Rational::one(), t1), (Rational::one(), t2)]
    };
    let key = |r: &(Rational, Rational)| -> (bool, Rational) {
        if r.0.is_zero() {
            (true, Rational::zero())
        } else {
            (false, &r.1 / &r.0)
        }
    };
    roots.sort_by_key(key);
    let kernels: Vec<Vec<Vec<Rational>>> =
        roots.iter().map(|(l, m)| linalg::kernel(&p.at(l, m), 4, &Rational::zero())).collect();
    PlaneOutcome::Split([kernels[0].clone(), kernels[1].clone()])
}

fn divisor_pattern_ok(divs: &[(BinaryForm, u32)]) -> std::result::Result<(), String> {
    let mut directions = 0usize;
    for (p, e) in divs {
        if *e > 1 {
            return Err(format!("elementary divisor ({p})^{e} is not simple"));
        }
    }
    let distinct: BTreeSet<&BinaryForm> = divs.iter().map(|(p, _)| p).collect();
    for p in distinct {
        match p.degree() {
            1 => directions += 1,
            2 if p.discriminant().is_some_and(|d| d.is_positive()) => directions += 2,
            _ => return Err(format!("elementary divisor {p} has non-real roots or degree above two")),
        }
    }
    if directions > 2 {
        return Err(format!("{directions} distinct degenerate directions, at most two allowed"));
    }
    Ok(())
}

fn independent(forms: &[Matrix<Rational>]) -> bool {
    let flat: Matrix<Rational> = forms.iter().map(|f| f.iter().flatten().cloned().collect()).collect();
    linalg::rank(&flat) == forms.len()
}

/// Largest dimension of a space of forms split along `p + (m−p)` with `p, m−p ≥ 2`.
fn split_dimension_bound(m: usize) -> usize {
    (2..=m.saturating_sub(2)).map(|p| p * (p - 1) / 2 + (m - p) * (m - p - 1) / 2).max().unwrap_or(0)
}

/// Operators `T` with `ω(Tx, y) = ω(x, Ty)` for every form, as `m × m` matrices.
fn self_adjoint_operators(forms: &[Matrix<Rational>], m: usize) -> Vec<Matrix<Rational>> {
    // unknown T[r][c] sits at column r*m + c; the equation is (Tᵗω − ωT)[i][j] = 0
    let mut rows: Matrix<Rational> = Vec::new();
    for w in forms {
        for i in 0..m {
            for j in 0..m {
                let mut row = vec![Rational::zero(); m * m];
                for k in 0..m {
                    row[k * m + i] += &w[k][j];
                    row[k * m + j] -= &w[i][k];
                }
                rows.push(row);
            }
        }
    }
    linalg::kernel(&rows, m * m, &Rational::zero())
        .into_iter()
        .map(|v| v.chunks(m).map(<[Rational]>::to_vec).collect())
        .collect()
}

/// `p(T)` for `p(t) = Σ c_i t^i`.
fn eval_at_matrix(coeffs: &[Rational], t: &Matrix<Rational>) -> Matrix<Rational> {
    let m = t.len();
    let zero = Rational::zero();
    let mut out = vec![vec![zero.clone(); m]; m];
    for c in coeffs.iter().rev() {
        out = linalg::mat_mul(&out, t, &zero);
        for (i, row) in out.iter_mut().enumerate() {
            row[i] += c;
        }
    }
    out
}

/// Characteristic polynomial `det(t − T)` as a form with `coeffs[i]` on `t^i`.
fn char_form(t: &Matrix<Rational>) -> BinaryForm {
    let m = t.len();
    let xs: Vec<Rational> = (0..=m as i64).map(|x| Rational::from_integer(x.into())).collect();
    let ys: Vec<Rational> = xs
        .iter()
        .map(|x| {
            let shifted: Matrix<Rational> = (0..m)
                .map(|i| (0..m).map(|j| if i == j { x - &t[i][j] } else { -t[i][j].clone() }).collect())
                .collect();
            linalg::det(&shifted, &Rational::zero())
        })
        .collect();
    let mut coeffs = interpolate(&xs, &ys);
    coeffs.resize(m + 1, Rational::zero());
    BinaryForm { coeffs }
}

/// Orthogonal splittings are the primary decompositions of operators self-adjoint
/// for every form. Tries random such operators; scalars alone certify indecomposability.
fn self_adjoint_search(forms: &[Matrix<Rational>], m: usize, rng: &mut ChaCha8Rng) -> Option<Decomposability> {
    let basis = self_adjoint_operators(forms, m);
    if basis.len() <= 1 {
        return Some(Decomposability::Indecomposable {
            certificate: "only scalars are self-adjoint for every form, so no orthogonal projector exists".into(),
        });
    }
    let zero = Rational::zero();
    for _ in 0..8 {
        let mut t = vec![vec![zero.clone(); m]; m];
        for b in &basis {
            let c = Rational::from_integer(rng.gen_range(-5i64..=5).into());
            for r in 0..m {
                for s in 0..m {
                    t[r][s] += &c * &b[r][s];
                }
            }
        }
        let factors = char_form(&t).factor();
        if factors.len() < 2 {
            continue;
        }
        let (p, e) = &factors[0];
        let primary = eval_at_matrix(&p.pow(*e).coeffs, &t);
        let rest = factors[1..].iter().fold(BinaryForm::one(), |acc, (q, k)| acc.mul(&q.pow(*k)));
        let cofactor = eval_at_matrix(&rest.coeffs, &t);
        let s: Splitting = [linalg::kernel(&primary, m, &zero), linalg::kernel(&cofactor, m, &zero)];
        if splitting_block_diagonalizes(forms, &s) {
            return Some(Decomposability::Decomposable {
                splitting: s,
                reason: format!("primary decomposition of an operator self-adjoint for all forms ({})", p),
            });
        }
    }
    None
}

/// Decide whether the step-two algebra with space of forms `forms` is a
/// direct sum of two graded algebras.
pub fn decomposability(forms: &[Matrix<Rational>], opts: &DecomposeOptions) -> Result<Decomposability> {
    let Some(first) = forms.first() else { return Err(Error::BadBasis("no forms given".into())) };
    let m = first.len();
    for (i, f) in forms.iter().enumerate() {
        check_skew(f, m, &format!("form {}", i + 1)).map_err(|e| Error::BadBasis(e.to_string()))?;
    }
    if !independent(forms) {
        return Err(Error::BadBasis("forms are linearly dependent".into()));
    }
    let d = forms.len();
    let ker = common_kernel(forms);
    if !ker.is_empty() {
        let comp = complement(&ker, m);
        return Ok(Decomposability::Decomposable {
            splitting: [ker, comp],
            reason: "forms share a nontrivial kernel; one summand is commutative".into(),
        });
    }
    if d == 1 {
        return Ok(Decomposability::Indecomposable { certificate: "the generating form is nondegenerate".into() });
    }
    if d == 2 {
        let p = SkewPencil::new(forms[0].clone(), forms[1].clone())?;
        if !p.is_regular() {
            let idx = p.first_minimal_index().unwrap_or(0);
            return Ok(Decomposability::Indecomposable {
                certificate: format!(
                    "singular pencil without common kernel (first minimal index {idx}); a split pencil would have index 0"
                ),
            });
        }
        if m == 4 {
            return Ok(match four_dim_plane(&p) {
                PlaneOutcome::Split(s) => {
                    if splitting_block_diagonalizes(forms, &s) {
                        Decomposability::Decomposable {
                            splitting: s,
                            reason: "kernels of the two degenerate forms".into(),
                        }
                    } else {
                        Decomposability::Inconclusive { reason: "degenerate kernels do not split the forms".into() }
                    }
                }
                PlaneOutcome::Definite(disc) => Decomposability::Indecomposable {
                    certificate: format!(
                        "Pfaffian {} is sign-definite (discriminant {})",
                        p.pfaffian()?,
                        format_rational(&disc)
                    ),
                },
                PlaneOutcome::Degenerate => Decomposability::Inconclusive { reason: "degenerate pencil".into() },
                PlaneOutcome::Irrational => {
                    Decomposability::Inconclusive { reason: "splitting defined over an extension".into() }
                }
                PlaneOutcome::Singular => unreachable!("regular pencil"),
            });
        }
        let (_, divs) = p.elementary_divisors();
        return Ok(match divisor_pattern_ok(&divs) {
            Err(why) => Decomposability::Indecomposable { certificate: why },
            Ok(()) => self_adjoint_search(forms, m, &mut ChaCha8Rng::seed_from_u64(opts.seed))
                .unwrap_or(Decomposability::Inconclusive { reason: "necessary condition met".into() }),
        });
    }
    scan_planes(forms, m, opts)
}

fn scan_planes(forms: &[Matrix<Rational>], m: usize, opts: &DecomposeOptions) -> Result<Decomposability> {
    let d = forms.len();
    let combo = |c: &[Rational]| -> Matrix<Rational> {
        let mut out = vec![vec![Rational::zero(); m]; m];
        for (w, f) in c.iter().zip(forms) {
            if w.is_zero() {
                continue;
            }
            for r in 0..m {
                for s in 0..m {
                    out[r][s] += w * &f[r][s];
                }
            }
        }
        out
    };
    let mut planes: Vec<(Matrix<Rational>, Matrix<Rational>, String)> = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            planes.push((forms[i].clone(), forms[j].clone(), format!("span(ω{}, ω{})", i + 1, j + 1)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut drawn = 0;
    while drawn < opts.plane_budget {
        let c1: Vec<Rational> = (0..d).map(|_| Rational::from_integer(rng.gen_range(-5i64..=5).into())).collect();
        let c2: Vec<Rational> = (0..d).map(|_| Rational::from_integer(rng.gen_range(-5i64..=5).into())).collect();
        let (a, b) = (combo(&c1), combo(&c2));
        if !independent(&[a.clone(), b.clone()]) {
            continue;
        }
        drawn += 1;
        planes.push((a, b, format!("random plane {drawn}")));
    }
    let mut splits: Vec<(Splitting, String)> = Vec::new();
    for (a, b, label) in &planes {
        let p = SkewPencil::new(a.clone(), b.clone())?;
        if m == 4 {
            match four_dim_plane(&p) {
                PlaneOutcome::Definite(_) => {
                    return Ok(Decomposability::Indecomposable {
                        certificate: format!("{label} has sign-definite Pfaffian {}", p.pfaffian()?),
                    })
                }
                PlaneOutcome::Split(s) => {
                    if let Some((_, other)) = splits.iter().find(|(t, _)| !same_splitting(t, &s)) {
                        return Ok(Decomposability::Indecomposable {
                            certificate: format!("{other} and {label} have different canonical splittings"),
                        });
                    }
                    splits.push((s, label.clone()));
                }
                _ => {}
            }
        } else if m % 2 == 1 && p.first_minimal_index() == Some((m - 1) / 2) {
            return Ok(Decomposability::Indecomposable {
                certificate: format!("{label} has first minimal index {}, the maximum", (m - 1) / 2),
            });
        }
    }
    let bound = split_dimension_bound(m);
    if d > bound {
        return Ok(Decomposability::Indecomposable {
            certificate: format!("{d} independent forms without common kernel exceed {bound}, the most a splitting allows"),
        });
    }
    if let Some(dec) = self_adjoint_search(forms, m, &mut rng) {
        return Ok(dec);
    }
    Ok(Decomposability::Inconclusive { reason: format!("no certificate among {} planes", planes.len()) })
}

/// Space of forms of a step-two algebra: `ω_k(X_i, X_j) = c^{m+k}_{ij}`.
pub fn forms_of_carnot(carnot: &crate::nilpotent::CarnotAlgebra) -> Result<Vec<Matrix<Rational>>> {
    if carnot.step() != 2 {
        return Err(Error::BadInput("space of forms needs a step-two algebra".into()));
    }
    let (m, n) = (carnot.m(), carnot.n());
    Ok((m..n)
        .map(|k| (0..m).map(|i| (0..m).map(|j| carnot.get(i, j, k).clone()).collect()).collect())
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    pub(crate) fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    pub(crate) fn skew(m: usize, entries: &[(usize, usize, i64)]) -> Matrix<Rational> {
        let mut a = vec![vec![Rational::zero(); m]; m];
        for &(i, j, v) in entries {
            a[i - 1][j - 1] = int(v);
            a[j - 1][i - 1] = int(-v);
        }
        a
    }

    fn form(c: &[i64]) -> BinaryForm {
        BinaryForm::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn pfaffian_examples() {
        let a = skew(4, &[(1, 2, 1)]);
        let b = skew(4, &[(3, 4, 1)]);
        let p = SkewPencil::new(a.clone(), b).unwrap();
        assert_eq!(p.pfaffian().unwrap(), form(&[0, 1, 0]));
        assert_eq!(p.pfaffian().unwrap().to_string(), "λ*μ");
        let jj = skew(4, &[(1, 2, 1), (3, 4, 1)]);
        let b2 = skew(4, &[(1, 3, 1), (2, 4, -1)]);
        let p2 = SkewPencil::new(jj.clone(), b2).unwrap();
        assert_eq!(p2.pfaffian().unwrap(), form(&[1, 0, 1]));
        let p3 = SkewPencil::new(jj.clone(), jj).unwrap();
        assert_eq!(p3.pfaffian().unwrap(), form(&[1, 2, 1]));
        let odd = SkewPencil::new(skew(3, &[(1, 2, 1)]), skew(3, &[])).unwrap();
        assert_eq!(odd.pfaffian(), Err(Error::OddDimension(3)));
        assert!(SkewPencil::new(mat(&[&[0, 1], &[1, 0]]), skew(2, &[])).is_err());
    }

    #[test]
    fn elementary_divisor_examples() {
        let p = SkewPencil::new(skew(4, &[(1, 2, 1)]), skew(4, &[(3, 4, 1)])).unwrap();
        let (_, divs) = p.elementary_divisors();
        assert_eq!(divs, vec![(BinaryForm::mu(), 1), (BinaryForm::mu(), 1), (BinaryForm::lambda(), 1), (BinaryForm::lambda(), 1)]);

        let p = SkewPencil::new(skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(1, 2, 2), (3, 4, 3)])).unwrap();
        let (d, divs) = p.elementary_divisors();
        let f2 = form(&[1, 2]);
        let f3 = form(&[1, 3]);
        assert_eq!(divs, vec![(f2.clone(), 1), (f2.clone(), 1), (f3.clone(), 1), (f3.clone(), 1)]);
        assert_eq!(d[3], f2.pow(2).mul(&f3.pow(2)));

        let z = SkewPencil::new(skew(3, &[]), skew(3, &[])).unwrap();
        let (d, divs) = z.elementary_divisors();
        assert!(d.iter().all(BinaryForm::is_zero));
        assert!(divs.is_empty());
        assert!(!z.is_regular());
    }

    #[test]
    fn irreducible_quadratic_and_powers() {
        let f = form(&[1, 0, 1]).pow(2).mul(&form(&[1, -2]).pow(3)).mul(&BinaryForm::mu());
        let fac = f.factor();
        assert_eq!(fac, vec![(BinaryForm::mu(), 1), (form(&[1, -2]), 3), (form(&[1, 0, 1]), 2)]);
        let g = form(&[1, 0, 0, 0, 4]);
        // λ⁴ + 4μ⁴ = (λ² + 2λμ + 2μ²)(λ² − 2λμ + 2μ²)
        assert_eq!(g.factor(), vec![(form(&[1, -2, 2]), 1), (form(&[1, 2, 2]), 1)]);
        assert_eq!(form(&[2, 0, -1]).factor(), vec![(BinaryForm::new(vec![int(1), int(0), crate::rational::rat(-1, 2)]), 1)]);
    }

    #[test]
    fn minimal_index_examples() {
        let ck = SkewPencil::new(skew(3, &[(1, 2, 1)]), skew(3, &[(1, 2, 5)])).unwrap();
        assert_eq!(ck.first_minimal_index(), Some(0));
        let reg = SkewPencil::new(skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(3, 4, 2)])).unwrap();
        assert_eq!(reg.first_minimal_index(), None);
        // the 3 × 3 block λ e12 + μ e23 has kernel branch (μ, −λ... ) of degree 1
        let m3 = SkewPencil::new(skew(3, &[(1, 2, 1)]), skew(3, &[(2, 3, 1)])).unwrap();
        assert_eq!(m3.first_minimal_index(), Some(1));
        let (d, v) = m3.minimal_branch().unwrap();
        assert_eq!(d, 1);
        // (λA + μB)(λ v0 + μ v1) vanishes identically
        for (l, m) in [(1, 0), (0, 1), (2, 3)] {
            let (l, m) = (int(l), int(m));
            let mt = m3.at(&l, &m);
            let w: Vec<Rational> = (0..3).map(|k| &l * &v[0][k] + &m * &v[1][k]).collect();
            assert!(mt.iter().all(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<Rational>().is_zero()));
        }
    }

    #[test]
    fn common_kernels() {
        assert_eq!(common_kernel(&[skew(4, &[(1, 2, 1)])]).len(), 2);
        assert!(common_kernel(&[skew(4, &[(1, 2, 1)]), skew(4, &[(3, 4, 1)])]).is_empty());
    }

    #[test]
    fn decomposability_examples() {
        let o = DecomposeOptions::default();
        let d = decomposability(&[skew(3, &[(1, 2, 1)])], &o).unwrap();
        assert_eq!(d.name(), "decomposable");
        let forms = [skew(4, &[(1, 2, 1)]), skew(4, &[(3, 4, 1)])];
        match decomposability(&forms, &o).unwrap() {
            Decomposability::Decomposable { splitting, .. } => {
                assert_eq!(splitting[0], vec![vec![int(0), int(0), int(1), int(0)], vec![int(0), int(0), int(0), int(1)]]);
                assert_eq!(splitting[1], vec![vec![int(1), int(0), int(0), int(0)], vec![int(0), int(1), int(0), int(0)]]);
                assert!(splitting_block_diagonalizes(&forms, &splitting));
            }
            other => panic!("{other:?}"),
        }
        let forms = [skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(1, 3, 1), (2, 4, -1)])];
        assert_eq!(decomposability(&forms, &o).unwrap().name(), "indecomposable");
        assert_eq!(decomposability(&[skew(4, &[(1, 2, 1), (3, 4, 1)])], &o).unwrap().name(), "indecomposable");
        // Pfaffian λ² on a regular pencil: degenerate
        let forms = [skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(1, 3, 1)])];
        assert_eq!(
            decomposability(&forms, &o).unwrap(),
            Decomposability::Inconclusive { reason: "degenerate pencil".into() }
        );
        // Pfaffian (λ + 2μ)(λ − μ): rational degenerate directions
        let forms = [skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(1, 2, 2), (3, 4, -1)])];
        let forms = [forms[0].clone(), forms[1].clone()];
        let pf = SkewPencil::new(forms[0].clone(), forms[1].clone()).unwrap().pfaffian().unwrap();
        assert_eq!(pf, form(&[1, 1, -2]));
        assert_eq!(decomposability(&forms, &o).unwrap().name(), "decomposable");
        // Pfaffian λ² − 2μ²: real roots, irrational
        let forms = [skew(4, &[(1, 2, 1), (3, 4, 1)]), skew(4, &[(1, 3, 1), (2, 4, 2)])];
        let pf = SkewPencil::new(forms[0].clone(), forms[1].clone()).unwrap().pfaffian().unwrap();
        assert!(pf.discriminant().unwrap().is_positive());
        assert!(rational_sqrt(&pf.discriminant().unwrap()).is_none());
        assert_eq!(
            decomposability(&forms, &o).unwrap(),
            Decomposability::Inconclusive { reason: "splitting defined over an extension".into() }
        );
        assert!(matches!(decomposability(&[], &o), Err(Error::BadBasis(_))));
        let f = skew(4, &[(1, 2, 1)]);
        assert!(matches!(decomposability(&[f.clone(), f], &o), Err(Error::BadBasis(_))));
    }

    #[test]
    fn corank_two_odd_generic_is_indecomposable() {
        // λ e12 + μ e23 ⊕ λ e45 ... on dimension 5: minimal index 2 when generic
        let a = skew(5, &[(1, 2, 1), (3, 4, 1)]);
        let b = skew(5, &[(2, 3, 1), (4, 5, 1)]);
        let p = SkewPencil::new(a.clone(), b.clone()).unwrap();
        assert_eq!(p.first_minimal_index(), Some(2));
        let v = decomposability(&[a, b], &DecomposeOptions::default()).unwrap();
        assert_eq!(v.name(), "indecomposable");
    }

    #[test]
    fn higher_corank() {
        let o = DecomposeOptions { plane_budget: 8, seed: 3 };
        // all of Λ²(R⁴) minus nothing: six forms, no common kernel
        let all: Vec<_> = (1..=4)
            .flat_map(|i| (i + 1..=4).map(move |j| (i, j)))
            .map(|(i, j)| skew(4, &[(i, j, 1)]))
            .collect();
        // e12, e13, e14 share no kernel and exceed the two forms a 2 + 2 split carries
        assert_eq!(decomposability(&all[..3], &o).unwrap().name(), "indecomposable");
        assert_eq!(decomposability(&[all[0].clone(), all[5].clone()], &o).unwrap().name(), "decomposable");
        assert_eq!(decomposability(&all, &o).unwrap().name(), "indecomposable");
        // split algebra on 2 + 3: e12 on the first block, e34, e35, e45 on the second
        let split = vec![skew(5, &[(1, 2, 1)]), skew(5, &[(3, 4, 1)]), skew(5, &[(3, 5, 1)]), skew(5, &[(4, 5, 1)])];
        let Decomposability::Decomposable { splitting, .. } = decomposability(&split, &o).unwrap() else { panic!() };
        assert!(splitting_block_diagonalizes(&split, &splitting));
        let mut dims = [splitting[0].len(), splitting[1].len()];
        dims.sort();
        assert_eq!(dims, [2, 3]);
    }

    #[test]
    fn hidden_split_is_found() {
        // e12 + e34 and e13 on 2 + 2, then e56 - e57 and e67 on 3, mixed by a unipotent change of basis
        let m = 7;
        let raw = [
            skew(m, &[(1, 2, 1), (5, 6, 1)]),
            skew(m, &[(3, 4, 1), (5, 7, -1)]),
            skew(m, &[(1, 2, 2), (6, 7, 1)]),
        ];
        let g: Matrix<Rational> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { int(1) } else if j == i + 1 { int(2) } else { int(0) }).collect())
            .collect();
        let gt = linalg::transpose(&g);
        let zero = Rational::zero();
        let forms: Vec<_> = raw.iter().map(|f| linalg::mat_mul(&linalg::mat_mul(&gt, f, &zero), &g, &zero)).collect();
        let v = decomposability(&forms, &DecomposeOptions::default()).unwrap();
        let Decomposability::Decomposable { splitting, .. } = v else { panic!("{v:?}") };
        assert!(splitting_block_diagonalizes(&forms, &splitting));
    }

    #[test]
    fn scalar_self_adjoint_operators_certify() {
        // graph algebra of the 5-cycle: e12, e23, e34, e45, e15
        let cyc: Vec<_> = [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)].iter().map(|&(i, j)| skew(5, &[(i, j, 1)])).collect();
        assert_eq!(self_adjoint_operators(&cyc, 5).len(), 1);
        assert_eq!(decomposability(&cyc, &DecomposeOptions::default()).unwrap().name(), "indecomposable");
    }

    #[test]
    fn step_two_algebra_forms() {
        let alg = crate::nilpotent::heisenberg_product(2);
        let forms = forms_of_carnot(&alg).unwrap();
        assert_eq!(forms, vec![skew(4, &[(1, 2, 1)]), skew(4, &[(3, 4, 1)])]);
    }

    fn arb_skew(m: usize) -> impl Strategy<Value = Matrix<Rational>> {
        proptest::collection::vec(-3i64..=3, m * (m - 1) / 2).prop_map(move |v| {
            let mut a = vec![vec![Rational::zero(); m]; m];
            let mut it = v.into_iter();
            for i in 0..m {
                for j in i + 1..m {
                    let x = it.next().unwrap();
                    a[i][j] = int(x);
                    a[j][i] = int(-x);
                }
            }
            a
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn pfaffian_squared_is_det((a, b) in (1usize..=3).prop_flat_map(|h| (arb_skew(2 * h), arb_skew(2 * h)))) {
            let p = SkewPencil::new(a, b).unwrap();
            let pf = p.pfaffian().unwrap();
            prop_assert_eq!(pf.mul(&pf), p.det());
        }

        #[test]
        fn divisors_pair_up((a, b) in (2usize..=4).prop_flat_map(|m| (arb_skew(m), arb_skew(m)))) {
            let p = SkewPencil::new(a, b).unwrap();
            let (_, divs) = p.elementary_divisors();
            let mut by_factor = std::collections::BTreeMap::new();
            for (f, e) in divs {
                *by_factor.entry((f, e)).or_insert(0u32) += 1;
            }
            prop_assert!(by_factor.values().all(|c| c % 2 == 0), "{:?}", by_factor);
        }

        #[test]
        fn minimal_index_is_congruence_invariant(
            (a, b) in (3usize..=5).prop_flat_map(|m| (arb_skew(m), arb_skew(m))),
            g in proptest::collection::vec(-2i64..=2, 25),
        ) {
            let m = a.len();
            let mut gm: Matrix<Rational> = (0..m).map(|i| (0..m).map(|j| int(g[i * 5 + j])).collect()).collect();
            for (i, row) in gm.iter_mut().enumerate() {
                row[i] += int(7);
            }
            prop_assume!(!linalg::det(&gm, &Rational::zero()).is_zero());
            let congr = |x: &Matrix<Rational>| {
                let t = linalg::mat_mul(&linalg::transpose(&gm), x, &Rational::zero());
                linalg::mat_mul(&t, &gm, &Rational::zero())
            };
            let p = SkewPencil::new(a.clone(), b.clone()).unwrap();
            let q = SkewPencil::new(congr(&a), congr(&b)).unwrap();
            prop_assert_eq!(p.first_minimal_index(), q.first_minimal_index());
        }

        #[test]
        fn decomposable_verdicts_split_every_form(
            forms in (4usize..=5).prop_flat_map(|m| proptest::collection::vec(arb_skew(m), 1..=3)),
        ) {
            if let Ok(Decomposability::Decomposable { splitting, .. }) =
                decomposability(&forms, &DecomposeOptions { plane_budget: 4, seed: 1 })
            {
                prop_assert!(splitting_block_diagonalizes(&forms, &splitting));
            }
        }
    }
}
