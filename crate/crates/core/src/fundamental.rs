//! Hamiltonian lift, first divisibility, the layered fundamental algebraic
//! system `A·(αΦ̃) = α·b`, and the orbital-equivalence pipeline.
//!
//! Everything is kept polynomial in the fiber coordinates: the square root
//! `α = √(P/h₁)` is never formed. Right-hand sides are stored as `N / P^e`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fiber::{
    divide_by_p, fiber_to_expr, fzero, is_w_homogeneous, strip_p, u, weighted_degree, FiberFrac,
    FiberPoly,
};
use crate::frame::{swap_pair, FrameData};
use crate::linalg::{self, Matrix};
use crate::poly::{Mono, Poly, Ring};
use crate::rational::{rat, Rational};
use crate::scalar::Scalar;

/// `vec h₁` acting on fiber polynomials.
#[derive(Clone, Debug)]
pub struct HamiltonianLift {
    pub fd: FrameData,
    /// `v_j = vec h₁(u_j) = Σ_{i≤m} Σ_k c^k_{ij} u_i u_k`.
    v: Vec<FiberPoly>,
}

impl HamiltonianLift {
    pub fn new(fd: &FrameData) -> Self {
        let n = fd.n;
        let us: Vec<FiberPoly> = (0..n).map(|i| u(&fd.field, n, i)).collect();
        let v = (0..n)
            .map(|j| {
                let mut acc = fzero(n);
                for i in 0..fd.m {
                    let mut inner = fzero(n);
                    for (k, uk) in us.iter().enumerate() {
                        let c = fd.c(i, j, k);
                        if !c.is_zero() {
                            inner = inner.add(&uk.scale(c));
                        }
                    }
                    if !inner.is_zero() {
                        acc = acc.add(&us[i].mul(&inner));
                    }
                }
                acc
            })
            .collect();
        HamiltonianLift { fd: fd.clone(), v }
    }

    pub fn n(&self) -> usize {
        self.fd.n
    }

    pub fn u(&self, i: usize) -> FiberPoly {
        u(&self.fd.field, self.fd.n, i)
    }

    pub fn v(&self, j: usize) -> &FiberPoly {
        &self.v[j]
    }

    pub fn apply(&self, f: &FiberPoly) -> Result<FiberPoly> {
        if f.nvars() != self.fd.n {
            return Err(Error::DimensionMismatch(format!(
                "fiber polynomial in {} variables, frame of dimension {}",
                f.nvars(),
                self.fd.n
            )));
        }
        Ok(self.lift(f))
    }

    pub(crate) fn lift(&self, f: &FiberPoly) -> FiberPoly {
        let n = self.fd.n;
        let mut acc = fzero(n);
        if self.fd.action.is_some() && f.terms().any(|(_, c)| !c.is_const()) {
            for i in 0..self.fd.m {
                let d = f.map_coeffs(|c| self.fd.x_apply(i, c));
                if !d.is_zero() {
                    acc = acc.add(&self.u(i).mul(&d));
                }
            }
        }
        for j in 0..n {
            if self.v[j].is_zero() || !f.uses_var(j) {
                continue;
            }
            acc = acc.add(&self.v[j].mul(&f.derivative(j)));
        }
        acc
    }

    /// `vec h₁` of a function on the base: `Σ_{i≤m} u_i X_i(s)`.
    pub fn of_scalar(&self, s: &Scalar) -> FiberPoly {
        let n = self.fd.n;
        let mut acc = fzero(n);
        for i in 0..self.fd.m {
            let d = self.fd.x_apply(i, s);
            if !d.is_zero() {
                acc = acc.add(&self.u(i).scale(&d));
            }
        }
        acc
    }
}

/// Fiber polynomials shared by every equation of the system.
#[derive(Clone, Debug)]
pub struct PairTerms {
    /// `q[j][k] = Σ_{i≤m} c^k_{ij} u_i` for all `j, k`.
    pub q: Vec<Vec<FiberPoly>>,
    pub p: FiberPoly,
    pub h1p: FiberPoly,
    /// `W_k = Σ_{i≤m} u_i (α_i² q_{ki} + ½ X_k(α_i²) u_i)`, indexed by `k - m`.
    pub w: Vec<FiberPoly>,
    /// `R_j` without its `-½α_j² u_j vec h₁(P)/P` term.
    pub r_poly: Vec<FiberPoly>,
}

impl PairTerms {
    pub fn new(lift: &HamiltonianLift) -> Self {
        let fd = &lift.fd;
        let (n, m) = (fd.n, fd.m);
        let half = rat(1, 2);
        let us: Vec<FiberPoly> = (0..n).map(|i| lift.u(i)).collect();
        let q: Vec<Vec<FiberPoly>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let mut acc = fzero(n);
                        for (i, ui) in us.iter().enumerate().take(m) {
                            let c = fd.c(i, j, k);
                            if !c.is_zero() {
                                acc = acc.add(&ui.scale(c));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut p = fzero(n);
        for i in 0..m {
            p = p.add(&us[i].mul(&us[i]).scale(&fd.alpha_sq[i]));
        }
        let h1p = lift.lift(&p);
        let w = (m..n)
            .map(|k| {
                let mut acc = fzero(n);
                for i in 0..m {
                    let term = q[k][i]
                        .scale(&fd.alpha_sq[i])
                        .add(&us[i].scale(&fd.x_apply(k, &fd.alpha_sq[i]).scale(&half)));
                    acc = acc.add(&us[i].mul(&term));
                }
                acc
            })
            .collect();
        let r_poly = (0..m)
            .map(|j| {
                let mut r = lift.of_scalar(&fd.alpha_sq[j]).mul(&us[j]);
                r = r.add(&lift.v(j).scale(&fd.alpha_sq[j]));
                for i in 0..m {
                    let d = fd.x_apply(j, &fd.alpha_sq[i]);
                    if !d.is_zero() {
                        r = r.sub(&us[i].mul(&us[i]).scale(&d.scale(&half)));
                    }
                }
                for i in 0..m {
                    for k in 0..m {
                        let c = fd.c(i, j, k);
                        if !c.is_zero() {
                            r = r.sub(&us[i].mul(&us[k]).scale(&c.mul(&fd.alpha_sq[k])));
                        }
                    }
                }
                r
            })
            .collect();
        PairTerms { q, p, h1p, w, r_poly }
    }

    /// `Σ_{i≤m} X_i(α_i²)/α_i² u_i`.
    pub fn lemma_q(fd: &FrameData) -> Result<FiberPoly> {
        let n = fd.n;
        let mut acc = fzero(n);
        for i in 0..fd.m {
            let d = fd.x_apply(i, &fd.alpha_sq[i]);
            if !d.is_zero() {
                acc = acc.add(&u(&fd.field, n, i).scale(&d.div(&fd.alpha_sq[i])?));
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub struct Divisibility {
    pub p: FiberPoly,
    pub h1p: FiberPoly,
    pub holds: bool,
    /// The quotient `vec h₁(P)/P` when it exists.
    pub q: Option<FiberPoly>,
    /// Whether the quotient equals `Σ X_i(α_i²)/α_i² u_i`; `None` when not divisible.
    pub lemma_agrees: Option<bool>,
}

pub fn build_p_and_q(fd: &FrameData) -> Result<Divisibility> {
    let lift = HamiltonianLift::new(fd);
    let terms = PairTerms::new(&lift);
    divisibility_of(fd, &terms)
}

fn divisibility_of(fd: &FrameData, terms: &PairTerms) -> Result<Divisibility> {
    let quotient = divide_by_p(&terms.h1p, &terms.p)?;
    let lemma_agrees = match &quotient {
        Some(q) => Some(*q == PairTerms::lemma_q(fd)?),
        None => None,
    };
    Ok(Divisibility {
        p: terms.p.clone(),
        h1p: terms.h1p.clone(),
        holds: quotient.is_some(),
        q: quotient,
        lemma_agrees,
    })
}

#[derive(Clone, Debug)]
pub struct Layer {
    /// `m × (n-m)` block; column `c` corresponds to frame index `m + c`.
    pub a: Vec<Vec<FiberPoly>>,
    /// `α·b^s_j = num / P^p_pow`.
    pub b: Vec<FiberFrac>,
}

#[derive(Clone, Debug)]
pub struct FundamentalSystem {
    pub lift: HamiltonianLift,
    pub terms: PairTerms,
    pub divisibility: Divisibility,
    pub layers: Vec<Layer>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ampleness {
    pub ample: bool,
    pub k0: Option<usize>,
    pub layers_checked: usize,
}

impl Ampleness {
    /// Turn a negative answer into `Undetermined`.
    pub fn require(self) -> Result<Self> {
        if self.ample {
            Ok(self)
        } else {
            Err(Error::Undetermined(self.layers_checked))
        }
    }
}

/// `α·Φ_k = nums[k-m] / den`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaPhi {
    pub nums: Vec<FiberPoly>,
    pub den: FiberPoly,
}

impl AlphaPhi {
    pub fn to_exprs(&self) -> Vec<String> {
        let den_one = self.den.as_constant().is_some_and(Scalar::is_one);
        self.nums
            .iter()
            .map(|nk| {
                if den_one || nk.is_zero() {
                    fiber_to_expr(nk)
                } else {
                    format!("({})/({})", fiber_to_expr(nk), fiber_to_expr(&self.den))
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Found(AlphaPhi),
    Inconsistent(usize),
}

pub fn build_layers(fd: &FrameData, s_max: usize, strict: bool) -> Result<FundamentalSystem> {
    let mut sys = FundamentalSystem::new(fd, strict)?;
    if s_max == 0 {
        return Err(Error::BadInput("at least one layer is required".into()));
    }
    while sys.layers.len() < s_max {
        sys.extend();
    }
    Ok(sys)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let mut a: i64 = rng.gen_range(-60..=60);
            if a == 0 {
                a = 61;
            }
            rat(a, rng.gen_range(1..=9))
        })
        .collect()
}

impl FundamentalSystem {
    /// Layer 1 only.
    pub fn new(fd: &FrameData, strict: bool) -> Result<Self> {
        let lift = HamiltonianLift::new(fd);
        let terms = PairTerms::new(&lift);
        let divisibility = divisibility_of(fd, &terms)?;
        if strict && !divisibility.holds {
            return Err(Error::DivisibilityRequired);
        }
        let (n, m) = (fd.n, fd.m);
        let half = rat(1, 2);
        let a = (0..m).map(|j| (m..n).map(|k| terms.q[j][k].clone()).collect()).collect();
        let b = (0..m)
            .map(|j| {
                let corr = lift.u(j).scale(&fd.alpha_sq[j].scale(&half));
                match &divisibility.q {
                    Some(q) => FiberFrac { num: terms.r_poly[j].sub(&corr.mul(q)), p_pow: 0 },
                    None => {
                        let num = terms.p.mul(&terms.r_poly[j]).sub(&corr.mul(&terms.h1p));
                        let (num, k) = strip_p(&num, &terms.p, 1);
                        FiberFrac { num, p_pow: 1 - k }
                    }
                }
            })
            .collect();
        Ok(FundamentalSystem { lift, terms, divisibility, layers: vec![Layer { a, b }], seed: 0 })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn fd(&self) -> &FrameData {
        &self.lift.fd
    }

    pub fn n(&self) -> usize {
        self.lift.fd.n
    }

    pub fn m(&self) -> usize {
        self.lift.fd.m
    }

    /// Append layer `s+1`.
    pub fn extend(&mut self) {
        let (n, m) = (self.n(), self.m());
        let last = self.layers.last().expect("layer 1 always present");
        let t = &self.terms;
        let a: Vec<Vec<FiberPoly>> = (0..m)
            .map(|j| {
                (m..n)
                    .map(|k| {
                        let mut e = self.lift.lift(&last.a[j][k - m]);
                        for l in m..n {
                            let al = &last.a[j][l - m];
                            if !al.is_zero() && !t.q[l][k].is_zero() {
                                e = e.add(&al.mul(&t.q[l][k]));
                            }
                        }
                        e
                    })
                    .collect()
            })
            .collect();
        let one = self.fd().one();
        let b = (0..m)
            .map(|j| {
                let FiberFrac { num, p_pow: e } = &last.b[j];
                let mut aw = fzero(n);
                for k in m..n {
                    let ak = &last.a[j][k - m];
                    if !ak.is_zero() && !t.w[k - m].is_zero() {
                        aw = aw.add(&ak.mul(&t.w[k - m]));
                    }
                }
                let coef = self.fd().field.constant(Rational::from_integer((*e).into()) + rat(1, 2));
                match &self.divisibility.q {
                    Some(q) => {
                        let next = self
                            .lift
                            .lift(num)
                            .sub(&q.mul(num).scale(&coef))
                            .sub(&t.p.pow(*e, &one).mul(&aw));
                        let (next, k) = strip_p(&next, &t.p, *e);
                        FiberFrac { num: next, p_pow: e - k }
                    }
                    None => {
                        let next = t
                            .p
                            .mul(&self.lift.lift(num))
                            .sub(&t.h1p.mul(num).scale(&coef))
                            .sub(&t.p.pow(e + 1, &one).mul(&aw));
                        let (next, k) = strip_p(&next, &t.p, e + 1);
                        FiberFrac { num: next, p_pow: e + 1 - k }
                    }
                }
            })
            .collect();
        self.layers.push(Layer { a, b });
    }

    fn stacked(&self, s: usize) -> Vec<&Vec<FiberPoly>> {
        self.layers[..s].iter().flat_map(|l| l.a.iter()).collect()
    }

    fn eval_rows(&self, rows: &[&Vec<FiberPoly>], pt: &[Scalar]) -> Matrix<Scalar> {
        let zero = self.fd().zero();
        rows.iter()
            .map(|r| r.iter().map(|e| e.eval(pt).unwrap_or_else(|| zero.clone())).collect())
            .collect()
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }

    fn to_scalars(&self, pt: &[Rational]) -> Vec<Scalar> {
        pt.iter().map(|r| self.fd().field.constant(r.clone())).collect()
    }

    /// Generic rank of `A_s`: random rational points until two consecutive samples agree.
    pub fn generic_rank(&self, s: usize) -> Result<usize> {
        self.check_layer(s)?;
        if self.n() == self.m() {
            return Ok(0);
        }
        let rows = self.stacked(s);
        let mut rng = self.rng(s as u64);
        let mut best = 0;
        let mut prev = None;
        for _ in 0..8 {
            let pt = self.to_scalars(&random_point(&mut rng, self.n()));
            let r = linalg::rank(&self.eval_rows(&rows, &pt));
            best = best.max(r);
            if prev == Some(r) || best == self.n() - self.m() {
                break;
            }
            prev = Some(r);
        }
        Ok(best)
    }

    fn check_layer(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.layers.len() {
            return Err(Error::LayerOutOfRange { requested: s, stored: self.layers.len() });
        }
        Ok(())
    }

    /// Rank of `A_s` at a fiber point, with the base variables at the base point when possible.
    pub fn rank_at(&self, s: usize, at: &[Rational]) -> Result<usize> {
        self.check_layer(s)?;
        if at.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("point of length {}", at.len())));
        }
        let rows = self.stacked(s);
        let fd = self.fd();
        let m = self.eval_rows(&rows, &self.to_scalars(at));
        let m: Matrix<Scalar> = m
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e.eval(&fd.point, &[]) {
                        Ok(v) => fd.field.constant(v),
                        Err(_) => e,
                    })
                    .collect()
            })
            .collect();
        Ok(linalg::rank(&m))
    }

    /// `dim J^{(s+1)} = rank A_s + n + m`.
    pub fn jacobi_dimension(&self, s: usize, at: Option<&[Rational]>) -> Result<usize> {
        let r = match at {
            Some(pt) => self.rank_at(s, pt)?,
            None => self.generic_rank(s)?,
        };
        Ok(r + self.n() + self.m())
    }

    pub fn ampleness(&self, at: Option<&[Rational]>) -> Result<Ampleness> {
        let (n, m) = (self.n(), self.m());
        if n == m {
            return Ok(Ampleness { ample: true, k0: Some(1), layers_checked: self.layers.len() });
        }
        for s in 1..=self.layers.len() {
            let r = match at {
                Some(pt) => self.rank_at(s, pt)?,
                None => self.generic_rank(s)?,
            };
            if r == n - m {
                return Ok(Ampleness { ample: true, k0: Some(s + 1), layers_checked: self.layers.len() });
            }
        }
        Ok(Ampleness { ample: false, k0: None, layers_checked: self.layers.len() })
    }

    /// Least `s` with `rank A_s = n - m`.
    pub fn saturation_layer(&self) -> Result<Option<usize>> {
        let k = self.n() - self.m();
        for s in 1..=self.layers.len() {
            if self.generic_rank(s)? == k {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    pub fn solve(&self) -> Result<Solution> {
        let (n, m) = (self.n(), self.m());
        let k = n - m;
        let fd = self.fd();
        let one = fd.one();
        let witness = if k == 0 {
            AlphaPhi { nums: Vec::new(), den: Poly::constant(n, one.clone()) }
        } else {
            let s = self.saturation_layer()?.ok_or(Error::RankDeficient)?;
            let rows_a = self.stacked(s);
            let rows_b: Vec<&FiberFrac> = self.layers[..s].iter().flat_map(|l| l.b.iter()).collect();
            let mut rng = self.rng(0xC0FFEE ^ s as u64);
            let mut chosen = None;
            for _ in 0..6 {
                let pt = self.to_scalars(&random_point(&mut rng, n));
                let idx = linalg::independent_rows(&self.eval_rows(&rows_a, &pt));
                if idx.len() < k {
                    continue;
                }
                let idx: Vec<usize> = idx[..k].to_vec();
                let mat: Matrix<FiberPoly> = idx.iter().map(|&r| rows_a[r].clone()).collect();
                let det = linalg::bareiss_det(&mat, n);
                if !det.is_zero() {
                    chosen = Some((idx, mat, det));
                    break;
                }
            }
            let (idx, mat, det) = chosen.ok_or(Error::RankDeficient)?;
            let top = idx.iter().map(|&r| rows_b[r].p_pow).max().unwrap_or(0);
            let rhs: Vec<FiberPoly> = idx
                .iter()
                .map(|&r| rows_b[r].num.mul(&self.terms.p.pow(top - rows_b[r].p_pow, &one)))
                .collect();
            let nums: Vec<FiberPoly> = (0..k)
                .map(|c| {
                    let mut mc = mat.clone();
                    for (row, rv) in mc.iter_mut().zip(&rhs) {
                        row[c] = rv.clone();
                    }
                    linalg::bareiss_det(&mc, n)
                })
                .collect();
            simplify(nums, det, &self.terms.p, top)
        };
        let p = &self.terms.p;
        for (s, layer) in self.layers.iter().enumerate() {
            for j in 0..m {
                let mut lhs = fzero(n);
                for c in 0..k {
                    if !layer.a[j][c].is_zero() && !witness.nums[c].is_zero() {
                        lhs = lhs.add(&layer.a[j][c].mul(&witness.nums[c]));
                    }
                }
                let lhs = lhs.mul(&p.pow(layer.b[j].p_pow, &one));
                if lhs != layer.b[j].num.mul(&witness.den) {
                    return Ok(Solution::Inconsistent(s + 1));
                }
            }
        }
        Ok(Solution::Found(witness))
    }

    pub fn ranks(&self) -> Result<Vec<usize>> {
        (1..=self.layers.len()).map(|s| self.generic_rank(s)).collect()
    }

    /// Weighted-degree bound violations; with `exact` the entries must also be
    /// homogeneous of the extremal degree.
    pub fn degree_violations(&self, exact: bool) -> Vec<String> {
        let (n, m) = (self.n(), self.m());
        let w = &self.fd().weights;
        let mut out = Vec::new();
        for (s0, layer) in self.layers.iter().enumerate() {
            let s = (s0 + 1) as i64;
            for j in 0..m {
                for k in m..n {
                    let e = &layer.a[j][k - m];
                    if e.is_zero() {
                        continue;
                    }
                    let bound = 2 * s - w.0[k] as i64 + 1;
                    let d = weighted_degree(e, w).expect("nonzero") as i64;
                    if d > bound || (exact && (d != bound || !is_w_homogeneous(e, w))) {
                        out.push(format!("a^{s}_{{{},{}}} has weighted degree {d}, bound {bound}", j + 1, k + 1));
                    }
                }
                let b = &layer.b[j];
                if b.num.is_zero() {
                    continue;
                }
                let d = weighted_degree(&b.num, w).expect("nonzero") as i64 - 2 * b.p_pow as i64;
                if d > 2 * s + 1 || (exact && !is_w_homogeneous(&b.num, w)) {
                    out.push(format!("B^{s}_{} has weighted degree {d}, bound {}", j + 1, 2 * s + 1));
                }
            }
        }
        out
    }

    /// `a^{s+1} - vec h₁(a^s) - Σ a^s q` for every stored pair of layers.
    pub fn recursion_holds(&self) -> bool {
        let (n, m) = (self.n(), self.m());
        self.layers.windows(2).all(|w| {
            (0..m).all(|j| {
                (m..n).all(|k| {
                    let mut e = self.lift.lift(&w[0].a[j][k - m]);
                    for l in m..n {
                        e = e.add(&w[0].a[j][l - m].mul(&self.terms.q[l][k]));
                    }
                    e == w[1].a[j][k - m]
                })
            })
        })
    }
}

/// Cancel common monomials, the minor and powers of `P` between numerators and denominator.
fn simplify(mut nums: Vec<FiberPoly>, det: FiberPoly, p: &FiberPoly, mut top: u32) -> AlphaPhi {
    let n = det.nvars();
    let one = det.leading().map(|(_, c)| c.one_like()).expect("nonzero minor");
    let mut den_rest = det;
    if let Some(qs) = nums.iter().map(|x| x.exact_div(&den_rest)).collect::<Option<Vec<_>>>() {
        nums = qs;
        den_rest = Poly::constant(n, one.clone());
    }
    while top > 0 {
        match nums.iter().map(|x| divide_by_p(x, p).ok().flatten()).collect::<Option<Vec<_>>>() {
            Some(qs) => {
                nums = qs;
                top -= 1;
            }
            None => break,
        }
    }
    let mut den = den_rest.mul(&p.pow(top, &one));
    // monomial content
    let content = nums
        .iter()
        .chain(std::iter::once(&den))
        .flat_map(|x| x.terms().map(|(m, _)| m.clone()))
        .reduce(|a, b| a.gcd(&b))
        .unwrap_or_else(|| Mono::one(n));
    if !content.is_one() {
        let cancel = |x: &FiberPoly| x.map_monos(n, |m| m.quotient_of(&content));
        nums = nums.iter().map(cancel).collect();
        den = cancel(&den);
    }
    let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
    let inv = lc.inv().expect("nonzero leading coefficient");
    AlphaPhi { nums: nums.iter().map(|x| x.scale(&inv)).collect(), den: den.scale(&inv) }
}

pub fn solve_system(sys: &FundamentalSystem) -> Result<Solution> {
    sys.solve()
}

#[derive(Clone, Debug)]
pub struct Residuals {
    pub horizontal: Vec<FiberPoly>,
    pub vertical: Vec<FiberPoly>,
}

impl Residuals {
    pub fn all_zero(&self) -> bool {
        self.horizontal.iter().chain(&self.vertical).all(Poly::is_zero)
    }

    /// First failing equation: `("horizontal", j)` or `("vertical", k)` with a 1-based frame
    /// index.
    pub fn first_failure(&self) -> Option<(&'static str, usize)> {
        if let Some(j) = self.horizontal.iter().position(|r| !r.is_zero()) {
            return Some(("horizontal", j + 1));
        }
        let m = self.horizontal.len();
        self.vertical.iter().position(|r| !r.is_zero()).map(|k| ("vertical", m + k + 1))
    }
}

/// Cleared residuals of the two coordinate conditions for `αΦ_k = N_k/D`.
pub fn verify_orbital_map(fd: &FrameData, phi: &AlphaPhi) -> Result<Residuals> {
    let (n, m) = (fd.n, fd.m);
    if phi.nums.len() != n - m || phi.den.is_zero() {
        return Err(Error::DimensionMismatch(format!(
            "witness has {} entries, expected {}",
            phi.nums.len(),
            n - m
        )));
    }
    let lift = HamiltonianLift::new(fd);
    let t = PairTerms::new(&lift);
    let d = &phi.den;
    let half = rat(1, 2);
    let horizontal = (0..m)
        .map(|j| {
            let mut s = fzero(n);
            for k in m..n {
                s = s.add(&t.q[j][k].mul(&phi.nums[k - m]));
            }
            let rnum = t
                .p
                .mul(&t.r_poly[j])
                .sub(&lift.u(j).scale(&fd.alpha_sq[j].scale(&half)).mul(&t.h1p));
            t.p.mul(&s).sub(&d.mul(&rnum))
        })
        .collect();
    let hd = lift.lift(d);
    let two_p = t.p.scale_int(2);
    let vertical = (m..n)
        .map(|k| {
            let nk = &phi.nums[k - m];
            let mut s = fzero(n);
            for l in m..n {
                s = s.add(&t.q[k][l].mul(&phi.nums[l - m]));
            }
            two_p
                .mul(&lift.lift(nk).mul(d).sub(&nk.mul(&hd)))
                .sub(&t.h1p.mul(nk).mul(d))
                .sub(&two_p.mul(d).mul(&s))
                .sub(&two_p.mul(d).mul(d).mul(&t.w[k - m]))
        })
        .collect();
    Ok(Residuals { horizontal, vertical })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstIntegral {
    pub exists: bool,
    pub nontrivial: bool,
    pub n_distinct: usize,
    pub q: FiberPoly,
    pub lhs: FiberPoly,
}

/// Logarithmic form of `vec h₁((∏α_ℓ²)^{-2/(N+1)} P) = 0`.
pub fn first_integral(fd: &FrameData) -> Result<FirstIntegral> {
    let div = build_p_and_q(fd)?;
    let q = div.q.ok_or(Error::DivisibilityRequired)?;
    let classes = fd.eigen_partition();
    let nd = classes.len();
    let mut lhs = fzero(fd.n);
    for cl in &classes {
        let a = &fd.alpha_sq[cl[0]];
        for i in 0..fd.m {
            let d = fd.x_apply(i, a);
            if !d.is_zero() {
                lhs = lhs.add(&u(&fd.field, fd.n, i).scale(&d.div(a)?));
            }
        }
    }
    let lhs = lhs.scale(&fd.field.constant(rat(2, nd as i64 + 1)));
    let exists = lhs == q;
    Ok(FirstIntegral { exists, nontrivial: exists && nd > 1, n_distinct: nd, q, lhs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    /// 1-based indices of the frame fields or eigenvalue classes involved.
    pub indices: Vec<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsequenceReport {
    pub g1g2: bool,
    pub g2g1: bool,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

/// Identities forced by divisibility in both directions.
///
/// Rules: (i) `c^k_{ij} = 0` for `k > m` when `α_i ≠ α_j`; (ii)
/// `X_i(α_j²/α_i²) = 2c^j_{ij}(1 - α_j²/α_i²)`; (iii) `X_i(α_{ℓ'}⁴/α_ℓ²) = 0` for
/// `i ∈ I_ℓ`, `ℓ' ≠ ℓ`; (iv) `X_i(α_{ℓ'}²/α_{ℓ''}²) = 0` for `i ∈ I_ℓ`, `ℓ', ℓ'' ≠ ℓ`.
/// With `require`, a pair failing divisibility either way is an error.
pub fn divisibility_consequence_checks(fd: &FrameData, require: bool) -> Result<ConsequenceReport> {
    let g1g2 = build_p_and_q(fd)?.holds;
    let g2g1 = build_p_and_q(&swap_pair(fd)?)?.holds;
    if require && !(g1g2 && g2g1) {
        return Err(Error::DivisibilityRequired);
    }
    let (n, m) = (fd.n, fd.m);
    let a = &fd.alpha_sq;
    let mut checked = 0;
    let mut violations = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if a[i] == a[j] {
                continue;
            }
            for k in m..n {
                checked += 1;
                if !fd.c(i, j, k).is_zero() {
                    violations.push(Violation {
                        rule: "i",
                        indices: vec![i + 1, j + 1, k + 1],
                        detail: format!(
                            "c^{}_{{{},{}}} = {} although alpha_{} != alpha_{}",
                            k + 1,
                            i + 1,
                            j + 1,
                            fd.c(i, j, k).to_expr(),
                            i + 1,
                            j + 1
                        ),
                    });
                }
            }
        }
    }
    let one = fd.one();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            checked += 1;
            let ratio = a[j].div(&a[i])?;
            let lhs = fd.x_apply(i, &ratio);
            let rhs = fd.c(i, j, j).scale(&Rational::from_integer(2.into())).mul(&one.sub(&ratio));
            if lhs != rhs {
                violations.push(Violation {
                    rule: "ii",
                    indices: vec![i + 1, j + 1],
                    detail: format!("X_{}(alpha_{j1}^2/alpha_{i1}^2) - 2c^{j1}_{{{i1},{j1}}}(1 - alpha_{j1}^2/alpha_{i1}^2) = {}", i + 1, lhs.sub(&rhs).to_expr(), i1 = i + 1, j1 = j + 1),
                });
            }
        }
    }
    let classes = fd.eigen_partition();
    for (l, cl) in classes.iter().enumerate() {
        let al = &a[cl[0]];
        for &i in cl {
            for (l1, c1) in classes.iter().enumerate() {
                if l1 == l {
                    continue;
                }
                let a1 = &a[c1[0]];
                checked += 1;
                let d = fd.x_apply(i, &a1.mul(a1).div(al)?);
                if !d.is_zero() {
                    violations.push(Violation {
                        rule: "iii",
                        indices: vec![i + 1, l + 1, l1 + 1],
                        detail: format!("X_{}(alpha_[{}]^4/alpha_[{}]^2) = {}", i + 1, l1 + 1, l + 1, d.to_expr()),
                    });
                }
                for (l2, c2) in classes.iter().enumerate() {
                    if l2 == l || l2 == l1 {
                        continue;
                    }
                    checked += 1;
                    let d = fd.x_apply(i, &a1.div(&a[c2[0]])?);
                    if !d.is_zero() {
                        violations.push(Violation {
                            rule: "iv",
                            indices: vec![i + 1, l1 + 1, l2 + 1],
                            detail: format!("X_{}(alpha_[{}]^2/alpha_[{}]^2) = {}", i + 1, l1 + 1, l2 + 1, d.to_expr()),
                        });
                    }
                }
            }
        }
    }
    Ok(ConsequenceReport { g1g2, g2g1, checked, violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    G1G2,
    G2G1,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::G1G2 => "g1g2",
            Direction::G2G1 => "g2g1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    OrbitalDiffeoFound,
    InconsistentAtLayer(usize),
    DivisibilityFailed(Direction),
    ConformalPair,
    Undetermined(usize),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::OrbitalDiffeoFound => "orbital_diffeo_found",
            Verdict::InconsistentAtLayer(_) => "inconsistent_at_layer",
            Verdict::DivisibilityFailed(_) => "divisibility_failed",
            Verdict::ConformalPair => "conformal_pair",
            Verdict::Undetermined(_) => "undetermined",
        }
    }
}

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct AnalyzeOptions {
    /// Hard cap on the number of layers; `2n` when absent.
    pub max_layers: Option<usize>,
    pub seed: u64,
}


#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub conformal: bool,
    pub divisibility_g1g2: bool,
    pub divisibility_g2g1: bool,
    pub q: Option<FiberPoly>,
    pub ranks: Vec<usize>,
    pub k0: Option<usize>,
    pub witness: Option<AlphaPhi>,
    pub residuals_zero: bool,
    pub first_integral: Option<FirstIntegral>,
    pub affine: bool,
    pub diagnostics: Vec<Violation>,
    pub layers_used: usize,
}

pub const LOCALITY_NOTE: &str =
    "negative verdicts concern this pair at this base point with these data only";

pub fn analyze_pair(fd: &FrameData, opts: &AnalyzeOptions) -> Result<EquivalenceReport> {
    let cap = match opts.max_layers {
        Some(0) => return Err(Error::BadInput("max_layers must be at least 1".into())),
        Some(c) => c,
        None => 2 * fd.n,
    };
    let conformal = fd.distinct_eigenvalues() == 1;
    let swapped = swap_pair(fd)?;
    let d12 = build_p_and_q(fd)?;
    let d21 = build_p_and_q(&swapped)?;
    let mut report = EquivalenceReport {
        verdict: Verdict::Undetermined(0),
        conformal,
        divisibility_g1g2: d12.holds,
        divisibility_g2g1: d21.holds,
        q: d12.q.clone(),
        ranks: Vec::new(),
        k0: None,
        witness: None,
        residuals_zero: false,
        first_integral: None,
        affine: false,
        diagnostics: Vec::new(),
        layers_used: 0,
    };
    if d12.holds && d21.holds {
        report.diagnostics = divisibility_consequence_checks(fd, false)?.violations;
        report.first_integral = Some(first_integral(fd)?);
    }
    if !d12.holds {
        report.verdict = Verdict::DivisibilityFailed(Direction::G1G2);
        return Ok(report);
    }
    if !d21.holds {
        report.verdict = Verdict::DivisibilityFailed(Direction::G2G1);
        return Ok(report);
    }
    let mut sys = FundamentalSystem::new(fd, false)?.with_seed(opts.seed);
    let k = fd.n - fd.m;
    let mut saturated = if k == 0 { Some(1) } else { None };
    while saturated.is_none() {
        if sys.generic_rank(sys.layers.len())? == k {
            saturated = Some(sys.layers.len());
        } else if sys.layers.len() >= cap {
            break;
        } else {
            sys.extend();
        }
    }
    let finish = |sys: &FundamentalSystem, report: &mut EquivalenceReport| -> Result<()> {
        report.ranks = sys.ranks()?;
        report.k0 = sys.ampleness(None)?.k0;
        report.layers_used = sys.layers.len();
        Ok(())
    };
    let Some(s_star) = saturated else {
        finish(&sys, &mut report)?;
        report.verdict = if conformal { Verdict::ConformalPair } else { Verdict::Undetermined(cap) };
        return Ok(report);
    };
    while sys.layers.len() < (s_star + 2).min(cap.max(s_star)) {
        sys.extend();
    }
    loop {
        match sys.solve()? {
            Solution::Inconsistent(s) => {
                finish(&sys, &mut report)?;
                report.verdict =
                    if conformal { Verdict::ConformalPair } else { Verdict::InconsistentAtLayer(s) };
                return Ok(report);
            }
            Solution::Found(w) => {
                let res = verify_orbital_map(fd, &w)?;
                if res.all_zero() {
                    finish(&sys, &mut report)?;
                    report.residuals_zero = true;
                    report.affine = fd.alpha_sq.iter().all(Scalar::is_const);
                    report.witness = Some(w);
                    report.verdict = Verdict::OrbitalDiffeoFound;
                    return Ok(report);
                }
                // some later layer must fail
                if sys.layers.len() >= cap {
                    finish(&sys, &mut report)?;
                    report.verdict =
                        if conformal { Verdict::ConformalPair } else { Verdict::Undetermined(cap) };
                    return Ok(report);
                }
                sys.extend();
            }
        }
    }
}

/// Coefficients evaluated at the base point.
pub fn eval_fiber_at_point(fd: &FrameData, f: &FiberPoly) -> Result<FiberPoly> {
    let mut out = fzero(f.nvars());
    for (mono, c) in f.terms() {
        let v = c.eval(&fd.point, &[])?;
        out.add_term(mono.clone(), fd.field.constant(v));
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::parse_fiber;
    use crate::fiber::WeightVector;
    use crate::frame::{FrameMode, Structure, VectorField};
    use crate::rational::int;
    use crate::scalar::ScalarField;

    pub(crate) fn heis(a: Rational, b: Rational) -> FrameData {
        let f = ScalarField::new(vec![]);
        let mut st = Structure::zeros(&f, 3);
        st.set_anti(0, 1, 2, f.one());
        FrameData {
            field: f.clone(),
            n: 3,
            m: 2,
            weights: WeightVector(vec![1, 1, 2]),
            point: vec![],
            structure: st,
            alpha_sq: vec![f.constant(a), f.constant(b)],
            action: None,
            mode: FrameMode::Abstract,
        }
    }

    pub(crate) fn double_heis(a: Rational, b: Rational) -> FrameData {
        let f = ScalarField::new(vec![]);
        let mut st = Structure::zeros(&f, 6);
        st.set_anti(0, 1, 4, f.one());
        st.set_anti(2, 3, 5, f.one());
        FrameData {
            field: f.clone(),
            n: 6,
            m: 4,
            weights: WeightVector(vec![1, 1, 1, 1, 2, 2]),
            point: vec![],
            structure: st,
            alpha_sq: vec![f.constant(a.clone()), f.constant(a), f.constant(b.clone()), f.constant(b)],
            action: None,
            mode: FrameMode::Abstract,
        }
    }

    fn fp(fd: &FrameData, s: &str) -> FiberPoly {
        parse_fiber(s, &fd.field, fd.n).unwrap()
    }

    #[test]
    fn lift_examples() {
        let fd = heis(int(1), int(1));
        let l = HamiltonianLift::new(&fd);
        assert_eq!(l.apply(&l.u(0)).unwrap(), fp(&fd, "-u2*u3"));
        assert!(l.apply(&l.u(2)).unwrap().is_zero());
        assert!(l.apply(&fp(&fd, "1/2*(u1^2+u2^2)")).unwrap().is_zero());
        assert!(matches!(l.apply(&fzero(2)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn divisibility_examples() {
        let d = build_p_and_q(&heis(int(4), int(4))).unwrap();
        assert!(d.holds && d.h1p.is_zero());
        assert_eq!(d.q, Some(fzero(3)));
        let fd = heis(int(1), int(4));
        let d = build_p_and_q(&fd).unwrap();
        assert!(!d.holds);
        assert_eq!(d.h1p, fp(&fd, "6*u1*u2*u3"));

        let f = ScalarField::new(vec!["x".into()]);
        let a = crate::expr::parse_scalar("1+x^2", &f).unwrap();
        let fd1 = FrameData {
            field: f.clone(),
            n: 1,
            m: 1,
            weights: WeightVector(vec![1]),
            point: vec![int(0)],
            structure: Structure::zeros(&f, 1),
            alpha_sq: vec![a],
            action: Some(vec![VectorField(vec![f.one()])]),
            mode: FrameMode::Fields,
        };
        let d = build_p_and_q(&fd1).unwrap();
        assert!(d.holds);
        assert_eq!(d.lemma_agrees, Some(true));
    }

    #[test]
    fn heisenberg_layers() {
        let fd = heis(int(9), int(9));
        let sys = build_layers(&fd, 2, true).unwrap();
        let l1 = &sys.layers[0];
        assert_eq!(l1.a[0][0], fp(&fd, "-u2"));
        assert_eq!(l1.a[1][0], fp(&fd, "u1"));
        assert_eq!(l1.b[0], FiberFrac { num: fp(&fd, "-9*u2*u3"), p_pow: 0 });
        assert_eq!(l1.b[1], FiberFrac { num: fp(&fd, "9*u1*u3"), p_pow: 0 });
        assert_eq!(sys.layers[1].a[0][0], fp(&fd, "-u1*u3"));
        assert_eq!(sys.layers[1].a[1][0], fp(&fd, "-u2*u3"));
        assert!(sys.recursion_holds());
        assert!(sys.degree_violations(true).is_empty());
        assert_eq!(
            build_layers(&heis(int(1), int(4)), 1, true).unwrap_err(),
            Error::DivisibilityRequired
        );
    }

    #[test]
    fn jacobi_dimensions_and_ampleness() {
        let sys = build_layers(&heis(int(1), int(1)), 3, true).unwrap();
        assert_eq!(sys.jacobi_dimension(1, None).unwrap(), 6);
        let pole = [int(0), int(0), int(1)];
        assert_eq!(sys.jacobi_dimension(1, Some(&pole)).unwrap(), 5);
        assert_eq!(sys.ampleness(None).unwrap().k0, Some(2));
        let at = sys.ampleness(Some(&pole)).unwrap();
        assert!(!at.ample);
        assert_eq!(at.clone().require().unwrap_err(), Error::Undetermined(3));
        assert_eq!(
            sys.jacobi_dimension(4, None).unwrap_err(),
            Error::LayerOutOfRange { requested: 4, stored: 3 }
        );
    }

    #[test]
    fn solve_and_verify() {
        let fd = heis(int(4), int(4));
        let sys = build_layers(&fd, 3, true).unwrap();
        let Solution::Found(w) = sys.solve().unwrap() else { panic!() };
        assert_eq!(w.nums, vec![fp(&fd, "4*u3")]);
        assert!(verify_orbital_map(&fd, &w).unwrap().all_zero());
        let bad = AlphaPhi { nums: vec![fp(&fd, "4*u3 + u1")], den: w.den.clone() };
        let res = verify_orbital_map(&fd, &bad).unwrap();
        assert!(!res.vertical[0].is_zero());

        // the first layer alone is solvable; the second one is not
        let fd14 = heis(int(1), int(4));
        let one = build_layers(&fd14, 1, false).unwrap();
        let Solution::Found(w) = one.solve().unwrap() else { panic!() };
        assert_eq!(
            w.nums[0].mul(&fp(&fd14, "u1^2 + 4*u2^2")),
            fp(&fd14, "4*u3*(u1^2 + u2^2)").mul(&w.den)
        );
        assert!(!verify_orbital_map(&fd14, &w).unwrap().all_zero());
        let inc = build_layers(&fd14, 2, false).unwrap();
        assert_eq!(inc.solve().unwrap(), Solution::Inconsistent(2));

        let dh = double_heis(int(2), int(5));
        let sys = build_layers(&dh, 3, true).unwrap();
        let Solution::Found(w) = sys.solve().unwrap() else { panic!() };
        assert_eq!(w.nums, vec![fp(&dh, "2*u5"), fp(&dh, "5*u6")]);
        assert!(verify_orbital_map(&dh, &w).unwrap().all_zero());
    }

    #[test]
    fn first_integrals_and_consequences() {
        let fi = first_integral(&heis(int(4), int(4))).unwrap();
        assert!(fi.exists && !fi.nontrivial);
        assert_eq!(first_integral(&heis(int(1), int(4))).unwrap_err(), Error::DivisibilityRequired);
        let rep = divisibility_consequence_checks(&heis(int(1), int(4)), false).unwrap();
        assert_eq!(rep.violations[0].rule, "i");
        assert_eq!(rep.violations[0].indices, vec![1, 2, 3]);
        assert!(divisibility_consequence_checks(&heis(int(1), int(4)), true).is_err());
        let rep = divisibility_consequence_checks(&double_heis(int(1), int(3)), true).unwrap();
        assert!(rep.violations.is_empty());
        let fi = first_integral(&double_heis(int(1), int(3))).unwrap();
        assert!(fi.exists && fi.nontrivial && fi.n_distinct == 2);
    }

    #[test]
    fn analyze_examples() {
        let opts = AnalyzeOptions::default();
        let r = analyze_pair(&heis(int(1), int(4)), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::DivisibilityFailed(Direction::G1G2));
        let r = analyze_pair(&heis(int(9), int(9)), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::OrbitalDiffeoFound);
        assert!(r.conformal && r.residuals_zero && r.affine);
        let r = analyze_pair(&double_heis(int(2), int(4)), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::OrbitalDiffeoFound);
        assert!(r.first_integral.unwrap().nontrivial);
        assert!(analyze_pair(&heis(int(1), int(1)), &AnalyzeOptions { max_layers: Some(0), seed: 0 }).is_err());
    }
}
