//! Carnot algebras, nilpotent approximation, highest-weight layer comparison
//! and the product-structure decomposition of a Carnot algebra with constant
//! eigenvalues.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fiber::{highest_weight_part, FiberPoly, WeightVector};
use crate::frame::{FrameData, FrameMode, Structure};
use crate::fundamental::{build_layers, eval_fiber_at_point};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{format_rational, Rational};
use crate::scalar::ScalarField;

/// Graded nilpotent Lie algebra given by rational structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct CarnotAlgebra {
    /// Cumulative dimensions `m_1 < m_2 < ... < m_r = n`.
    pub grading: Vec<usize>,
    c: Vec<Rational>,
}

impl CarnotAlgebra {
    /// Validated algebra from `(i, j, k, c^k_{ij})` entries (zero-based, antisymmetric completion).
    pub fn new(grading: Vec<usize>, entries: &[(usize, usize, usize, Rational)]) -> Result<Self> {
        if grading.is_empty() || grading.windows(2).any(|w| w[0] >= w[1]) || grading[0] == 0 {
            return Err(Error::BadInput("grading must be strictly increasing and positive".into()));
        }
        let n = *grading.last().unwrap();
        let mut alg = CarnotAlgebra { grading, c: vec![Rational::zero(); n * n * n] };
        for (i, j, k, v) in entries {
            if *i >= n || *j >= n || *k >= n {
                return Err(Error::BadInput(format!("index out of range in entry ({i},{j},{k})")));
            }
            if i == j && !v.is_zero() {
                return Err(Error::BadInput(format!("c^{}_{{{},{}}} must vanish", k + 1, i + 1, j + 1)));
            }
            alg.set_anti(*i, *j, *k, v.clone());
        }
        alg.check()?;
        Ok(alg)
    }

    pub fn n(&self) -> usize {
        *self.grading.last().unwrap()
    }

    pub fn m(&self) -> usize {
        self.grading[0]
    }

    pub fn step(&self) -> usize {
        self.grading.len()
    }

    pub fn weights(&self) -> WeightVector {
        WeightVector::from_growth(&self.grading)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        let n = self.n();
        &self.c[(i * n + j) * n + k]
    }

    fn set_anti(&mut self, i: usize, j: usize, k: usize, v: Rational) {
        let n = self.n();
        self.c[(j * n + i) * n + k] = -v.clone();
        self.c[(i * n + j) * n + k] = v;
    }

    /// Nonzero `(i, j, k, c)` with `i < j`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Rational)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    /// `[x, y]` for coordinate vectors.
    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.n();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        *o += &xy * c;
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        let w = self.weights();
        for (i, j, k, _) in self.entries() {
            if w.0[k] != w.0[i] + w.0[j] {
                return Err(Error::BadInput(format!(
                    "c^{}_{{{},{}}} is nonzero but weights {} + {} != {}",
                    k + 1,
                    i + 1,
                    j + 1,
                    w.0[i],
                    w.0[j],
                    w.0[k]
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for p in 0..n {
                        let mut r = Rational::zero();
                        for l in 0..n {
                            r += self.get(i, j, l) * self.get(l, k, p)
                                + self.get(j, k, l) * self.get(l, i, p)
                                + self.get(k, i, l) * self.get(l, j, p);
                        }
                        if !r.is_zero() {
                            return Err(Error::JacobiViolation(i + 1, j + 1, k + 1));
                        }
                    }
                }
            }
        }
        // [V1, V_s] spans V_{s+1}
        let g = &self.grading;
        for s in 1..g.len() {
            let prev = if s >= 2 { g[s - 2] } else { 0 };
            let rows: Matrix<Rational> = (0..g[0])
                .flat_map(|i| (prev..g[s - 1]).map(move |j| (i, j)))
                .map(|(i, j)| (g[s - 1]..g[s]).map(|k| self.get(i, j, k).clone()).collect())
                .collect();
            if linalg::rank(&rows) != g[s] - g[s - 1] {
                return Err(Error::NotFundamental(format!(
                    "brackets of the first layer with layer {} do not span layer {}",
                    s,
                    s + 1
                )));
            }
        }
        Ok(())
    }

    /// Abstract frame with constant eigenvalues.
    pub fn to_frame(&self, alpha_sq: &[Rational]) -> Result<FrameData> {
        if alpha_sq.len() != self.m() {
            return Err(Error::BadInput(format!("{} eigenvalues for rank {}", alpha_sq.len(), self.m())));
        }
        let f = ScalarField::new(vec![]);
        let n = self.n();
        let mut st = Structure::zeros(&f, n);
        for (i, j, k, v) in self.entries() {
            st.set_anti(i, j, k, f.constant(v));
        }
        Ok(FrameData {
            field: f.clone(),
            n,
            m: self.m(),
            weights: self.weights(),
            point: vec![],
            structure: st,
            alpha_sq: alpha_sq.iter().map(|a| f.constant(a.clone())).collect(),
            action: None,
            mode: FrameMode::Abstract,
        })
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (i, j, k, v) in self.entries() {
            parts.push(format!("c^{}_{{{},{}}} = {}", k + 1, i + 1, j + 1, format_rational(&v)));
        }
        format!("grading {:?}; {}", self.grading, parts.join(", "))
    }
}

/// Keep the weight-respecting structure constants at the base point.
pub fn nilpotent_approximation(fd: &FrameData) -> Result<CarnotAlgebra> {
    let growth = fd.weights.growth();
    let w = &fd.weights.0;
    let mut entries = Vec::new();
    for i in 0..fd.n {
        for j in i + 1..fd.n {
            for k in 0..fd.n {
                if w[i] + w[j] != w[k] {
                    continue;
                }
                let c = fd.c(i, j, k);
                if c.is_zero() {
                    continue;
                }
                let v = c.eval(&fd.point, &[])?;
                if !v.is_zero() {
                    entries.push((i, j, k, v));
                }
            }
        }
    }
    CarnotAlgebra::new(growth, &entries)
}

/// Highest weighted parts of layer `s` of `fd` at the base point agree with
/// layer `s` of the approximation (eigenvalues frozen at the base point).
pub fn hat_layer_check(fd: &FrameData, carnot: &CarnotAlgebra, s: usize) -> Result<bool> {
    if s == 0 {
        return Err(Error::LayerOutOfRange { requested: 0, stored: 0 });
    }
    let alpha0: Vec<Rational> =
        fd.alpha_sq.iter().map(|a| a.eval(&fd.point, &[])).collect::<Result<_>>()?;
    let hat_fd = carnot.to_frame(&alpha0)?;
    let sys = build_layers(fd, s, false)?;
    let hat = build_layers(&hat_fd, s, false)?;
    let (l, lh) = (&sys.layers[s - 1], &hat.layers[s - 1]);
    let w = &fd.weights;
    let top = |p: &FiberPoly| -> Result<FiberPoly> {
        let e = eval_fiber_at_point(fd, p)?;
        if e.is_zero() {
            Ok(e)
        } else {
            highest_weight_part(&e, w)
        }
    };
    // compare across fields through the constant representation
    let same = |a: &FiberPoly, b: &FiberPoly| -> bool {
        a.terms().count() == b.terms().count()
            && a.terms().zip(b.terms()).all(|((ma, ca), (mb, cb))| ma == mb && ca.as_const() == cb.as_const())
    };
    for j in 0..fd.m {
        for k in 0..fd.n - fd.m {
            if !same(&top(&l.a[j][k])?, &lh.a[j][k]) {
                return Ok(false);
            }
        }
        let p_hat = &hat.terms.p;
        let one = hat_fd.one();
        let lhs = top(&l.b[j].num)?;
        let lhs = relabel(&lhs, &hat_fd.field).mul(&p_hat.pow(lh.b[j].p_pow, &one));
        let rhs = if lh.b[j].num.is_zero() {
            lh.b[j].num.clone()
        } else {
            highest_weight_part(&lh.b[j].num, w)?
        };
        let rhs = rhs.mul(&p_hat.pow(l.b[j].p_pow, &one));
        if !same(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn relabel(p: &FiberPoly, field: &std::sync::Arc<ScalarField>) -> FiberPoly {
    p.map_coeffs(|c| field.constant(c.as_const().cloned().unwrap_or_else(Rational::zero)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Obstruction {
    /// `[X_i, X_j] ≠ 0` for fields in different eigenspaces (1-based), with the bracket.
    CrossBracket { i: usize, j: usize, bracket: Vec<Rational> },
    /// A nonzero vector lying in two generated subalgebras.
    NotDirect { blocks: (usize, usize), witness: Vec<Rational> },
}

impl Obstruction {
    pub fn kind(&self) -> &'static str {
        match self {
            Obstruction::CrossBracket { .. } => "cross_bracket",
            Obstruction::NotDirect { .. } => "not_direct",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductDecomposition {
    /// Graded basis of each block subalgebra.
    pub bases: Vec<Vec<Vec<Rational>>>,
    /// 1-based coordinate indices of each block when the blocks are coordinate subspaces.
    pub blocks: Option<Vec<Vec<usize>>>,
    pub alpha_sq: Vec<Rational>,
    pub factors: Vec<CarnotAlgebra>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProductOutcome {
    /// A single eigenvalue: nothing to split.
    Conformal,
    Product(ProductDecomposition),
    Obstruction(Obstruction),
}

pub fn carnot_product_structure(carnot: &CarnotAlgebra, alpha_sq: &[Rational]) -> Result<ProductOutcome> {
    let (n, m) = (carnot.n(), carnot.m());
    if alpha_sq.len() != m {
        return Err(Error::BadInput(format!("{} eigenvalues for rank {m}", alpha_sq.len())));
    }
    if alpha_sq.iter().any(|a| !a.is_positive()) {
        return Err(Error::BadInput("eigenvalues must be positive".into()));
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        match classes.iter_mut().find(|c| alpha_sq[c[0]] == alpha_sq[i]) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    if classes.len() == 1 {
        return Ok(ProductOutcome::Conformal);
    }
    let e = |i: usize| -> Vec<Rational> {
        (0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect()
    };
    for (a, ca) in classes.iter().enumerate() {
        for cb in &classes[a + 1..] {
            for &i in ca {
                for &j in cb {
                    let b = carnot.bracket(&e(i), &e(j));
                    if b.iter().any(|x| !x.is_zero()) {
                        let (i, j) = (i.min(j), i.max(j));
                        return Ok(ProductOutcome::Obstruction(Obstruction::CrossBracket {
                            i: i + 1,
                            j: j + 1,
                            bracket: b,
                        }));
                    }
                }
            }
        }
    }
    // breadth-first bracket closure of each first layer
    let mut bases = Vec::new();
    for cl in &classes {
        let gens: Vec<Vec<Rational>> = cl.iter().map(|&i| e(i)).collect();
        let mut basis = gens.clone();
        let mut frontier = gens.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &gens {
                for f in &frontier {
                    let b = carnot.bracket(g, f);
                    let mut trial = basis.clone();
                    trial.push(b.clone());
                    if linalg::rank(&trial) > basis.len() {
                        basis.push(b.clone());
                        next.push(b);
                    }
                }
            }
            frontier = next;
        }
        bases.push(basis);
    }
    let total: usize = bases.iter().map(Vec::len).sum();
    let all: Matrix<Rational> = bases.iter().flatten().cloned().collect();
    if total != n || linalg::rank(&all) != n {
        // a relation Σ λ_r v_r = 0 mixes blocks; the part from the first block is the witness
        let cols = linalg::transpose(&all);
        let ker = linalg::kernel(&cols, all.len(), &Rational::zero());
        let rel = ker.first().cloned().unwrap_or_default();
        let mut offset = 0;
        for (bi, basis) in bases.iter().enumerate() {
            let coeffs = &rel[offset..offset + basis.len()];
            if coeffs.iter().any(|c| !c.is_zero()) {
                let mut w = vec![Rational::zero(); n];
                for (c, v) in coeffs.iter().zip(basis) {
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk += c * vk;
                    }
                }
                let other = (bi + 1..bases.len())
                    .find(|&bj| {
                        let o = offset + basis.len();
                        let start: usize = o + bases[bi + 1..bj].iter().map(Vec::len).sum::<usize>();
                        rel[start..start + bases[bj].len()].iter().any(|c| !c.is_zero())
                    })
                    .unwrap_or(bi);
                return Ok(ProductOutcome::Obstruction(Obstruction::NotDirect {
                    blocks: (bi + 1, other + 1),
                    witness: w,
                }));
            }
            offset += basis.len();
        }
        return Ok(ProductOutcome::Obstruction(Obstruction::NotDirect { blocks: (1, 1), witness: vec![] }));
    }
    let blocks = coordinate_blocks(&bases);
    let mut factors = Vec::new();
    for basis in &bases {
        factors.push(sub_algebra(carnot, basis)?);
    }
    Ok(ProductOutcome::Product(ProductDecomposition {
        bases,
        blocks,
        alpha_sq: classes.iter().map(|c| alpha_sq[c[0]].clone()).collect(),
        factors,
    }))
}

fn coordinate_blocks(bases: &[Vec<Vec<Rational>>]) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for basis in bases {
        let support: std::collections::BTreeSet<usize> = basis
            .iter()
            .flat_map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, _)| k))
            .collect();
        if support.len() != basis.len() || support.iter().any(|k| seen.contains(k)) {
            return None;
        }
        seen.extend(support.iter().copied());
        out.push(support.into_iter().map(|k| k + 1).collect());
    }
    Some(out)
}

/// Structure constants of a graded subalgebra in the given basis.
fn sub_algebra(carnot: &CarnotAlgebra, basis: &[Vec<Rational>]) -> Result<CarnotAlgebra> {
    let w = carnot.weights();
    let weight_of = |v: &Vec<Rational>| -> u32 {
        v.iter().enumerate().find(|(_, x)| !x.is_zero()).map(|(k, _)| w.0[k]).unwrap_or(0)
    };
    let mut grading = Vec::new();
    let top = basis.iter().map(&weight_of).max().unwrap_or(0);
    for s in 1..=top {
        grading.push(basis.iter().filter(|v| weight_of(v) <= s).count());
    }
    grading.dedup();
    let cols = linalg::transpose(&basis.to_vec());
    let mut entries = Vec::new();
    for a in 0..basis.len() {
        for b in a + 1..basis.len() {
            let br = carnot.bracket(&basis[a], &basis[b]);
            if br.iter().all(Zero::is_zero) {
                continue;
            }
            let coords = linalg::solve(&cols, &br, &Rational::zero())
                .ok_or_else(|| Error::NotFundamental("block is not closed under brackets".into()))?;
            for (k, c) in coords.into_iter().enumerate() {
                if !c.is_zero() {
                    entries.push((a, b, k, c));
                }
            }
        }
    }
    CarnotAlgebra::new(grading, &entries)
}

/// Random fundamental graded algebra of step at most three with the given layer
/// dimensions; `None` after repeated unlucky draws.
pub fn random_carnot<R: Rng>(rng: &mut R, dims: &[usize]) -> Option<CarnotAlgebra> {
    if dims.is_empty() || dims.len() > 3 || dims.contains(&0) {
        return None;
    }
    let m = dims[0];
    let d2 = dims.get(1).copied().unwrap_or(0);
    let d3 = dims.get(2).copied().unwrap_or(0);
    let grading: Vec<usize> = dims.iter().scan(0, |acc, d| {
        *acc += d;
        Some(*acc)
    }).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    'attempt: for _ in 0..50 {
        let mut entries = Vec::new();
        let mut c12 = vec![vec![Rational::zero(); d2]; m * m];
        for &(i, j) in &pairs {
            for a in 0..d2 {
                let v = Rational::from_integer(rng.gen_range(-2i64..=2).into());
                c12[i * m + j][a] = v.clone();
                c12[j * m + i][a] = -v.clone();
                if !v.is_zero() {
                    entries.push((i, j, m + a, v));
                }
            }
        }
        if d3 > 0 {
            // unknowns d[i][a] (one copy per target); rows are first-layer triples
            let nu = m * d2;
            let mut rows: Matrix<Rational> = Vec::new();
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let mut row = vec![Rational::zero(); nu];
                        for a in 0..d2 {
                            row[k * d2 + a] += &c12[i * m + j][a];
                            row[i * d2 + a] += &c12[j * m + k][a];
                            row[j * d2 + a] += &c12[k * m + i][a];
                        }
                        rows.push(row);
                    }
                }
            }
            let ker = if rows.is_empty() {
                (0..nu)
                    .map(|r| (0..nu).map(|c| if r == c { Rational::one() } else { Rational::zero() }).collect())
                    .collect()
            } else {
                linalg::kernel(&rows, nu, &Rational::zero())
            };
            if ker.is_empty() {
                continue 'attempt;
            }
            for t in 0..d3 {
                let mut d = vec![Rational::zero(); nu];
                for kv in &ker {
                    let coef = Rational::from_integer(rng.gen_range(-2i64..=2).into());
                    for (x, y) in d.iter_mut().zip(kv) {
                        *x += &coef * y;
                    }
                }
                for i in 0..m {
                    for a in 0..d2 {
                        let v = &d[i * d2 + a];
                        if !v.is_zero() {
                            entries.push((i, m + a, m + d2 + t, v.clone()));
                        }
                    }
                }
            }
        }
        if let Ok(alg) = CarnotAlgebra::new(grading.clone(), &entries) {
            return Some(alg);
        }
    }
    None
}

/// Heisenberg-type algebra with `k` independent copies, used in examples.
pub fn heisenberg_product(k: usize) -> CarnotAlgebra {
    let m = 2 * k;
    let entries: Vec<_> = (0..k).map(|b| (2 * b, 2 * b + 1, m + b, Rational::one())).collect();
    CarnotAlgebra::new(vec![m, m + k], &entries).expect("valid algebra")
}

/// Constant-coefficient poly helper used by tests of other modules.
pub fn constant_fiber(n: usize, field: &std::sync::Arc<ScalarField>, c: Rational) -> FiberPoly {
    Poly::constant(n, field.constant(c))
}
