//! Vector fields, brackets, growth vectors, structure coefficients and the
//! frame data of a metric pair.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fiber::WeightVector;
use crate::linalg::{self, Matrix};
use crate::poly::Ring;
use crate::rational::Rational;
use crate::scalar::{Scalar, ScalarField};

/// `Σ_l a_l ∂/∂x_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField(pub Vec<Scalar>);

impl VectorField {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coordinate(field: &Arc<ScalarField>, n: usize, i: usize) -> Self {
        VectorField((0..n).map(|l| if l == i { field.one() } else { field.zero() }).collect())
    }

    /// Directional derivative of a scalar.
    pub fn apply(&self, f: &Scalar) -> Scalar {
        let mut acc = f.zero_like();
        if f.is_const() {
            return acc;
        }
        for (l, a) in self.0.iter().enumerate() {
            if !a.is_zero() {
                acc = acc.add(&a.mul(&f.diff(l)));
            }
        }
        acc
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        VectorField(self.0.iter().map(|a| a.mul(s)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        VectorField(self.0.iter().zip(&o.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    pub fn lift(&self, to: &Arc<ScalarField>) -> Self {
        VectorField(self.0.iter().map(|a| a.lift(to)).collect())
    }
}

pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", x.dim(), y.dim())));
    }
    Ok(VectorField(
        (0..x.dim()).map(|l| x.apply(&y.0[l]).sub(&y.apply(&x.0[l]))).collect(),
    ))
}

fn eval_vec(v: &VectorField, point: &[Rational]) -> Result<Vec<Rational>> {
    v.0.iter().map(|a| a.eval(point, &[])).collect()
}

#[derive(Clone, Debug)]
pub struct Growth {
    /// `m_1 < m_2 < ... < m_r = n`.
    pub dims: Vec<usize>,
    pub weights: WeightVector,
    /// The input fields followed by the brackets chosen to complete an adapted frame.
    pub adapted: Vec<VectorField>,
    /// Bracket words (1-based input indices) for each frame member.
    pub words: Vec<Vec<usize>>,
}

/// Iterated-bracket flag dimensions at `point`.
pub fn growth_vector(fields: &[VectorField], point: &[Rational], max_step: usize) -> Result<Growth> {
    let m = fields.len();
    let n = fields.first().map_or(0, |f| f.dim());
    let mut rows: Matrix<Rational> = Vec::new();
    let mut adapted = Vec::new();
    let mut words = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        if f.dim() != n {
            return Err(Error::DimensionMismatch("fields of different dimension".into()));
        }
        rows.push(eval_vec(f, point)?);
        adapted.push(f.clone());
        words.push(vec![i + 1]);
    }
    if linalg::rank(&rows) < m {
        return Err(Error::BadInput("fields are dependent at the point".into()));
    }
    let mut dims = vec![m];
    // all brackets of the previous level, kept whether or not they are new
    let mut level: Vec<(VectorField, Vec<usize>)> =
        fields.iter().cloned().enumerate().map(|(i, f)| (f, vec![i + 1])).collect();
    let mut step = 1;
    while *dims.last().unwrap() < n {
        if step >= max_step {
            return Err(Error::NotBracketGenerating { reached: *dims.last().unwrap(), n, step });
        }
        step += 1;
        let mut next = Vec::new();
        for (i, x) in fields.iter().enumerate() {
            for (y, w) in &level {
                if w.len() == 1 && w[0] <= i + 1 {
                    continue;
                }
                let b = lie_bracket(x, y)?;
                if b.is_zero() {
                    continue;
                }
                let mut word = vec![i + 1];
                word.extend(w);
                let v = eval_vec(&b, point)?;
                let mut trial = rows.clone();
                trial.push(v.clone());
                if linalg::rank(&trial) > rows.len() {
                    rows.push(v);
                    adapted.push(b.clone());
                    words.push(word.clone());
                }
                next.push((b, word));
            }
        }
        let d = rows.len();
        if d == *dims.last().unwrap() {
            return Err(Error::NotBracketGenerating { reached: d, n, step });
        }
        dims.push(d);
        level = next;
    }
    Ok(Growth {
        weights: WeightVector::from_growth(&dims),
        dims,
        adapted,
        words,
    })
}

/// Dense table `c^k_{ij}` (zero-based indices).
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub n: usize,
    c: Vec<Scalar>,
}

impl Structure {
    pub fn zeros(field: &Arc<ScalarField>, n: usize) -> Self {
        Structure { n, c: vec![field.zero(); n * n * n] }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.c[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Scalar) {
        let t = self.idx(i, j, k);
        self.c[t] = v;
    }

    /// Sets `c^k_{ij}` and `c^k_{ji} = -c^k_{ij}`.
    pub fn set_anti(&mut self, i: usize, j: usize, k: usize, v: Scalar) {
        let nv = v.neg();
        self.set(i, j, k, v);
        self.set(j, i, k, nv);
    }

    pub fn lift(&self, to: &Arc<ScalarField>) -> Self {
        Structure { n: self.n, c: self.c.iter().map(|s| s.lift(to)).collect() }
    }

    /// Nonzero entries with `i < j`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, &Scalar)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in 0..self.n {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }

    pub fn all_const(&self) -> bool {
        self.c.iter().all(Scalar::is_const)
    }
}

/// Solve `[X_i, X_j] = Σ_k c^k_{ij} X_k` for a frame of `n` fields.
pub fn structure_coefficients(frame: &[VectorField]) -> Result<Structure> {
    let n = frame.len();
    let field = frame
        .first()
        .and_then(|f| f.0.first())
        .map(|s| s.field().clone())
        .ok_or_else(|| Error::BadInput("empty frame".into()))?;
    // columns are the fields
    let mat: Matrix<Scalar> = (0..n).map(|l| (0..n).map(|k| frame[k].0[l].clone()).collect()).collect();
    let inv = linalg::inverse(&mat, &field.zero()).ok_or(Error::SingularFrame)?;
    let mut st = Structure::zeros(&field, n);
    for i in 0..n {
        for j in i + 1..n {
            let b = lie_bracket(&frame[i], &frame[j])?;
            for k in 0..n {
                let mut acc = field.zero();
                for l in 0..n {
                    if !b.0[l].is_zero() && !inv[k][l].is_zero() {
                        acc = acc.add(&inv[k][l].mul(&b.0[l]));
                    }
                }
                st.set_anti(i, j, k, acc);
            }
        }
    }
    Ok(st)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameMode {
    Fields,
    Abstract,
}

#[derive(Clone, Debug)]
pub struct FrameData {
    pub field: Arc<ScalarField>,
    pub n: usize,
    pub m: usize,
    pub weights: WeightVector,
    pub point: Vec<Rational>,
    pub structure: Structure,
    pub alpha_sq: Vec<Scalar>,
    /// How each frame member differentiates scalars; `None` means every
    /// coefficient is treated as constant along the frame.
    pub action: Option<Vec<VectorField>>,
    pub mode: FrameMode,
}

impl FrameData {
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Scalar {
        self.structure.get(i, j, k)
    }

    /// `X_i(f)`.
    pub fn x_apply(&self, i: usize, f: &Scalar) -> Scalar {
        match &self.action {
            Some(a) => a[i].apply(f),
            None => f.zero_like(),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.field.zero()
    }

    pub fn one(&self) -> Scalar {
        self.field.one()
    }

    pub fn is_constant(&self) -> bool {
        self.structure.all_const() && self.alpha_sq.iter().all(Scalar::is_const)
    }

    pub fn lift(&self, to: &Arc<ScalarField>) -> FrameData {
        FrameData {
            field: to.clone(),
            n: self.n,
            m: self.m,
            weights: self.weights.clone(),
            point: self.point.clone(),
            structure: self.structure.lift(to),
            alpha_sq: self.alpha_sq.iter().map(|a| a.lift(to)).collect(),
            action: self.action.as_ref().map(|v| v.iter().map(|x| x.lift(to)).collect()),
            mode: self.mode.clone(),
        }
    }

    /// Value at the base point (floating fallback when radicals are irrational there).
    pub fn value_at_point(&self, s: &Scalar) -> Result<f64> {
        match s.eval(&self.point, &[]) {
            Ok(r) => Ok(crate::rational::to_f64(&r)),
            Err(Error::IrrationalValue) => Ok(s.eval_f64(
                &self.point.iter().map(crate::rational::to_f64).collect::<Vec<_>>(),
                &[],
            )),
            Err(e) => Err(e),
        }
    }

    /// Indices grouped by equal `α²` (as functions), in order of first appearance.
    pub fn eigen_partition(&self) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.m {
            match classes.iter_mut().find(|c| self.alpha_sq[c[0]] == self.alpha_sq[i]) {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        classes
    }

    pub fn distinct_eigenvalues(&self) -> usize {
        self.eigen_partition().len()
    }
}

/// Frame `{f_i X_i}`.
pub fn rescale_frame(fd: &FrameData, factors: &[Scalar]) -> Result<FrameData> {
    let n = fd.n;
    if factors.len() != n {
        return Err(Error::DimensionMismatch(format!("{} factors for {n} fields", factors.len())));
    }
    for (i, f) in factors.iter().enumerate() {
        if f.is_zero() || fd.value_at_point(f).map_or(true, |v| v == 0.0) {
            return Err(Error::ZeroFactor(i + 1));
        }
    }
    let field = factors
        .iter()
        .map(|f| f.field().clone())
        .fold(fd.field.clone(), |a, b| if a.is_subfield_of(&b) { b } else { a });
    let fd = fd.lift(&field);
    let factors: Vec<Scalar> = factors.iter().map(|f| f.lift(&field)).collect();
    let inv: Vec<Scalar> = factors.iter().map(|f| f.inv()).collect::<Result<_>>()?;
    // log-derivatives X_i(f_j)/f_j
    let dlog: Vec<Vec<Scalar>> = (0..n)
        .map(|i| (0..n).map(|j| fd.x_apply(i, &factors[j]).mul(&inv[j])).collect())
        .collect();
    let mut st = Structure::zeros(&field, n);
    for i in 0..n {
        for j in i + 1..n {
            let fij = factors[i].mul(&factors[j]);
            for k in 0..n {
                let mut v = fd.c(i, j, k).clone();
                if !v.is_zero() {
                    v = v.mul(&fij).mul(&inv[k]);
                }
                if k == j {
                    v = v.add(&factors[i].mul(&dlog[i][j]));
                }
                if k == i {
                    v = v.sub(&factors[j].mul(&dlog[j][i]));
                }
                st.set_anti(i, j, k, v);
            }
        }
    }
    let action = fd
        .action
        .as_ref()
        .map(|a| a.iter().zip(&factors).map(|(x, f)| x.scale(f)).collect());
    Ok(FrameData {
        field,
        n,
        m: fd.m,
        weights: fd.weights.clone(),
        point: fd.point.clone(),
        structure: st,
        alpha_sq: fd.alpha_sq.clone(),
        action,
        mode: fd.mode.clone(),
    })
}

/// Square root of an `α²` value, declaring a radical if necessary.
pub fn sqrt_scalar(field: &Arc<ScalarField>, a: &Scalar, hint: &str) -> Result<(Arc<ScalarField>, Scalar)> {
    let mut k = 1;
    let mut name = hint.to_string();
    while field.radical_index(&name).is_some() || field.var_index(&name).is_some() {
        k += 1;
        name = format!("{hint}_{k}");
    }
    let f2 = field.with_radical(&name, &a.lift(field))?;
    let idx = f2.radical_index(&name).expect("just declared");
    let r = f2.radical(idx);
    Ok((f2, r))
}

/// The frame adapted to the swapped pair: `X_i / α_i` on the first `m` fields.
pub fn swap_pair(fd: &FrameData) -> Result<FrameData> {
    let mut field = fd.field.clone();
    let mut roots = Vec::new();
    for i in 0..fd.m {
        let (f2, r) = sqrt_scalar(&field, &fd.alpha_sq[i], &format!("alpha{}", i + 1))?;
        field = f2;
        roots.push(r);
    }
    let roots: Vec<Scalar> = roots.iter().map(|r| r.lift(&field)).collect();
    let mut factors = Vec::new();
    for i in 0..fd.n {
        factors.push(if i < fd.m { roots[i].inv()? } else { field.one() });
    }
    let mut out = rescale_frame(&fd.lift(&field), &factors)?;
    out.alpha_sq = out.alpha_sq.iter().map(|a| a.inv()).collect::<Result<_>>()?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameIssue {
    NotAntisymmetric(usize, usize, usize),
    Jacobi { i: usize, j: usize, k: usize, p: usize, residual: String },
    AlphaNotPositive(usize),
    WeightViolation(usize, usize, usize),
    PoleAtPoint(usize, usize, usize),
}

impl FrameIssue {
    pub fn describe(&self) -> String {
        match self {
            FrameIssue::NotAntisymmetric(i, j, k) => {
                format!("c^{}_{{{},{}}} is not antisymmetric", k + 1, i + 1, j + 1)
            }
            FrameIssue::Jacobi { i, j, k, p, residual } => format!(
                "Jacobi residual for ({},{},{}) in direction {} is {residual}",
                i + 1,
                j + 1,
                k + 1,
                p + 1
            ),
            FrameIssue::AlphaNotPositive(i) => format!("alpha_sq[{}] is not positive at the point", i + 1),
            FrameIssue::WeightViolation(i, j, k) => format!(
                "c^{}_{{{},{}}} is nonzero although w_k > w_i + w_j",
                k + 1,
                i + 1,
                j + 1
            ),
            FrameIssue::PoleAtPoint(i, j, k) => {
                format!("c^{}_{{{},{}}} has a pole at the base point", k + 1, i + 1, j + 1)
            }
        }
    }
}

/// Jacobi residual in direction `p` for the triple `(i,j,k)`.
pub fn jacobi_residual(fd: &FrameData, i: usize, j: usize, k: usize, p: usize) -> Scalar {
    let n = fd.n;
    let mut r = fd.zero();
    for l in 0..n {
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            let x = fd.c(a, b, l);
            if x.is_zero() {
                continue;
            }
            let y = fd.c(l, c, p);
            if !y.is_zero() {
                r = r.add(&x.mul(y));
            }
        }
    }
    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
        r = r.sub(&fd.x_apply(c, fd.c(a, b, p)));
    }
    r
}

pub fn validate(fd: &FrameData) -> Vec<FrameIssue> {
    let n = fd.n;
    let mut issues = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if *fd.c(i, j, k) != fd.c(j, i, k).neg() {
                    issues.push(FrameIssue::NotAntisymmetric(i, j, k));
                }
                if i < j {
                    let c = fd.c(i, j, k);
                    if !c.is_zero() && fd.weights.0[k] > fd.weights.0[i] + fd.weights.0[j] {
                        issues.push(FrameIssue::WeightViolation(i, j, k));
                    }
                    if matches!(c.eval(&fd.point, &[]), Err(Error::PoleAtPoint)) {
                        issues.push(FrameIssue::PoleAtPoint(i, j, k));
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for p in 0..n {
                    let r = jacobi_residual(fd, i, j, k, p);
                    if !r.is_zero() {
                        issues.push(FrameIssue::Jacobi { i, j, k, p, residual: r.to_expr() });
                    }
                }
            }
        }
    }
    for (i, a) in fd.alpha_sq.iter().enumerate() {
        let ok = match a.eval(&fd.point, &[]) {
            Ok(v) => v.is_positive(),
            Err(Error::IrrationalValue) => fd.value_at_point(a).is_ok_and(|v| v > 0.0),
            Err(_) => false,
        };
        if !ok {
            issues.push(FrameIssue::AlphaNotPositive(i));
        }
    }
    issues
}

/// Reconstruct `Σ_k c^k_{ij} X_k` for checking a computed table.
pub fn reconstruct_bracket(frame: &[VectorField], st: &Structure, i: usize, j: usize) -> VectorField {
    let n = frame.len();
    let mut acc = VectorField(vec![frame[0].0[0].zero_like(); frame[0].dim()]);
    for k in 0..n {
        let c = st.get(i, j, k);
        if !c.is_zero() {
            acc = acc.add(&frame[k].scale(c));
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub enum EigenValue {
    Exact(Rational),
    Approx(f64),
}

#[derive(Clone, Debug)]
pub struct TransitionDiagonalization {
    pub eigenvalues: Vec<EigenValue>,
    /// Columns are eigenvectors, mutually `G1`-orthogonal.
    pub basis: Vec<Vec<Rational>>,
    /// `G1(v, v)` for each basis vector; normalization divides by its root.
    pub norm_sq: Vec<Rational>,
    /// Zero-based index blocks of equal eigenvalues.
    pub partition: Vec<Vec<usize>>,
    pub n_distinct: usize,
}

fn quad(g: &Matrix<Rational>, a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..a.len() {
        for j in 0..b.len() {
            acc += &a[i] * &g[i][j] * &b[j];
        }
    }
    acc
}

fn positive_definite(g: &Matrix<Rational>) -> bool {
    let zero = Rational::zero();
    (1..=g.len()).all(|k| {
        let minor: Matrix<Rational> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
        linalg::det(&minor, &zero).is_positive()
    })
}

/// Eigen-decomposition of the transition operator `S = G1⁻¹ G2`.
///
/// With `numeric = Some(eps)` an irrational spectrum is approximated in floating
/// point and eigenvalues closer than `eps` are clustered.
pub fn diagonalize_transition(
    g1: &Matrix<Rational>,
    g2: &Matrix<Rational>,
    numeric: Option<f64>,
) -> Result<TransitionDiagonalization> {
    let m = g1.len();
    let zero = Rational::zero();
    let sym = |g: &Matrix<Rational>| g.len() == m && g.iter().all(|r| r.len() == m)
        && (0..m).all(|i| (0..m).all(|j| g[i][j] == g[j][i]));
    if !sym(g1) || !sym(g2) {
        return Err(Error::BadInput("metrics must be symmetric matrices of equal size".into()));
    }
    if !positive_definite(g1) || !positive_definite(g2) {
        return Err(Error::NotPositiveDefinite);
    }
    let s = linalg::mat_mul(&linalg::inverse(g1, &zero).expect("definite"), g2, &zero);
    // characteristic polynomial det(tI - S) in one variable
    use crate::poly::Poly;
    let one = Rational::one();
    let t = Poly::var(1, 0, one.clone());
    let cm: Matrix<Poly<Rational>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let c = Poly::constant(1, -s[i][j].clone());
                    if i == j { c.add(&t) } else { c }
                })
                .collect()
        })
        .collect();
    let chi = linalg::bareiss_det(&cm, 1);
    let coeffs = crate::qpoly::to_univariate(&chi, 0).expect("univariate");
    let roots = crate::qpoly::rational_roots(&coeffs);
    let total: usize = roots.iter().map(|r| r.1).sum();
    if total < m {
        let eps = numeric.ok_or(Error::IrrationalSpectrum)?;
        return numeric_diagonalization(g1, g2, eps);
    }
    let mut eigenvalues = Vec::new();
    let mut basis = Vec::new();
    let mut norm_sq = Vec::new();
    let mut partition = Vec::new();
    for (lam, mult) in &roots {
        let shifted: Matrix<Rational> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { &s[i][j] - lam } else { s[i][j].clone() }).collect())
            .collect();
        let ker = linalg::kernel(&shifted, m, &zero);
        debug_assert_eq!(ker.len(), *mult);
        let mut block = Vec::new();
        let mut ortho: Vec<Vec<Rational>> = Vec::new();
        for v in ker {
            let mut w = v.clone();
            for o in &ortho {
                let c = quad(g1, &v, o) / quad(g1, o, o);
                for (wi, oi) in w.iter_mut().zip(o) {
                    *wi -= &c * oi;
                }
            }
            ortho.push(w);
        }
        for w in ortho {
            block.push(basis.len());
            norm_sq.push(quad(g1, &w, &w));
            basis.push(w);
            eigenvalues.push(EigenValue::Exact(lam.clone()));
        }
        partition.push(block);
    }
    Ok(TransitionDiagonalization {
        n_distinct: partition.len(),
        eigenvalues,
        basis,
        norm_sq,
        partition,
    })
}

fn numeric_diagonalization(
    g1: &Matrix<Rational>,
    g2: &Matrix<Rational>,
    eps: f64,
) -> Result<TransitionDiagonalization> {
    let m = g1.len();
    let f = |g: &Matrix<Rational>| -> Vec<Vec<f64>> {
        g.iter().map(|r| r.iter().map(crate::rational::to_f64).collect()).collect()
    };
    let (a, b) = (f(g1), f(g2));
    // Cholesky a = L Lᵀ
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    // C = L⁻¹ B L⁻ᵀ
    let linv = {
        let mut inv = vec![vec![0.0; m]; m];
        for c in 0..m {
            for i in 0..m {
                let s: f64 = (0..i).map(|k| l[i][k] * inv[k][c]).sum();
                inv[i][c] = ((if i == c { 1.0 } else { 0.0 }) - s) / l[i][i];
            }
        }
        inv
    };
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            c[i][j] = (0..m)
                .map(|p| (0..m).map(|q| linv[i][p] * b[p][q] * linv[j][q]).sum::<f64>())
                .sum();
        }
    }
    // cyclic Jacobi sweeps
    for _ in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|(i, j)| i != j)
            .map(|(i, j)| c[i][j] * c[i][j]).sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if c[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (c[q][q] - c[p][p]) / (2.0 * c[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (ckp, ckq) = (c[k][p], c[k][q]);
                    c[k][p] = cs * ckp - sn * ckq;
                    c[k][q] = sn * ckp + cs * ckq;
                }
                for k in 0..m {
                    let (cpk, cqk) = (c[p][k], c[q][k]);
                    c[p][k] = cs * cpk - sn * cqk;
                    c[q][k] = sn * cpk + cs * cqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| c[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut partition: Vec<Vec<usize>> = Vec::new();
    for (i, v) in ev.iter().enumerate() {
        match partition.last_mut() {
            Some(block) if (ev[block[0]] - v).abs() <= eps => block.push(i),
            _ => partition.push(vec![i]),
        }
    }
    Ok(TransitionDiagonalization {
        n_distinct: partition.len(),
        eigenvalues: ev.into_iter().map(EigenValue::Approx).collect(),
        basis: Vec::new(),
        norm_sq: Vec::new(),
        partition,
    })
}
