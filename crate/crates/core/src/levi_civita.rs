//! Levi-Civita pairs built from product distributions, and the check that
//! their block witness solves the orbital equations.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::parse_scalar;
use crate::fiber::{fzero, u, FiberPoly, WeightVector};
use crate::frame::{growth_vector, sqrt_scalar, structure_coefficients, FrameData, FrameMode, Structure, VectorField};
use crate::fundamental::{verify_orbital_map, AlphaPhi, HamiltonianLift, PairTerms, Residuals};
use crate::nilpotent::CarnotAlgebra;
use crate::poly::Poly;
use crate::rational::{format_rational, rat, Rational};
use crate::scalar::{Scalar, ScalarField};

#[derive(Clone, Debug)]
pub enum FactorFrame {
    /// Left-invariant frame of a Carnot group; coefficients never depend on its coordinates.
    Carnot(CarnotAlgebra),
    /// Orthonormal horizontal fields in the factor's own coordinates.
    Fields { vars: Vec<String>, fields: Vec<Vec<String>> },
}

#[derive(Clone, Debug)]
pub struct LcFactor {
    pub frame: FactorFrame,
    pub beta: String,
}

#[derive(Clone, Debug)]
pub struct LeviCivitaSpec {
    pub factors: Vec<LcFactor>,
}

#[derive(Clone, Debug)]
pub struct LcPair {
    pub frame: FrameData,
    /// Factor (zero-based) of each frame member.
    pub factor_of: Vec<usize>,
    pub beta: Vec<Scalar>,
    pub gamma: Vec<Scalar>,
    /// `α_ℓ²` per factor, the table the block witness is read from.
    pub alpha_sq: Vec<Scalar>,
    pub radicals: Vec<String>,
}

pub const LC_LOCALITY_NOTE: &str = "sign pattern of the γ products fixed at the base point only";

/// One factor in its own coordinates, scalars already moved to the global field.
struct LocalFactor {
    n: usize,
    k: usize,
    weights: Vec<u32>,
    /// `c̄^r_{pq}` of the factor frame.
    structure: Vec<Vec<Vec<Scalar>>>,
    /// Factor frame as vector fields on the global coordinates.
    fields: Vec<VectorField>,
    beta: Scalar,
}

fn move_to(s: &Scalar, to: &Arc<ScalarField>) -> Result<Scalar> {
    parse_scalar(&s.to_expr(), to)
}

fn local_factor(f: &LcFactor, global: &Arc<ScalarField>, offset: usize, idx: usize) -> Result<LocalFactor> {
    let nx = global.nx();
    match &f.frame {
        FactorFrame::Carnot(alg) => {
            let empty = ScalarField::new(vec![]);
            let beta = parse_scalar(&f.beta, &empty)
                .map_err(|e| Error::BadInput(format!("β of factor {}: {e}", idx + 1)))?;
            let n = alg.n();
            let structure = (0..n)
                .map(|p| (0..n).map(|q| (0..n).map(|r| global.constant(alg.get(p, q, r).clone())).collect()).collect())
                .collect();
            Ok(LocalFactor {
                n,
                k: alg.m(),
                weights: alg.weights().0,
                structure,
                fields: vec![VectorField(vec![global.zero(); nx]); n],
                beta: move_to(&beta, global)?,
            })
        }
        FactorFrame::Fields { vars, fields } => {
            let local = ScalarField::new(vars.clone());
            let n = vars.len();
            let parsed: Vec<VectorField> = fields
                .iter()
                .map(|row| {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "factor {} field has {} components for {n} coordinates",
                            idx + 1,
                            row.len()
                        )));
                    }
                    row.iter().map(|e| parse_scalar(e, &local)).collect::<Result<Vec<_>>>().map(VectorField)
                })
                .collect::<Result<_>>()?;
            if parsed.is_empty() {
                return Err(Error::BadInput(format!("factor {} has no fields", idx + 1)));
            }
            let beta = parse_scalar(&f.beta, &local)?;
            if n > 1 && !beta.is_const() {
                return Err(Error::BadInput(format!("β of factor {} must be constant (dimension {n})", idx + 1)));
            }
            let g = growth_vector(&parsed, &vec![Rational::zero(); n], n + 1)?;
            let st = structure_coefficients(&g.adapted)?;
            let mut structure = vec![vec![vec![global.zero(); n]; n]; n];
            for (p, q, r, c) in st.entries() {
                let c = move_to(c, global)?;
                structure[q][p][r] = c.neg();
                structure[p][q][r] = c;
            }
            let fields = g
                .adapted
                .iter()
                .map(|z| {
                    let mut v = vec![global.zero(); nx];
                    for (l, a) in z.0.iter().enumerate() {
                        v[offset + l] = move_to(a, global)?;
                    }
                    Ok(VectorField(v))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LocalFactor {
                n,
                k: fields.len().min(g.dims[0]),
                weights: g.weights.0,
                structure,
                fields,
                beta: move_to(&beta, global)?,
            })
        }
    }
}

/// Adapted frame of the pair `g₁ = Σ γ_ℓ ḡ_ℓ`, `g₂ = Σ α_ℓ² γ_ℓ ḡ_ℓ`, based at the origin.
pub fn lc_build(spec: &LeviCivitaSpec) -> Result<LcPair> {
    let nf = spec.factors.len();
    if nf == 0 {
        return Err(Error::BadInput("no factors".into()));
    }
    let mut vars: Vec<String> = Vec::new();
    let mut offsets = Vec::new();
    for f in &spec.factors {
        offsets.push(vars.len());
        if let FactorFrame::Fields { vars: v, .. } = &f.frame {
            for name in v {
                if vars.contains(name) {
                    return Err(Error::BadInput(format!("coordinate '{name}' used by two factors")));
                }
                vars.push(name.clone());
            }
        }
    }
    let base = ScalarField::new(vars);
    let point = vec![Rational::zero(); base.nx()];
    let locals: Vec<LocalFactor> = spec
        .factors
        .iter()
        .enumerate()
        .map(|(l, f)| local_factor(f, &base, offsets[l], l))
        .collect::<Result<_>>()?;

    let beta0: Vec<Rational> = locals.iter().map(|lf| lf.beta.eval(&point, &[])).collect::<Result<_>>()?;
    for (l, b) in beta0.iter().enumerate() {
        if !b.is_positive() {
            return Err(Error::BadInput(format!("β_{}(0) = {} is not positive", l + 1, format_rational(b))));
        }
        if let Some(l2) = beta0[..l].iter().position(|c| c == b) {
            return Err(Error::SignAmbiguity(format!("β_{}(0) = β_{}(0) = {}", l2 + 1, l + 1, format_rational(b))));
        }
    }
    let prod = locals.iter().fold(base.one(), |acc, lf| acc.mul(&lf.beta));
    let alpha_sq: Vec<Scalar> = locals.iter().map(|lf| lf.beta.mul(&prod)).collect();
    let mut gamma = Vec::new();
    for l in 0..nf {
        let mut g = base.one();
        for l2 in (0..nf).filter(|&l2| l2 != l) {
            let diff = locals[l2].beta.inv()?.sub(&locals[l].beta.inv()?);
            // |1/β' − 1/β| with the sign read at the origin
            g = g.mul(&if beta0[l] > beta0[l2] { diff } else { diff.neg() });
        }
        gamma.push(g);
    }

    let mut field = base.clone();
    let mut radicals = Vec::new();
    let mut roots = Vec::new();
    for (l, g) in gamma.iter().enumerate() {
        let (f2, r) = sqrt_scalar(&field, g, &format!("s{}", l + 1))?;
        field = f2;
        radicals.push(field.radicals().last().map(|r| r.name.clone()).unwrap_or_default());
        roots.push(r);
    }
    let lift = |s: &Scalar| s.lift(&field);
    let roots: Vec<Scalar> = roots.iter().map(lift).collect();
    let gamma_f: Vec<Scalar> = gamma.iter().map(lift).collect();

    // global ordering: horizontals by factor, then verticals by weight
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for (l, lf) in locals.iter().enumerate() {
        slots.extend((0..lf.k).map(|i| (l, i)));
    }
    let mut vert: Vec<(u32, usize, usize)> = Vec::new();
    for (l, lf) in locals.iter().enumerate() {
        vert.extend((lf.k..lf.n).map(|i| (lf.weights[i], l, i)));
    }
    vert.sort();
    slots.extend(vert.iter().map(|&(_, l, i)| (l, i)));
    let n = slots.len();
    let m: usize = locals.iter().map(|lf| lf.k).sum();
    let horizontal = |slot: usize| slots[slot].1 < locals[slots[slot].0].k;

    let mut inv_roots = Vec::new();
    for r in &roots {
        inv_roots.push(r.inv()?);
    }
    let spow = |l: usize, e: i32| -> Scalar {
        match e {
            0 => field.one(),
            e if e > 0 => roots[l].pow(e as u32),
            e => inv_roots[l].pow((-e) as u32),
        }
    };
    let action: Vec<VectorField> = slots
        .iter()
        .enumerate()
        .map(|(a, &(l, i))| {
            let z = locals[l].fields[i].lift(&field);
            if horizontal(a) { z.scale(&inv_roots[l]) } else { z }
        })
        .collect();

    let mut st = Structure::zeros(&field, n);
    for a in 0..n {
        for b in a + 1..n {
            let ((la, ia), (lb, ib)) = (slots[a], slots[b]);
            let (ha, hb) = (horizontal(a) as i32, horizontal(b) as i32);
            if la == lb {
                for (p, &(lp, ip)) in slots.iter().enumerate() {
                    if lp != la {
                        continue;
                    }
                    let c = &locals[la].structure[ia][ib][ip];
                    if c.is_zero() {
                        continue;
                    }
                    let hp = horizontal(p) as i32;
                    if ha + hb == 2 && hp == 1 {
                        return Err(Error::UnsupportedFactorFrame(format!(
                            "factor {}: bracket of horizontal fields {} and {} has a horizontal component",
                            la + 1,
                            ia + 1,
                            ib + 1
                        )));
                    }
                    st.set_anti(a, b, p, lift(c).mul(&spow(la, hp - ha - hb)));
                }
            } else {
                // X_a = s^{-h_a} Z_a with Z_a, Z_b commuting
                let half = rat(1, 2);
                if hb == 1 {
                    let d = action[a].apply(&gamma_f[lb]);
                    if !d.is_zero() {
                        st.set_anti(a, b, b, d.div(&gamma_f[lb])?.scale(&half).neg());
                    }
                }
                if ha == 1 {
                    let d = action[b].apply(&gamma_f[la]);
                    if !d.is_zero() {
                        st.set_anti(a, b, a, d.div(&gamma_f[la])?.scale(&half));
                    }
                }
            }
        }
    }
    let weights = WeightVector(slots.iter().map(|&(l, i)| locals[l].weights[i]).collect());
    let alpha_f: Vec<Scalar> = alpha_sq.iter().map(lift).collect();
    let frame = FrameData {
        field: field.clone(),
        n,
        m,
        weights,
        point,
        structure: st,
        alpha_sq: slots[..m].iter().map(|&(l, _)| alpha_f[l].clone()).collect(),
        action: Some(action),
        mode: FrameMode::Abstract,
    };
    Ok(LcPair {
        frame,
        factor_of: slots.iter().map(|&(l, _)| l).collect(),
        beta: locals.iter().map(|lf| lift(&lf.beta)).collect(),
        gamma: gamma_f,
        alpha_sq: alpha_f,
        radicals,
    })
}

#[derive(Clone, Debug)]
pub struct LcReport {
    pub residuals: Residuals,
    /// Cleared `P·R_j − P·α_j² Σ_{i≤m<k} c^k_{ij} u_i u_k`.
    pub r_simplification: Vec<FiberPoly>,
    pub witness: AlphaPhi,
    pub h1p_zero: bool,
}

impl LcReport {
    pub fn all_zero(&self) -> bool {
        self.residuals.all_zero() && self.r_simplification.iter().all(Poly::is_zero)
    }

    /// First failing equation with its 1-based frame index.
    pub fn first_failure(&self) -> Option<(&'static str, usize)> {
        if let Some(f) = self.residuals.first_failure() {
            return Some(f);
        }
        self.r_simplification.iter().position(|r| !r.is_zero()).map(|j| ("r_simplification", j + 1))
    }
}

/// Substitute the block witness `αΦ_k = α_{ℓ(k)}² u_k` and clear denominators.
pub fn lc_verify(pair: &LcPair) -> Result<LcReport> {
    let fd = &pair.frame;
    let (n, m) = (fd.n, fd.m);
    if pair.factor_of.len() != n || pair.factor_of.iter().any(|&l| l >= pair.alpha_sq.len()) {
        return Err(Error::DimensionMismatch("factor map does not match the frame".into()));
    }
    let nums: Vec<FiberPoly> =
        (m..n).map(|k| u(&fd.field, n, k).scale(&pair.alpha_sq[pair.factor_of[k]])).collect();
    let witness = AlphaPhi { nums, den: Poly::constant(n, fd.one()) };
    let residuals = verify_orbital_map(fd, &witness)?;
    let lift = HamiltonianLift::new(fd);
    let t = PairTerms::new(&lift);
    let half = rat(1, 2);
    let r_simplification = (0..m)
        .map(|j| {
            let mut s = fzero(n);
            for i in 0..m {
                for k in m..n {
                    let c = fd.c(i, j, k);
                    if !c.is_zero() {
                        s = s.add(&lift.u(i).mul(&lift.u(k)).scale(c));
                    }
                }
            }
            t.p.mul(&t.r_poly[j])
                .sub(&lift.u(j).scale(&fd.alpha_sq[j].scale(&half)).mul(&t.h1p))
                .sub(&t.p.mul(&s).scale(&fd.alpha_sq[j]))
        })
        .collect();
    Ok(LcReport { residuals, r_simplification, witness, h1p_zero: t.h1p.is_zero() })
}
