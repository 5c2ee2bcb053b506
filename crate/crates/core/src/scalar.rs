//! The coefficient field: rational functions in the base variables, extended
//! by finitely many square roots.
//!
//! Internally every radical is expressed through a generator `σ` with a
//! polynomial square `σ² = R(x)`. A declared radical `s` with `s² = N/D` is
//! stored as `σ/D` where `σ² = N·D`. A declaration whose square is already a
//! square in the current field (possibly after multiplying by other
//! generators) does not create a new generator, so the generators stay
//! multiplicatively independent and the extension is a field.
//!
//! A canonical [`Scalar`] is `num/den` with `num` reduced modulo the generator
//! relations, `den` free of generators and monic, and no common factor.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{Field, Mono, Poly, Ring};
use crate::qpoly::{self, QPoly};
use crate::rational::{format_rational, rational_sqrt, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct RadicalDecl {
    pub name: String,
    /// Numerator and monic denominator of the declared square (x-only).
    pub sq_num: QPoly,
    pub sq_den: QPoly,
    value_num: QPoly,
    value_den: QPoly,
    generator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Generator {
    decl: usize,
    square: QPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    vars: Vec<String>,
    radicals: Vec<RadicalDecl>,
    gens: Vec<Generator>,
}

#[derive(Clone, Debug)]
enum Repr {
    Const(Rational),
    Frac { num: QPoly, den: QPoly },
}

#[derive(Clone)]
pub struct Scalar {
    field: Arc<ScalarField>,
    repr: Repr,
}

impl ScalarField {
    pub fn new(vars: Vec<String>) -> Arc<Self> {
        Arc::new(ScalarField {
            vars,
            radicals: Vec::new(),
            gens: Vec::new(),
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nx(&self) -> usize {
        self.vars.len()
    }

    fn nvars(&self) -> usize {
        self.vars.len() + self.gens.len()
    }

    pub fn radicals(&self) -> &[RadicalDecl] {
        &self.radicals
    }

    pub fn radical_index(&self, name: &str) -> Option<usize> {
        self.radicals.iter().position(|r| r.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// True if `other` is this field or an extension of it by more radicals.
    pub fn is_subfield_of(&self, other: &ScalarField) -> bool {
        self.vars == other.vars
            && self.radicals.len() <= other.radicals.len()
            && self
                .radicals
                .iter()
                .zip(&other.radicals)
                .all(|(a, b)| a.name == b.name && a.sq_num == b.sq_num && a.sq_den == b.sq_den)
    }

    /// Adjoin `name` with `name² = square`.
    pub fn with_radical(self: &Arc<Self>, name: &str, square: &Scalar) -> Result<Arc<Self>> {
        if self.var_index(name).is_some() || self.radical_index(name).is_some() {
            return Err(Error::BadInput(format!("symbol '{name}' declared twice")));
        }
        let (sn, sd) = square.x_only_fraction().ok_or_else(|| {
            Error::BadInput(format!("square of radical '{name}' must be radical-free"))
        })?;
        if sn.is_zero() {
            return Err(Error::BadInput(format!("square of radical '{name}' is zero")));
        }
        let nx = self.nx();
        let t = sn.mul(&sd);
        let ng = self.gens.len();
        // search products of existing generators making t a square
        for mask in 0usize..(1 << ng) {
            let mut prod = t.clone();
            let mut prod_r = qpoly::qone(nx);
            for g in 0..ng {
                if mask & (1 << g) != 0 {
                    let r = self.gens[g].square.map_monos(nx, |m| Mono(m.0[..nx].to_vec()));
                    prod = prod.mul(&r);
                    prod_r = prod_r.mul(&r);
                }
            }
            if let Some(w) = qpoly::poly_sqrt(&prod) {
                // s = sqrt(t)/D = W * prod(σ) / (D * prod(R))
                let n = self.nvars();
                let embed = |p: &QPoly| p.map_monos(n, |m| {
                    let mut e = m.0.clone();
                    e.resize(n, 0);
                    Mono(e)
                });
                let mut num = embed(&w);
                for g in 0..ng {
                    if mask & (1 << g) != 0 {
                        num = num.mul(&Poly::var(n, nx + g, Rational::one()));
                    }
                }
                let den = embed(&sd.mul(&prod_r));
                let mut field = (**self).clone();
                let value = Scalar::from_parts(self.clone(), num, den)?;
                let (vn, vd) = value.frac_parts();
                field.radicals.push(RadicalDecl {
                    name: name.to_string(),
                    sq_num: sn,
                    sq_den: sd,
                    value_num: vn,
                    value_den: vd,
                    generator: None,
                });
                return Ok(Arc::new(field));
            }
        }
        let mut field = (**self).clone();
        let n_new = field.nvars() + 1;
        let extend = |p: &QPoly| p.map_monos(n_new, |m| {
            let mut e = m.0.clone();
            e.resize(n_new, 0);
            Mono(e)
        });
        for r in &mut field.radicals {
            r.value_num = extend(&r.value_num);
            r.value_den = extend(&r.value_den);
        }
        for g in &mut field.gens {
            g.square = extend(&g.square);
        }
        let gidx = field.gens.len();
        field.gens.push(Generator {
            decl: field.radicals.len(),
            square: extend(&t),
        });
        field.radicals.push(RadicalDecl {
            name: name.to_string(),
            sq_num: sn,
            sq_den: sd.clone(),
            value_num: Poly::var(n_new, nx + gidx, Rational::one()),
            value_den: extend(&sd),
            generator: Some(gidx),
        });
        Ok(Arc::new(field))
    }

    /// Exact value of generator `g` at a point, with sign.
    fn gen_value(&self, g: usize, point: &[Rational], signs: &[i8]) -> Result<Rational> {
        let r = self.gens[g]
            .square
            .eval(&pad_point(point, self.nvars()))
            .unwrap_or_else(Rational::zero);
        if r.is_negative() {
            return Err(Error::IrrationalValue);
        }
        let root = rational_sqrt(&r).ok_or(Error::IrrationalValue)?;
        let sign = signs.get(self.gens[g].decl).copied().unwrap_or(1);
        Ok(if sign < 0 { -root } else { root })
    }

    fn gen_value_f64(&self, g: usize, point: &[f64], signs: &[i8]) -> f64 {
        let mut pt = point.to_vec();
        pt.resize(self.nvars(), 0.0);
        let r = eval_f64_poly(&self.gens[g].square, &pt);
        let sign = signs.get(self.gens[g].decl).copied().unwrap_or(1) as f64;
        sign * r.sqrt()
    }

    /// Textual names of the internal polynomial variables.
    fn poly_names(&self) -> Vec<String> {
        let mut names = self.vars.clone();
        for g in &self.gens {
            let d = &self.radicals[g.decl];
            if d.sq_den.is_one_poly() {
                names.push(d.name.clone());
            } else {
                let den = format_qpoly(&d.sq_den, &self.vars);
                names.push(format!("({}*({}))", d.name, den));
            }
        }
        names
    }

    /// Reduce exponents of generators modulo their relations.
    fn reduce(&self, p: &QPoly) -> QPoly {
        let nx = self.nx();
        if self.gens.is_empty() || !p.terms().any(|(m, _)| m.0[nx..].iter().any(|&e| e >= 2)) {
            return p.clone();
        }
        let n = self.nvars();
        let one = Rational::one();
        let mut out = Poly::zero(n);
        for (m, c) in p.terms() {
            let mut mono = m.clone();
            let mut factor = Poly::constant(n, c.clone());
            for g in 0..self.gens.len() {
                let e = mono.0[nx + g];
                if e >= 2 {
                    mono.0[nx + g] = e % 2;
                    factor = factor.mul(&self.gens[g].square.pow(e / 2, &one));
                }
            }
            out = out.add(&factor.mul_term(&mono, &one));
        }
        out
    }

    // Constructors

    pub fn constant(self: &Arc<Self>, c: Rational) -> Scalar {
        Scalar {
            field: self.clone(),
            repr: Repr::Const(c),
        }
    }

    pub fn zero(self: &Arc<Self>) -> Scalar {
        self.constant(Rational::zero())
    }

    pub fn one(self: &Arc<Self>) -> Scalar {
        self.constant(Rational::one())
    }

    pub fn var(self: &Arc<Self>, i: usize) -> Scalar {
        let n = self.nvars();
        Scalar {
            field: self.clone(),
            repr: Repr::Frac {
                num: Poly::var(n, i, Rational::one()),
                den: qpoly::qone(n),
            },
        }
    }

    pub fn radical(self: &Arc<Self>, idx: usize) -> Scalar {
        let d = &self.radicals[idx];
        Scalar::from_parts(self.clone(), d.value_num.clone(), d.value_den.clone())
            .expect("radical value has nonzero denominator")
    }
}

trait OnePoly {
    fn is_one_poly(&self) -> bool;
}

impl OnePoly for QPoly {
    fn is_one_poly(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }
}

fn pad_point(point: &[Rational], n: usize) -> Vec<Rational> {
    let mut p = point.to_vec();
    p.resize(n, Rational::zero());
    p
}

pub fn eval_f64_poly(p: &QPoly, point: &[f64]) -> f64 {
    p.terms()
        .map(|(m, c)| {
            m.0.iter()
                .enumerate()
                .fold(to_f64(c), |acc, (i, &e)| acc * point[i].powi(e as i32))
        })
        .sum()
}

/// Print a polynomial in the expression grammar.
pub fn format_qpoly(p: &QPoly, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(names[i].clone()),
                _ => factors.push(format!("{}^{}", names[i], e)),
            }
        }
        if factors.is_empty() || !a.is_one() {
            factors.insert(0, format_rational(&a));
        }
        out.push_str(&factors.join("*"));
    }
    out
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        matches!(&self.repr, Repr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.repr, Repr::Const(c) if c.is_one())
    }

    /// Build `num/den` from raw polynomials in the field's variables.
    fn from_parts(field: Arc<ScalarField>, num: QPoly, den: QPoly) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut num = field.reduce(&num);
        let mut den = field.reduce(&den);
        if num.is_zero() {
            return Ok(field.zero());
        }
        let nx = field.nx();
        // rationalize the denominator
        for g in 0..field.gens.len() {
            let v = nx + g;
            if !den.uses_var(v) {
                continue;
            }
            let parts = den.coefficients_in(v);
            let a = parts.get(&0).cloned().unwrap_or_else(|| Poly::zero(den.nvars()));
            let b = parts.get(&1).cloned().unwrap_or_else(|| Poly::zero(den.nvars()));
            let sigma = Poly::var(den.nvars(), v, Rational::one());
            let conj = a.sub(&b.mul(&sigma));
            num = field.reduce(&num.mul(&conj));
            den = field.reduce(&den.mul(&conj));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !den.is_constant() {
            let g = qpoly::gcd(&num, &den);
            if !g.is_constant() {
                num = num.exact_div(&g).expect("gcd divides numerator");
                den = den.exact_div(&g).expect("gcd divides denominator");
            }
        }
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(Scalar::normalized(field, num, den))
    }

    fn normalized(field: Arc<ScalarField>, num: QPoly, den: QPoly) -> Scalar {
        if num.is_zero() {
            return field.zero();
        }
        if den.is_constant() && num.is_constant() {
            let c = num.as_constant().cloned().unwrap() / den.as_constant().cloned().unwrap();
            return field.constant(c);
        }
        Scalar {
            field,
            repr: Repr::Frac { num, den },
        }
    }

    pub fn field(&self) -> &Arc<ScalarField> {
        &self.field
    }

    fn frac_parts(&self) -> (QPoly, QPoly) {
        match &self.repr {
            Repr::Const(c) => {
                let n = self.field.nvars();
                (qpoly::qconst(n, c.clone()), qpoly::qone(n))
            }
            Repr::Frac { num, den } => (num.clone(), den.clone()),
        }
    }

    /// Numerator and denominator restricted to the base variables, if no
    /// generator occurs.
    pub fn x_only_fraction(&self) -> Option<(QPoly, QPoly)> {
        let nx = self.field.nx();
        let (num, den) = self.frac_parts();
        let n = num.nvars();
        if (nx..n).any(|v| num.uses_var(v)) {
            return None;
        }
        let cut = |p: &QPoly| p.map_monos(nx, |m| Mono(m.0[..nx].to_vec()));
        Some((cut(&num), cut(&den)))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match &self.repr {
            Repr::Const(c) => Some(c),
            Repr::Frac { .. } => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self.repr, Repr::Const(_))
    }

    pub fn has_radicals(&self) -> bool {
        self.x_only_fraction().is_none()
    }

    /// Re-express in an extension field.
    pub fn lift(&self, to: &Arc<ScalarField>) -> Scalar {
        if Arc::ptr_eq(&self.field, to) {
            return self.clone();
        }
        debug_assert!(self.field.is_subfield_of(to));
        match &self.repr {
            Repr::Const(c) => to.constant(c.clone()),
            Repr::Frac { num, den } => {
                let n = to.nvars();
                let ext = |p: &QPoly| p.map_monos(n, |m| {
                    let mut e = m.0.clone();
                    e.resize(n, 0);
                    Mono(e)
                });
                Scalar {
                    field: to.clone(),
                    repr: Repr::Frac {
                        num: ext(num),
                        den: ext(den),
                    },
                }
            }
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (&self.repr, &o.repr) {
            (Repr::Const(a), Repr::Const(b)) => self.field.constant(a + b),
            (Repr::Const(a), _) if a.is_zero() => o.clone(),
            (_, Repr::Const(b)) if b.is_zero() => self.clone(),
            _ => {
                let (an, ad) = self.frac_parts();
                let (bn, bd) = o.frac_parts();
                if ad == bd {
                    if ad.is_constant() {
                        return Scalar::normalized(self.field.clone(), an.add(&bn), ad);
                    }
                    return Scalar::from_parts(self.field.clone(), an.add(&bn), ad)
                        .expect("nonzero denominator");
                }
                let num = an.mul(&bd).add(&bn.mul(&ad));
                Scalar::from_parts(self.field.clone(), num, ad.mul(&bd)).expect("nonzero")
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match &self.repr {
            Repr::Const(a) => self.field.constant(-a),
            Repr::Frac { num, den } => Scalar {
                field: self.field.clone(),
                repr: Repr::Frac {
                    num: num.neg(),
                    den: den.clone(),
                },
            },
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (&self.repr, &o.repr) {
            (Repr::Const(a), Repr::Const(b)) => self.field.constant(a * b),
            (Repr::Const(a), Repr::Frac { num, den }) | (Repr::Frac { num, den }, Repr::Const(a)) => {
                if a.is_zero() {
                    return self.field.zero();
                }
                Scalar::normalized(self.field.clone(), num.scale(a), den.clone())
            }
            _ => {
                let (an, ad) = self.frac_parts();
                let (bn, bd) = o.frac_parts();
                let num = self.field.reduce(&an.mul(&bn));
                let den = ad.mul(&bd);
                if den.is_constant() {
                    return Scalar::normalized(self.field.clone(), num, den);
                }
                Scalar::from_parts(self.field.clone(), num, den).expect("nonzero")
            }
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match &self.repr {
            Repr::Const(a) => {
                if a.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(self.field.constant(a.recip()))
                }
            }
            Repr::Frac { num, den } => Scalar::from_parts(self.field.clone(), den.clone(), num.clone()),
        }
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        if let (Repr::Frac { .. }, Repr::Const(b)) = (&self.repr, &o.repr) {
            if b.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(self.mul(&self.field.constant(b.recip())));
        }
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale(&self, c: &Rational) -> Scalar {
        self.mul(&self.field.constant(c.clone()))
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative along base variable `var`.
    pub fn diff(&self, var: usize) -> Scalar {
        let (num, den) = match &self.repr {
            Repr::Const(_) => return self.field.zero(),
            Repr::Frac { num, den } => (num, den),
        };
        let f = &self.field;
        let n = f.nvars();
        let one = qpoly::qone(n);
        let mut dnum = Scalar::from_parts(f.clone(), num.derivative(var), one.clone()).unwrap();
        let nx = f.nx();
        for g in 0..f.gens.len() {
            let v = nx + g;
            if !num.uses_var(v) {
                continue;
            }
            let dr = f.gens[g].square.derivative(var);
            if dr.is_zero() {
                continue;
            }
            let sigma = Poly::var(n, v, Rational::one());
            let t = num.derivative(v).mul(&sigma).mul(&dr);
            let d = f.gens[g].square.scale_int(2);
            dnum = dnum.add(&Scalar::from_parts(f.clone(), t, d).unwrap());
        }
        let den_s = Scalar::from_parts(f.clone(), den.clone(), one).unwrap();
        let term1 = dnum.div(&den_s).unwrap();
        let dden = den.derivative(var);
        if dden.is_zero() {
            return term1;
        }
        let term2 = Scalar::from_parts(f.clone(), num.mul(&dden), den.mul(den)).unwrap();
        term1.sub(&term2)
    }

    /// Exact value at a base point; `signs[r]` chooses the branch of radical `r`.
    pub fn eval(&self, point: &[Rational], signs: &[i8]) -> Result<Rational> {
        let (num, den) = match &self.repr {
            Repr::Const(c) => return Ok(c.clone()),
            Repr::Frac { num, den } => (num, den),
        };
        let f = &self.field;
        let nx = f.nx();
        if point.len() < nx {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, expected {nx}",
                point.len()
            )));
        }
        let mut full: Vec<Rational> = point[..nx].to_vec();
        for g in 0..f.gens.len() {
            if num.uses_var(nx + g) {
                full.push(f.gen_value(g, point, signs)?);
            } else {
                full.push(Rational::zero());
            }
        }
        let d = den.eval(&full).unwrap_or_else(Rational::zero);
        if d.is_zero() {
            return Err(Error::PoleAtPoint);
        }
        Ok(num.eval(&full).unwrap_or_else(Rational::zero) / d)
    }

    pub fn eval_f64(&self, point: &[f64], signs: &[i8]) -> f64 {
        let (num, den) = match &self.repr {
            Repr::Const(c) => return to_f64(c),
            Repr::Frac { num, den } => (num, den),
        };
        let f = &self.field;
        let nx = f.nx();
        let mut full: Vec<f64> = point[..nx].to_vec();
        for g in 0..f.gens.len() {
            full.push(f.gen_value_f64(g, point, signs));
        }
        eval_f64_poly(num, &full) / eval_f64_poly(den, &full)
    }

    /// Expression text in the input grammar.
    pub fn to_expr(&self) -> String {
        match &self.repr {
            Repr::Const(c) => format_rational(c),
            Repr::Frac { num, den } => {
                let names = self.field.poly_names();
                let ns = format_qpoly(num, &names);
                if den.is_one_poly() {
                    ns
                } else {
                    let wrap = |s: String, p: &QPoly| {
                        if p.num_terms() > 1 || s.starts_with('-') {
                            format!("({s})")
                        } else {
                            s
                        }
                    };
                    let ds = format_qpoly(den, &names);
                    format!("{}/{}", wrap(ns, num), wrap(ds, den))
                }
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Const(a), Repr::Const(b)) => a == b,
            (Repr::Frac { num: a, den: b }, Repr::Frac { num: c, den: d }) => a == c && b == d,
            _ => false,
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.to_expr())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr())
    }
}

impl Ring for Scalar {
    fn is_nil(&self) -> bool {
        matches!(&self.repr, Repr::Const(c) if c.is_zero())
    }
    fn is_identity(&self) -> bool {
        matches!(&self.repr, Repr::Const(c) if c.is_one())
    }
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn scale_int(&self, k: i64) -> Self {
        self.scale(&Rational::from_integer(k.into()))
    }
}

impl Field for Scalar {
    fn inverse(&self) -> Option<Self> {
        self.inv().ok()
    }
}
