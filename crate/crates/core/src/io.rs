//! JSON documents: loading, validation and report emission.
//!
//! Every document carries `"schema": "subrig/1"`. Rationals are written as
//! `"p/q"` strings and expressions in the input grammar, so reports parse back.
//! Indices in documents are 1-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{parse_fiber, parse_rational_expr, parse_scalar};
use crate::fiber::{fiber_to_expr, u, WeightVector};
use crate::frame::{growth_vector, structure_coefficients, FrameData, FrameMode, Structure, VectorField};
use crate::fundamental::{AlphaPhi, EquivalenceReport, Verdict, LOCALITY_NOTE};
use crate::levi_civita::{FactorFrame, LcFactor, LcPair, LcReport, LeviCivitaSpec, LC_LOCALITY_NOTE};
use crate::linalg::Matrix;
use crate::nilpotent::{CarnotAlgebra, Obstruction, ProductOutcome};
use crate::pencil::{BinaryForm, Decomposability, PencilInvariants};
use crate::rational::{format_rational, Rational};
use crate::scalar::{Scalar, ScalarField};

pub const SCHEMA: &str = "subrig/1";

/// A rational or an expression, given as a string or a JSON integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Text {
    Str(String),
    Int(i64),
}

impl Text {
    pub fn text(&self) -> String {
        match self {
            Text::Str(s) => s.clone(),
            Text::Int(i) => i.to_string(),
        }
    }
}

impl From<String> for Text {
    fn from(s: String) -> Self {
        Text::Str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocMode {
    Fields,
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadicalDoc {
    pub name: String,
    pub square: Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: Text,
}

/// Constant Gram matrices of the horizontal parts of `g1` and `g2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsDoc {
    pub g1: Vec<Vec<Text>>,
    pub g2: Vec<Vec<Text>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub mode: DocMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vars: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radicals: Vec<RadicalDoc>,
    /// Fields mode: the frame (or its horizontal part). Abstract mode: the action of each member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<Vec<Text>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub structure: Vec<StructureEntry>,
    pub alpha_sq: Vec<Text>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Text>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarnotDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub grading: Vec<usize>,
    #[serde(default)]
    pub structure: Vec<StructureEntry>,
    /// Eigenvalues of the transition operator, when the algebra is read as a metric pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sq: Option<Vec<Text>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub dim: usize,
    pub forms: Vec<Vec<Vec<Text>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcFactorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub frame: Value,
    pub beta: Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub factors: Vec<LcFactorDoc>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Frame(FrameDoc),
    Carnot(CarnotDoc),
    Pencil(PencilDoc),
    Lc(LcDoc),
    /// A report emitted by an earlier run.
    Report(Value),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Frame(_) => "frame",
            Document::Carnot(_) => "carnot",
            Document::Pencil(_) => "pencil",
            Document::Lc(_) => "lc",
            Document::Report(_) => "report",
        }
    }
}

fn check_schema(v: &Value) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == SCHEMA => Ok(()),
        Some(other) => Err(Error::BadInput(format!("unsupported schema {other}, expected \"{SCHEMA}\""))),
    }
}

/// Classify a JSON value by its keys and decode it.
pub fn document_from_value(v: Value) -> Result<Document> {
    if !v.is_object() {
        return Err(Error::BadInput("document must be a JSON object".into()));
    }
    check_schema(&v)?;
    let has = |k: &str| v.get(k).is_some();
    if has("command") {
        Ok(Document::Report(v))
    } else if has("factors") {
        Ok(Document::Lc(serde_json::from_value(v)?))
    } else if has("grading") {
        Ok(Document::Carnot(serde_json::from_value(v)?))
    } else if has("forms") {
        Ok(Document::Pencil(serde_json::from_value(v)?))
    } else if has("mode") {
        Ok(Document::Frame(serde_json::from_value(v)?))
    } else {
        Err(Error::BadInput("unrecognized document: expected a frame, carnot, pencil or lc document".into()))
    }
}

pub fn parse_document(src: &str) -> Result<Document> {
    document_from_value(serde_json::from_str(src)?)
}

pub fn parse_rational_text(t: &Text) -> Result<Rational> {
    parse_rational_expr(&t.text())
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn rational_matrix(rows: &[Vec<Text>]) -> Result<Matrix<Rational>> {
    rows.iter().map(|r| r.iter().map(parse_rational_text).collect()).collect()
}

fn declare_field(vars: &[String], radicals: &[RadicalDoc]) -> Result<Arc<ScalarField>> {
    for (a, v) in vars.iter().enumerate() {
        if vars[..a].contains(v) {
            return Err(Error::BadInput(format!("variable '{v}' declared twice")));
        }
    }
    let mut field = ScalarField::new(vars.to_vec());
    for r in radicals {
        let sq = parse_scalar(&r.square.text(), &field)?;
        field = field.with_radical(&r.name, &sq)?;
    }
    Ok(field)
}

fn parse_fields(rows: &[Vec<Text>], field: &Arc<ScalarField>) -> Result<Vec<VectorField>> {
    let nx = field.nx();
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != nx {
                return Err(Error::DimensionMismatch(format!(
                    "field {} has {} components for {nx} variables",
                    r + 1,
                    row.len()
                )));
            }
            Ok(VectorField(row.iter().map(|e| parse_scalar(&e.text(), field)).collect::<Result<_>>()?))
        })
        .collect()
}

fn parse_point(doc: Option<&Vec<Text>>, nx: usize, over: Option<&[Rational]>) -> Result<Vec<Rational>> {
    let p = match (over, doc) {
        (Some(p), _) => p.to_vec(),
        (None, Some(d)) => d.iter().map(parse_rational_text).collect::<Result<_>>()?,
        (None, None) => vec![Rational::from_integer(0.into()); nx],
    };
    if p.len() != nx {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates for {nx} variables", p.len())));
    }
    Ok(p)
}

/// Frame data of a frame document; `point` overrides the document's base point.
pub fn frame_from_doc(doc: &FrameDoc, point: Option<&[Rational]>) -> Result<FrameData> {
    let field = declare_field(&doc.vars, &doc.radicals)?;
    let nx = field.nx();
    let point = parse_point(doc.point.as_ref(), nx, point)?;
    let parse_alpha = |m: usize| -> Result<Vec<Scalar>> {
        if doc.alpha_sq.len() != m {
            return Err(Error::DimensionMismatch(format!("{} alpha_sq entries for rank {m}", doc.alpha_sq.len())));
        }
        doc.alpha_sq.iter().map(|e| parse_scalar(&e.text(), &field)).collect()
    };
    match doc.mode {
        DocMode::Fields => {
            if !doc.structure.is_empty() {
                return Err(Error::BadInput("structure is derived from the fields in fields mode".into()));
            }
            let rows = doc.fields.as_ref().ok_or_else(|| Error::BadInput("fields mode needs \"fields\"".into()))?;
            let n = doc.n.unwrap_or(nx);
            if n != nx {
                return Err(Error::DimensionMismatch(format!("n = {n} but {nx} variables")));
            }
            let fields = parse_fields(rows, &field)?;
            let m = match doc.m {
                Some(m) => m,
                None if fields.len() < n => fields.len(),
                None => return Err(Error::BadInput("a full frame needs \"m\"".into())),
            };
            if m == 0 || m > fields.len() {
                return Err(Error::DimensionMismatch(format!("rank {m} with {} fields", fields.len())));
            }
            let (adapted, weights) = if fields.len() == n {
                let w = match &doc.weights {
                    Some(w) => w.clone(),
                    None => growth_vector(&fields[..m], &point, n)?.weights.0,
                };
                (fields, w)
            } else if fields.len() == m {
                let g = growth_vector(&fields, &point, n)?;
                if doc.weights.as_ref().is_some_and(|w| *w != g.weights.0) {
                    return Err(Error::BadInput(format!("weights disagree with the growth vector {:?}", g.dims)));
                }
                (g.adapted, g.weights.0)
            } else {
                return Err(Error::DimensionMismatch(format!("{} fields: expected {m} or {n}", fields.len())));
            };
            let weights = WeightVector::new(weights, m)?;
            if weights.len() != n {
                return Err(Error::DimensionMismatch(format!("{} weights for dimension {n}", weights.len())));
            }
            let structure = structure_coefficients(&adapted)?;
            Ok(FrameData {
                alpha_sq: parse_alpha(m)?,
                field,
                n,
                m,
                weights,
                point,
                structure,
                action: Some(adapted),
                mode: FrameMode::Fields,
            })
        }
        DocMode::Abstract => {
            let w = doc.weights.clone().ok_or_else(|| Error::BadInput("abstract mode needs \"weights\"".into()))?;
            let n = w.len();
            if doc.n.is_some_and(|d| d != n) {
                return Err(Error::DimensionMismatch(format!("n = {} but {n} weights", doc.n.unwrap())));
            }
            let m = doc.m.unwrap_or_else(|| w.iter().filter(|&&x| x == 1).count());
            let weights = WeightVector::new(w, m)?;
            let mut structure = Structure::zeros(&field, n);
            let mut seen: BTreeMap<(usize, usize, usize), Scalar> = BTreeMap::new();
            for e in &doc.structure {
                let (i, j, k) = (e.i, e.j, e.k);
                if i == 0 || j == 0 || k == 0 || i > n || j > n || k > n {
                    return Err(Error::BadInput(format!("structure index ({i},{j},{k}) out of range 1..{n}")));
                }
                if i == j {
                    return Err(Error::BadInput(format!("structure entry ({i},{j},{k}) has i = j")));
                }
                let mut v = parse_scalar(&e.c.text(), &field)?;
                let key = if i < j { (i, j, k) } else {
                    v = v.neg();
                    (j, i, k)
                };
                if let Some(old) = seen.get(&key) {
                    if *old != v {
                        return Err(Error::BadInput(format!("conflicting structure entries for ({i},{j},{k})")));
                    }
                }
                structure.set_anti(key.0 - 1, key.1 - 1, key.2 - 1, v.clone());
                seen.insert(key, v);
            }
            let action = match &doc.fields {
                Some(rows) => {
                    if rows.len() != n {
                        return Err(Error::DimensionMismatch(format!("{} action fields for {n} frame members", rows.len())));
                    }
                    Some(parse_fields(rows, &field)?)
                }
                None => None,
            };
            Ok(FrameData {
                alpha_sq: parse_alpha(m)?,
                field,
                n,
                m,
                weights,
                point,
                structure,
                action,
                mode: FrameMode::Abstract,
            })
        }
    }
}

/// Abstract frame document reproducing `fd`.
pub fn frame_to_doc(fd: &FrameData) -> FrameDoc {
    let field = &fd.field;
    let radicals = field
        .radicals()
        .iter()
        .enumerate()
        .map(|(r, d)| RadicalDoc { name: d.name.clone(), square: Text::Str(field.radical(r).pow(2).to_expr()) })
        .collect();
    let structure = fd
        .structure
        .entries()
        .into_iter()
        .map(|(i, j, k, c)| StructureEntry { i: i + 1, j: j + 1, k: k + 1, c: Text::Str(c.to_expr()) })
        .collect();
    let fields = fd.action.as_ref().map(|a| {
        a.iter().map(|x| x.0.iter().map(|c| Text::Str(c.to_expr())).collect()).collect()
    });
    FrameDoc {
        schema: Some(SCHEMA.into()),
        mode: DocMode::Abstract,
        n: Some(fd.n),
        m: Some(fd.m),
        weights: Some(fd.weights.0.clone()),
        vars: field.vars().to_vec(),
        radicals,
        fields,
        structure,
        alpha_sq: fd.alpha_sq.iter().map(|a| Text::Str(a.to_expr())).collect(),
        point: Some(fd.point.iter().map(|p| Text::Str(format_rational(p))).collect()),
        metrics: None,
    }
}

pub fn carnot_from_doc(doc: &CarnotDoc) -> Result<CarnotAlgebra> {
    let n: usize = doc.grading.iter().sum();
    let mut entries = Vec::new();
    for e in &doc.structure {
        if e.i == 0 || e.j == 0 || e.k == 0 || e.i > n || e.j > n || e.k > n {
            return Err(Error::BadInput(format!("structure index ({},{},{}) out of range 1..{n}", e.i, e.j, e.k)));
        }
        entries.push((e.i - 1, e.j - 1, e.k - 1, parse_rational_text(&e.c)?));
    }
    CarnotAlgebra::new(doc.grading.clone(), &entries)
}

pub fn carnot_alpha(doc: &CarnotDoc) -> Result<Option<Vec<Rational>>> {
    doc.alpha_sq.as_ref().map(|a| a.iter().map(parse_rational_text).collect()).transpose()
}

pub fn carnot_to_doc(c: &CarnotAlgebra, alpha_sq: Option<&[Rational]>) -> CarnotDoc {
    CarnotDoc {
        schema: Some(SCHEMA.into()),
        grading: c.grading.clone(),
        structure: c
            .entries()
            .into_iter()
            .map(|(i, j, k, v)| StructureEntry { i: i + 1, j: j + 1, k: k + 1, c: Text::Str(format_rational(&v)) })
            .collect(),
        alpha_sq: alpha_sq.map(|a| a.iter().map(|x| Text::Str(format_rational(x))).collect()),
    }
}

/// Dense skew forms of a pencil document, checked for shape and skew symmetry.
pub fn pencil_forms(doc: &PencilDoc) -> Result<Vec<Matrix<Rational>>> {
    let m = doc.dim;
    let mut out = Vec::new();
    for (f, rows) in doc.forms.iter().enumerate() {
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("form {} is not {m}x{m}", f + 1)));
        }
        let a = rational_matrix(rows)?;
        for i in 0..m {
            for j in 0..m {
                if a[i][j] != -a[j][i].clone() {
                    return Err(Error::BadInput(format!("form {} is not skew at ({},{})", f + 1, i + 1, j + 1)));
                }
            }
        }
        out.push(a);
    }
    Ok(out)
}

pub fn lc_spec_from_doc(doc: &LcDoc) -> Result<LeviCivitaSpec> {
    let mut factors = Vec::new();
    for (l, f) in doc.factors.iter().enumerate() {
        let (frame, n) = match document_from_value(f.frame.clone())? {
            Document::Carnot(c) => {
                let alg = carnot_from_doc(&c)?;
                let n = alg.n();
                (FactorFrame::Carnot(alg), n)
            }
            Document::Frame(fr) => {
                if fr.mode != DocMode::Fields {
                    return Err(Error::BadInput(format!("factor {} frame must be in fields mode", l + 1)));
                }
                let fields = fr.fields.ok_or_else(|| Error::BadInput(format!("factor {} has no fields", l + 1)))?;
                let n = fr.vars.len();
                let fields = fields.iter().map(|r| r.iter().map(Text::text).collect()).collect();
                (FactorFrame::Fields { vars: fr.vars, fields }, n)
            }
            other => return Err(Error::BadInput(format!("factor {} has a {} document as frame", l + 1, other.kind()))),
        };
        if f.n.is_some_and(|d| d != n) {
            return Err(Error::DimensionMismatch(format!("factor {} declares n = {} but has dimension {n}", l + 1, f.n.unwrap())));
        }
        factors.push(LcFactor { frame, beta: f.beta.text() });
    }
    Ok(LeviCivitaSpec { factors })
}

fn exprs(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_expr).collect()
}

fn witness_value(w: &AlphaPhi) -> Value {
    json!({
        "num": w.nums.iter().map(fiber_to_expr).collect::<Vec<_>>(),
        "den": fiber_to_expr(&w.den),
    })
}

/// Read a witness `{"num": [...], "den": expr}` back over `fd`'s field.
pub fn witness_from_value(v: &Value, fd: &FrameData) -> Result<AlphaPhi> {
    let bad = || Error::BadInput("witness must be {\"num\": [expr], \"den\": expr}".into());
    let nums = v.get("num").and_then(Value::as_array).ok_or_else(bad)?;
    let den = v.get("den").and_then(Value::as_str).ok_or_else(bad)?;
    if nums.len() != fd.n - fd.m {
        return Err(Error::DimensionMismatch(format!("{} witness entries for corank {}", nums.len(), fd.n - fd.m)));
    }
    let nums = nums
        .iter()
        .map(|e| parse_fiber(e.as_str().ok_or_else(bad)?, &fd.field, fd.n))
        .collect::<Result<_>>()?;
    let den = parse_fiber(den, &fd.field, fd.n)?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(AlphaPhi { nums, den })
}

fn header(command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m
}

fn with_header(command: &str, body: Value) -> Value {
    let mut m = header(command);
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

pub fn error_report(command: &str, e: &Error) -> Value {
    with_header(command, json!({ "error": { "kind": e.kind(), "message": e.to_string() } }))
}

pub fn analysis_report(r: &EquivalenceReport, seed: u64) -> Value {
    let (layer, direction) = match &r.verdict {
        Verdict::InconsistentAtLayer(s) | Verdict::Undetermined(s) => (Some(*s), None),
        Verdict::DivisibilityFailed(d) => (None, Some(d.as_str())),
        _ => (None, None),
    };
    with_header(
        "analyze",
        json!({
            "verdict": r.verdict.name(),
            "verdict_layer": layer,
            "failed_direction": direction,
            "conformal": r.conformal,
            "divisibility": { "g1g2": r.divisibility_g1g2, "g2g1": r.divisibility_g2g1 },
            "Q": r.q.as_ref().map(fiber_to_expr),
            "ranks": r.ranks,
            "k0": r.k0,
            "alphaPhi": r.witness.as_ref().map(AlphaPhi::to_exprs),
            "witness": r.witness.as_ref().map(witness_value),
            "residuals_zero": r.residuals_zero,
            "first_integral": r.first_integral.as_ref().map(|f| json!({
                "exists": f.exists,
                "nontrivial": f.nontrivial,
                "N": f.n_distinct,
                "Q": fiber_to_expr(&f.q),
            })),
            "affine": r.affine,
            "diagnostics": r.diagnostics.iter().map(|v| json!({
                "rule": v.rule,
                "indices": v.indices,
                "detail": v.detail,
            })).collect::<Vec<_>>(),
            "layers_used": r.layers_used,
            "seed": seed,
            "note": LOCALITY_NOTE,
        }),
    )
}

pub fn nilpotent_report(c: &CarnotAlgebra, alpha_at_point: Option<&[Rational]>, hat: &[(usize, bool)]) -> Value {
    with_header(
        "nilpotentize",
        json!({
            "carnot": carnot_to_doc(c, alpha_at_point),
            "growth": c.grading,
            "hat_checks": hat.iter().map(|(s, ok)| json!({ "layer": s, "holds": ok })).collect::<Vec<_>>(),
        }),
    )
}

fn vectors(v: &[Vec<Rational>]) -> Vec<Vec<String>> {
    v.iter().map(|x| rationals(x)).collect()
}

pub fn product_report(outcome: &ProductOutcome, alpha_sq: &[Rational]) -> Value {
    let body = match outcome {
        ProductOutcome::Conformal => json!({ "outcome": "conformal", "alpha_sq": rationals(alpha_sq) }),
        ProductOutcome::Product(p) => json!({
            "outcome": "product",
            "alpha_sq": rationals(alpha_sq),
            "blocks": p.blocks,
            "block_alpha_sq": rationals(&p.alpha_sq),
            "bases": p.bases.iter().map(|b| vectors(b)).collect::<Vec<_>>(),
            "factors": p.factors.iter().map(|f| carnot_to_doc(f, None)).collect::<Vec<_>>(),
        }),
        ProductOutcome::Obstruction(o) => {
            let detail = match o {
                Obstruction::CrossBracket { i, j, bracket } => {
                    json!({ "kind": o.kind(), "i": i, "j": j, "bracket": rationals(bracket) })
                }
                Obstruction::NotDirect { blocks, witness } => {
                    json!({ "kind": o.kind(), "blocks": [blocks.0, blocks.1], "witness": rationals(witness) })
                }
            };
            json!({ "outcome": "obstruction", "alpha_sq": rationals(alpha_sq), "obstruction": detail })
        }
    };
    with_header("carnot-decompose", body)
}

fn divisors_value(d: &[(BinaryForm, u32)]) -> Value {
    Value::Array(
        d.iter().map(|(f, e)| json!({ "factor": f.to_string(), "multiplicity": e })).collect(),
    )
}

/// 1-based positions when every vector is a standard basis vector.
fn coordinate_indices(v: &[Vec<Rational>]) -> Option<Vec<usize>> {
    v.iter()
        .map(|x| {
            let nz: Vec<usize> = (0..x.len()).filter(|&k| !x[k].is_zero()).collect();
            (nz.len() == 1 && x[nz[0]].is_one()).then(|| nz[0] + 1)
        })
        .collect()
}

pub fn pencil_report(
    dim: usize,
    n_forms: usize,
    invariants: Option<&PencilInvariants>,
    dec: &Decomposability,
    plane_budget: usize,
    seed: u64,
) -> Value {
    let inv = invariants.map(|p| {
        json!({
            "regular": p.regular,
            "pfaffian": p.pfaffian.as_ref().map(|f| f.to_string()),
            "minor_gcds": p.minor_gcds.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "elementary_divisors": divisors_value(&p.elementary_divisors),
            "first_minimal_index": p.first_minimal_index,
        })
    });
    let d = match dec {
        Decomposability::Decomposable { splitting, reason } => json!({
            "verdict": dec.name(),
            "splitting": [vectors(&splitting[0]), vectors(&splitting[1])],
            "splitting_indices": coordinate_indices(&splitting[0])
                .zip(coordinate_indices(&splitting[1]))
                .map(|(a, b)| vec![a, b]),
            "reason": reason,
        }),
        Decomposability::Indecomposable { certificate } => {
            json!({ "verdict": dec.name(), "certificate": certificate })
        }
        Decomposability::Inconclusive { reason } => json!({ "verdict": dec.name(), "reason": reason }),
    };
    with_header(
        "pencil",
        json!({
            "dim": dim,
            "forms": n_forms,
            "pencil": inv,
            "decomposability": d,
            "plane_budget": plane_budget,
            "seed": seed,
        }),
    )
}

pub fn lc_build_report(pair: &LcPair) -> Value {
    let fd = &pair.frame;
    let witness: Vec<String> = (fd.m..fd.n)
        .map(|k| fiber_to_expr(&u(&fd.field, fd.n, k).scale(&pair.alpha_sq[pair.factor_of[k]])))
        .collect();
    with_header(
        "lc-build",
        json!({
            "frame": frame_to_doc(&pair.frame),
            "factor_of": pair.factor_of.iter().map(|l| l + 1).collect::<Vec<_>>(),
            "beta": exprs(&pair.beta),
            "gamma": exprs(&pair.gamma),
            "alpha_table": exprs(&pair.alpha_sq),
            "radicals": pair.radicals,
            "alphaPhi": witness,
            "witness": { "num": witness, "den": "1" },
            "note": LC_LOCALITY_NOTE,
        }),
    )
}

pub fn lc_verify_report(r: &LcReport) -> Value {
    with_header(
        "lc-verify",
        json!({
            "residuals_zero": r.all_zero(),
            "failure": r.first_failure().map(|(eq, i)| json!({ "equation": eq, "index": i })),
            "h1p_zero": r.h1p_zero,
            "r_simplification_zero": r.r_simplification.iter().all(|p| p.is_zero()),
            "alphaPhi": r.witness.to_exprs(),
            "witness": witness_value(&r.witness),
        }),
    )
}

pub fn witness_verify_report(residuals: &crate::fundamental::Residuals, w: &AlphaPhi) -> Value {
    with_header(
        "lc-verify",
        json!({
            "residuals_zero": residuals.all_zero(),
            "failure": residuals.first_failure().map(|(eq, i)| json!({ "equation": eq, "index": i })),
            "alphaPhi": w.to_exprs(),
            "witness": witness_value(w),
        }),
    )
}

pub fn validate_report(kind: &str, issues: &[String], extra: Option<Value>) -> Value {
    let mut body = json!({ "kind": kind, "valid": issues.is_empty(), "issues": issues });
    if let (Some(Value::Object(x)), Value::Object(b)) = (extra, &mut body) {
        b.extend(x);
    }
    with_header("validate", body)
}

/// Canonical byte form of a report.
pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Plain-text rendering of a report value.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, 0, &mut out);
    out
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar_text).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(a) if a.iter().all(|x| x.is_array() && scalar_text(x).is_some_and(|s| s.len() < 60)) => {
            Some(format!("[{}]", a.iter().filter_map(scalar_text).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render_into(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar_text(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                match scalar_text(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{}]\n", i + 1));
                        render_into(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::{analyze_pair, AnalyzeOptions};
    use crate::rational::int;

    const HEIS_FIELDS: &str = r#"{
        "schema": "subrig/1", "mode": "fields", "vars": ["x1","x2","x3"],
        "fields": [["1","0","-x2/2"], ["0","1","x1/2"]],
        "alpha_sq": ["1","4"]
    }"#;

    #[test]
    fn fields_mode_completes_the_frame() {
        let Document::Frame(doc) = parse_document(HEIS_FIELDS).unwrap() else { panic!() };
        let fd = frame_from_doc(&doc, None).unwrap();
        assert_eq!((fd.n, fd.m), (3, 2));
        assert_eq!(fd.weights.0, vec![1, 1, 2]);
        assert_eq!(fd.c(0, 1, 2), &fd.one());
        assert!(crate::frame::validate(&fd).is_empty());
    }

    #[test]
    fn abstract_round_trip() {
        let Document::Frame(doc) = parse_document(HEIS_FIELDS).unwrap() else { panic!() };
        let fd = frame_from_doc(&doc, None).unwrap();
        let back = frame_to_doc(&fd);
        let text = serde_json::to_string(&back).unwrap();
        let Document::Frame(doc2) = parse_document(&text).unwrap() else { panic!() };
        let fd2 = frame_from_doc(&doc2, None).unwrap();
        assert_eq!(fd2.structure, fd.structure);
        assert_eq!(fd2.alpha_sq, fd.alpha_sq);
        assert_eq!(frame_to_doc(&fd2), back);
    }

    #[test]
    fn radicals_survive_the_round_trip() {
        let src = r#"{ "mode": "abstract", "weights": [1,1,2], "vars": ["x1"],
            "radicals": [{"name": "s", "square": "1+x1^2"}],
            "structure": [{"i": 2, "j": 1, "k": 3, "c": "-s"}],
            "alpha_sq": ["s", "2"], "point": ["1/2"] }"#;
        let Document::Frame(doc) = parse_document(src).unwrap() else { panic!() };
        let fd = frame_from_doc(&doc, None).unwrap();
        assert_eq!(fd.c(0, 1, 2).to_expr(), "s");
        let text = serde_json::to_string(&frame_to_doc(&fd)).unwrap();
        let Document::Frame(doc2) = parse_document(&text).unwrap() else { panic!() };
        let fd2 = frame_from_doc(&doc2, None).unwrap();
        assert_eq!(fd2.alpha_sq[0].to_expr(), "s");
        assert_eq!(fd2.point, vec![crate::rational::rat(1, 2)]);
    }

    #[test]
    fn rejects_malformed_frames() {
        let cases = [
            r#"{ "mode": "abstract", "alpha_sq": ["1"] }"#,
            r#"{ "mode": "abstract", "weights": [1,1,2], "alpha_sq": ["1"] }"#,
            r#"{ "mode": "abstract", "weights": [1,1,2], "alpha_sq": ["1","1"],
                 "structure": [{"i":1,"j":2,"k":3,"c":"1"},{"i":2,"j":1,"k":3,"c":"1"}] }"#,
            r#"{ "mode": "abstract", "weights": [1,1,2], "alpha_sq": ["1","y"] }"#,
            r#"{ "mode": "fields", "vars": ["x"], "fields": [["1","0"]], "alpha_sq": ["1"] }"#,
            r#"{ "schema": "subrig/2", "mode": "abstract", "weights": [1], "alpha_sq": ["1"] }"#,
        ];
        for src in cases {
            let r = parse_document(src).and_then(|d| match d {
                Document::Frame(f) => frame_from_doc(&f, None).map(|_| ()),
                _ => Ok(()),
            });
            assert!(r.is_err(), "{src}");
        }
    }

    #[test]
    fn carnot_document() {
        let src = r#"{ "grading": [2,3], "structure": [{"i":1,"j":2,"k":3,"c":1}], "alpha_sq": [1, "4"] }"#;
        let Document::Carnot(doc) = parse_document(src).unwrap() else { panic!() };
        let c = carnot_from_doc(&doc).unwrap();
        assert_eq!(c.get(1, 0, 2), &int(-1));
        let alpha = carnot_alpha(&doc).unwrap().unwrap();
        let r = analyze_pair(&c.to_frame(&alpha).unwrap(), &AnalyzeOptions::default()).unwrap();
        let v = analysis_report(&r, 0);
        assert_eq!(v["verdict"], "divisibility_failed");
        assert_eq!(v["failed_direction"], "g1g2");
        assert_eq!(v["schema"], SCHEMA);
    }

    #[test]
    fn pencil_document_checks_skew() {
        let ok = r#"{ "dim": 2, "forms": [[["0","1"],["-1","0"]]] }"#;
        let bad = r#"{ "dim": 2, "forms": [[["0","1"],["1","0"]]] }"#;
        let Document::Pencil(d) = parse_document(ok).unwrap() else { panic!() };
        assert_eq!(pencil_forms(&d).unwrap().len(), 1);
        let Document::Pencil(d) = parse_document(bad).unwrap() else { panic!() };
        assert!(matches!(pencil_forms(&d), Err(Error::BadInput(_))));
    }

    #[test]
    fn text_follows_json() {
        let v = json!({ "a": 1, "b": { "c": [1, 2], "d": null }, "e": [{ "f": true }] });
        assert_eq!(render_text(&v), "a: 1\nb:\n  c: [1, 2]\n  d: -\ne:\n  - [1]\n    f: yes\n");
    }
}
