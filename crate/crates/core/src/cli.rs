//! Command-line front end: flag validation, dispatch and exit codes.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frame::{self, diagonalize_transition, EigenValue, FrameData};
use crate::fundamental::{analyze_pair, verify_orbital_map, AnalyzeOptions, Verdict};
use crate::io::{self, Document};
use crate::levi_civita::{lc_build, lc_verify};
use crate::nilpotent::{carnot_product_structure, hat_layer_check, nilpotent_approximation, CarnotAlgebra};
use crate::pencil::{decomposability, DecomposeOptions, SkewPencil};
use crate::rational::{format_rational, parse_rational, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDETERMINED: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Analyze,
    Nilpotentize,
    CarnotDecompose,
    LcBuild,
    LcVerify,
    Pencil,
    Validate,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Analyze => "analyze",
            CommandKind::Nilpotentize => "nilpotentize",
            CommandKind::CarnotDecompose => "carnot-decompose",
            CommandKind::LcBuild => "lc-build",
            CommandKind::LcVerify => "lc-verify",
            CommandKind::Pencil => "pencil",
            CommandKind::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "subrig", version, about = "Orbital equivalence of sub-Riemannian metric pairs")]
pub struct Command {
    #[arg(value_enum)]
    pub kind: CommandKind,
    /// Input documents; `-` reads standard input. lc-verify takes an optional witness report second.
    #[arg(required = true, num_args = 1..=2)]
    pub inputs: Vec<PathBuf>,
    /// Cap on the fundamental-system layers (analyze) or on the hat checks (nilpotentize).
    #[arg(long)]
    pub max_layers: Option<usize>,
    /// Base point override, comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Random planes tried by the corank >= 3 pencil scan.
    #[arg(long, default_value_t = 32)]
    pub plane_budget: usize,
    /// Allow floating eigenvalues of the transition operator, clustered within EPS.
    #[arg(long, value_name = "EPS")]
    pub numeric_fallback: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    #[arg(long)]
    pub text: bool,
}

impl Command {
    /// A command with default flags.
    pub fn new(kind: CommandKind, inputs: Vec<PathBuf>) -> Self {
        Command {
            kind,
            inputs,
            max_layers: None,
            point: None,
            plane_budget: 32,
            numeric_fallback: None,
            seed: 0,
            json: false,
            text: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: Value,
}

impl Outcome {
    pub fn render(&self, text: bool) -> String {
        if text {
            io::render_text(&self.report)
        } else {
            io::to_json(&self.report)
        }
    }
}

struct Flags {
    point: Option<Vec<Rational>>,
}

fn check_flags(cmd: &Command, n_inputs: usize) -> Result<Flags> {
    if cmd.max_layers == Some(0) {
        return Err(Error::BadInput("--max-layers must be at least 1".into()));
    }
    if let Some(e) = cmd.numeric_fallback {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::BadInput("--numeric-fallback needs a positive tolerance".into()));
        }
    }
    let max_inputs = if cmd.kind == CommandKind::LcVerify { 2 } else { 1 };
    if n_inputs == 0 || n_inputs > max_inputs {
        return Err(Error::BadInput(format!("{} takes at most {max_inputs} input(s)", cmd.kind.name())));
    }
    let point = cmd
        .point
        .as_deref()
        .map(|p| p.split(',').map(|c| parse_rational(c.trim())).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(Flags { point })
}

fn read_input(p: &PathBuf) -> Result<String> {
    if p.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
    }
}

/// Read the input files and run.
pub fn run(cmd: &Command) -> Outcome {
    match cmd.inputs.iter().map(read_input).collect::<Result<Vec<_>>>() {
        Ok(srcs) => run_on(cmd, &srcs),
        Err(e) => fail(cmd, &e),
    }
}

fn fail(cmd: &Command, e: &Error) -> Outcome {
    let status = if matches!(e, Error::Undetermined(_)) { EXIT_UNDETERMINED } else { EXIT_INPUT };
    Outcome { status, report: io::error_report(cmd.kind.name(), e) }
}

/// Run on document sources already in memory; `cmd.inputs` is ignored.
pub fn run_on(cmd: &Command, sources: &[String]) -> Outcome {
    let flags = match check_flags(cmd, sources.len()) {
        Ok(f) => f,
        Err(e) => return fail(cmd, &e),
    };
    let docs = match sources.iter().map(|s| io::parse_document(s)).collect::<Result<Vec<_>>>() {
        Ok(d) => d,
        Err(e) => return fail(cmd, &e),
    };
    let result = match cmd.kind {
        CommandKind::Analyze => analyze(cmd, &flags, &docs[0]),
        CommandKind::Nilpotentize => nilpotentize(cmd, &flags, &docs[0]),
        CommandKind::CarnotDecompose => carnot_decompose(&flags, &docs[0]),
        CommandKind::LcBuild => lc_build_cmd(&docs[0]),
        CommandKind::LcVerify => lc_verify_cmd(&flags, &docs),
        CommandKind::Pencil => pencil_cmd(cmd, &docs[0]),
        CommandKind::Validate => Ok(validate_cmd(cmd, &flags, &docs[0])),
    };
    match result {
        Ok(o) => o,
        Err(e) => fail(cmd, &e),
    }
}

fn ok(report: Value) -> Result<Outcome> {
    Ok(Outcome { status: EXIT_OK, report })
}

/// Frame data of a frame document, a Carnot document with `alpha_sq`, or an lc-build report.
fn frame_of(doc: &Document, flags: &Flags) -> Result<FrameData> {
    let point = flags.point.as_deref();
    match doc {
        Document::Frame(f) => io::frame_from_doc(f, point),
        Document::Carnot(c) => {
            let alg = io::carnot_from_doc(c)?;
            let alpha = io::carnot_alpha(c)?
                .ok_or_else(|| Error::BadInput("a Carnot document needs \"alpha_sq\" to define a pair".into()))?;
            if point.is_some_and(|p| !p.is_empty()) {
                return Err(Error::DimensionMismatch("Carnot frames have no coordinates".into()));
            }
            alg.to_frame(&alpha)
        }
        Document::Report(v) => match v.get("frame") {
            Some(f) => match io::document_from_value(f.clone())? {
                Document::Frame(f) => io::frame_from_doc(&f, point),
                _ => Err(Error::BadInput("embedded frame is not a frame document".into())),
            },
            None => Err(Error::BadInput("report carries no frame".into())),
        },
        other => Err(Error::BadInput(format!("expected a frame, got a {} document", other.kind()))),
    }
}

fn checked_frame(doc: &Document, flags: &Flags) -> Result<FrameData> {
    let fd = frame_of(doc, flags)?;
    let issues = frame::validate(&fd);
    if !issues.is_empty() {
        let msgs: Vec<String> = issues.iter().map(|i| i.describe()).collect();
        return Err(Error::InvalidFrame(msgs.join("; ")));
    }
    Ok(fd)
}

fn analyze(cmd: &Command, flags: &Flags, doc: &Document) -> Result<Outcome> {
    let fd = checked_frame(doc, flags)?;
    let r = analyze_pair(&fd, &AnalyzeOptions { max_layers: cmd.max_layers, seed: cmd.seed })?;
    let status = if matches!(r.verdict, Verdict::Undetermined(_)) { EXIT_UNDETERMINED } else { EXIT_OK };
    Ok(Outcome { status, report: io::analysis_report(&r, cmd.seed) })
}

fn alpha_at_point(fd: &FrameData) -> Result<Vec<Rational>> {
    fd.alpha_sq.iter().map(|a| a.eval(&fd.point, &[])).collect()
}

fn nilpotentize(cmd: &Command, flags: &Flags, doc: &Document) -> Result<Outcome> {
    let fd = checked_frame(doc, flags)?;
    let c = nilpotent_approximation(&fd)?;
    let top = cmd.max_layers.unwrap_or(3);
    let hat = (1..=top).map(|s| hat_layer_check(&fd, &c, s).map(|ok| (s, ok))).collect::<Result<Vec<_>>>()?;
    let alpha = alpha_at_point(&fd).ok();
    ok(io::nilpotent_report(&c, alpha.as_deref(), &hat))
}

fn carnot_decompose(flags: &Flags, doc: &Document) -> Result<Outcome> {
    let (alg, alpha): (CarnotAlgebra, Vec<Rational>) = match doc {
        Document::Carnot(c) => {
            let alpha = io::carnot_alpha(c)?
                .ok_or_else(|| Error::BadInput("carnot-decompose needs \"alpha_sq\"".into()))?;
            (io::carnot_from_doc(c)?, alpha)
        }
        _ => {
            let fd = checked_frame(doc, flags)?;
            (nilpotent_approximation(&fd)?, alpha_at_point(&fd)?)
        }
    };
    let out = carnot_product_structure(&alg, &alpha)?;
    ok(io::product_report(&out, &alpha))
}

fn lc_build_cmd(doc: &Document) -> Result<Outcome> {
    let Document::Lc(d) = doc else {
        return Err(Error::BadInput(format!("lc-build expects an lc document, got {}", doc.kind())));
    };
    let pair = lc_build(&io::lc_spec_from_doc(d)?)?;
    ok(io::lc_build_report(&pair))
}

fn lc_verify_cmd(flags: &Flags, docs: &[Document]) -> Result<Outcome> {
    if let (Document::Lc(d), None) = (&docs[0], docs.get(1)) {
        let pair = lc_build(&io::lc_spec_from_doc(d)?)?;
        return ok(io::lc_verify_report(&lc_verify(&pair)?));
    }
    let fd = match &docs[0] {
        Document::Lc(d) => lc_build(&io::lc_spec_from_doc(d)?)?.frame,
        other => checked_frame(other, flags)?,
    };
    let source = docs.get(1).unwrap_or(&docs[0]);
    let Document::Report(rep) = source else {
        return Err(Error::BadInput("lc-verify needs a witness report".into()));
    };
    let w = rep
        .get("witness")
        .filter(|w| !w.is_null())
        .ok_or_else(|| Error::BadInput("report carries no witness".into()))?;
    let phi = io::witness_from_value(w, &fd)?;
    let res = verify_orbital_map(&fd, &phi)?;
    ok(io::witness_verify_report(&res, &phi))
}

fn pencil_cmd(cmd: &Command, doc: &Document) -> Result<Outcome> {
    let Document::Pencil(d) = doc else {
        return Err(Error::BadInput(format!("pencil expects a pencil document, got {}", doc.kind())));
    };
    let forms = io::pencil_forms(d)?;
    let inv = if forms.len() == 2 {
        Some(SkewPencil::new(forms[0].clone(), forms[1].clone())?.invariants())
    } else {
        None
    };
    let opts = DecomposeOptions { plane_budget: cmd.plane_budget, seed: cmd.seed };
    let dec = decomposability(&forms, &opts)?;
    ok(io::pencil_report(d.dim, forms.len(), inv.as_ref(), &dec, cmd.plane_budget, cmd.seed))
}

fn transition_value(m: &io::MetricsDoc, eps: Option<f64>) -> Result<Value> {
    let g1 = m.g1.iter().map(|r| r.iter().map(io::parse_rational_text).collect()).collect::<Result<Vec<_>>>()?;
    let g2 = m.g2.iter().map(|r| r.iter().map(io::parse_rational_text).collect()).collect::<Result<Vec<_>>>()?;
    let t = diagonalize_transition(&g1, &g2, eps)?;
    let eig: Vec<Value> = t
        .eigenvalues
        .iter()
        .map(|e| match e {
            EigenValue::Exact(r) => json!(format_rational(r)),
            EigenValue::Approx(x) => json!(x),
        })
        .collect();
    let partition: Vec<Vec<usize>> = t.partition.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect();
    Ok(json!({ "eigenvalues": eig, "partition": partition, "N": t.n_distinct }))
}

fn validate_cmd(cmd: &Command, flags: &Flags, doc: &Document) -> Outcome {
    let mut issues = Vec::new();
    let mut extra = None;
    let mut push = |e: Error| issues.push(e.to_string());
    match doc {
        Document::Frame(f) => {
            match io::frame_from_doc(f, flags.point.as_deref()) {
                Ok(fd) => issues.extend(frame::validate(&fd).iter().map(|i| i.describe())),
                Err(e) => push(e),
            }
            if let Some(m) = &f.metrics {
                match transition_value(m, cmd.numeric_fallback) {
                    Ok(t) => extra = Some(json!({ "transition": t })),
                    Err(e) => issues.push(e.to_string()),
                }
            }
        }
        Document::Carnot(c) => {
            if let Err(e) = io::carnot_from_doc(c).and_then(|_| io::carnot_alpha(c)) {
                push(e);
            }
        }
        Document::Pencil(p) => {
            if let Err(e) = io::pencil_forms(p) {
                push(e);
            }
        }
        Document::Lc(l) => {
            if let Err(e) = io::lc_spec_from_doc(l).and_then(|s| lc_build(&s)) {
                push(e);
            }
        }
        Document::Report(v) => {
            if v.get("error").is_some() {
                issues.push("report records an error".into());
            }
        }
    }
    Outcome { status: EXIT_OK, report: io::validate_report(doc.kind(), &issues, extra) }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEIS_14: &str = r#"{ "schema": "subrig/1", "grading": [2,3],
        "structure": [{"i":1,"j":2,"k":3,"c":"1"}], "alpha_sq": ["1","4"] }"#;

    fn cmd(kind: CommandKind) -> Command {
        Command::new(kind, vec![])
    }

    #[test]
    fn heisenberg_pair_is_rigid() {
        let out = run_on(&cmd(CommandKind::Analyze), &[HEIS_14.into()]);
        assert_eq!(out.status, EXIT_OK);
        assert_eq!(out.report["verdict"], "divisibility_failed");
    }

    #[test]
    fn zero_layers_is_an_input_error() {
        let mut c = cmd(CommandKind::Analyze);
        c.max_layers = Some(0);
        let out = run_on(&c, &[HEIS_14.into()]);
        assert_eq!(out.status, EXIT_INPUT);
        assert_eq!(out.report["error"]["kind"], "bad_input");
    }

    #[test]
    fn flag_errors_precede_parsing() {
        let mut c = cmd(CommandKind::Analyze);
        c.numeric_fallback = Some(-1.0);
        assert_eq!(run_on(&c, &["not json".into()]).report["error"]["kind"], "bad_input");
        let c = cmd(CommandKind::Analyze);
        assert_eq!(run_on(&c, &["not json".into()]).report["error"]["kind"], "json");
        assert_eq!(run_on(&c, &[HEIS_14.into(), HEIS_14.into()]).status, EXIT_INPUT);
    }

    #[test]
    fn undetermined_exits_three() {
        // a step-3 factor times Heisenberg: corank 4 saturates only at layer 3
        let spec = r#"{ "factors": [
            { "frame": { "grading": [2,3,5], "structure": [{"i":1,"j":2,"k":3,"c":"1"},
                {"i":1,"j":3,"k":4,"c":"1"}, {"i":2,"j":3,"k":5,"c":"1"}] }, "beta": "1" },
            { "frame": { "grading": [2,3], "structure": [{"i":1,"j":2,"k":3,"c":"1"}] }, "beta": "2" } ] }"#;
        let built = run_on(&cmd(CommandKind::LcBuild), &[spec.into()]);
        assert_eq!(built.status, EXIT_OK);
        let pair = built.render(false);
        let mut c = cmd(CommandKind::Analyze);
        c.max_layers = Some(2);
        let out = run_on(&c, std::slice::from_ref(&pair));
        assert_eq!(out.status, EXIT_UNDETERMINED);
        assert_eq!(out.report["verdict"], "undetermined");
        assert_eq!(out.report["verdict_layer"], 2);
        c.max_layers = Some(3);
        let out = run_on(&c, &[pair]);
        assert_eq!(out.status, EXIT_OK);
        assert_eq!(out.report["verdict"], "orbital_diffeo_found");
    }

    #[test]
    fn text_is_rendered_from_json() {
        let out = run_on(&cmd(CommandKind::Analyze), &[HEIS_14.into()]);
        let t = out.render(true);
        assert!(t.contains("verdict: divisibility_failed"));
        assert_eq!(t, io::render_text(&serde_json::from_str(&out.render(false)).unwrap()));
    }

    #[test]
    fn validate_reports_issues_without_failing() {
        let bad = r#"{ "mode": "abstract", "weights": [1,1,2], "alpha_sq": ["1","-1"],
            "structure": [{"i":1,"j":2,"k":3,"c":"1"}] }"#;
        let out = run_on(&cmd(CommandKind::Validate), &[bad.into()]);
        assert_eq!(out.status, EXIT_OK);
        assert_eq!(out.report["valid"], false);
        let out = run_on(&cmd(CommandKind::Analyze), &[bad.into()]);
        assert_eq!(out.status, EXIT_INPUT);
    }

    #[test]
    fn transition_with_numeric_fallback() {
        let src = r#"{ "mode": "abstract", "weights": [1,1,2], "alpha_sq": ["1","1"],
            "structure": [{"i":1,"j":2,"k":3,"c":"1"}],
            "metrics": { "g1": [["1","0"],["0","1"]], "g2": [["2","1"],["1","1"]] } }"#;
        let out = run_on(&cmd(CommandKind::Validate), &[src.into()]);
        assert_eq!(out.report["valid"], false, "irrational spectrum needs the fallback");
        let mut c = cmd(CommandKind::Validate);
        c.numeric_fallback = Some(1e-9);
        let out = run_on(&c, &[src.into()]);
        assert_eq!(out.report["valid"], true);
        assert_eq!(out.report["transition"]["N"], 2);
    }
}
