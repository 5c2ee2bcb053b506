//! C ABI over the subrig engine.
//!
//! Documents go in as JSON strings and reports come back as JSON owned by an
//! opaque [`SubrigReport`]. Every call returns a [`SubrigStatus`]; panics are
//! caught and reported as `SUBRIG_STATUS_INTERNAL`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subrig::cli::{run_on, Command, CommandKind, Outcome, EXIT_OK, EXIT_UNDETERMINED};
use subrig::frame::FrameData;
use subrig::fundamental::{analyze_pair, AnalyzeOptions, Verdict};
use subrig::io::{self, Document};
use subrig::linalg::Matrix;
use subrig::pencil::{decomposability, DecomposeOptions, SkewPencil};
use subrig::rational::Rational;
use subrig::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubrigStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The input was rejected; the report, if requested, describes why.
    InputError = 3,
    /// The analysis finished without a decision within its layer cap.
    Undetermined = 4,
    Internal = 5,
}

/// A parsed metric pair.
pub struct SubrigFrame {
    fd: FrameData,
}

/// The skew forms of a pencil document.
pub struct SubrigPencil {
    forms: Vec<Matrix<Rational>>,
    dim: usize,
}

/// A JSON report.
pub struct SubrigReport {
    json: CString,
}

fn report(json: String) -> *mut SubrigReport {
    // serde_json escapes control characters, so the text has no interior NUL
    let json = CString::new(json).unwrap_or_default();
    Box::into_raw(Box::new(SubrigReport { json }))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SubrigStatus> {
    if s.is_null() {
        return Err(SubrigStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| SubrigStatus::InvalidUtf8)
}

unsafe fn put<T>(out: *mut *mut T, v: *mut T) {
    if !out.is_null() {
        *out = v;
    }
}

fn guarded(f: impl FnOnce() -> SubrigStatus) -> SubrigStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SubrigStatus::Internal)
}

fn error_status(command: &str, e: &Error, out: *mut *mut SubrigReport) -> SubrigStatus {
    unsafe { put(out, report(io::to_json(&io::error_report(command, e)))) };
    if matches!(e, Error::Undetermined(_)) {
        SubrigStatus::Undetermined
    } else {
        SubrigStatus::InputError
    }
}

fn command_kind(name: &str) -> Option<CommandKind> {
    Some(match name {
        "analyze" => CommandKind::Analyze,
        "nilpotentize" => CommandKind::Nilpotentize,
        "carnot-decompose" => CommandKind::CarnotDecompose,
        "lc-build" => CommandKind::LcBuild,
        "lc-verify" => CommandKind::LcVerify,
        "pencil" => CommandKind::Pencil,
        "validate" => CommandKind::Validate,
        _ => return None,
    })
}

fn outcome_status(o: &Outcome) -> SubrigStatus {
    match o.status {
        EXIT_OK => SubrigStatus::Ok,
        EXIT_UNDETERMINED => SubrigStatus::Undetermined,
        _ => SubrigStatus::InputError,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn subrig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Run a CLI command (`"analyze"`, `"pencil"`, ...) on one JSON document with default flags
/// and the given seed. `max_layers = 0` keeps the default cap.
///
/// # Safety
/// `command` and `json` must be NUL-terminated strings; `out` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_run(
    command: *const c_char,
    json: *const c_char,
    max_layers: u32,
    seed: u64,
    out: *mut *mut SubrigReport,
) -> SubrigStatus {
    guarded(|| {
        let (name, src) = match (read_str(command), read_str(json)) {
            (Ok(c), Ok(j)) => (c, j),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let Some(kind) = command_kind(name) else {
            return error_status(name, &Error::BadInput(format!("unknown command '{name}'")), out);
        };
        let mut cmd = Command::new(kind, vec![]);
        cmd.seed = seed;
        cmd.max_layers = (max_layers > 0).then_some(max_layers as usize);
        let o = run_on(&cmd, &[src.to_owned()]);
        put(out, report(o.render(false)));
        outcome_status(&o)
    })
}

/// Parse a frame document, a Carnot document with `alpha_sq`, or an lc-build report.
///
/// # Safety
/// `json` must be a NUL-terminated string; `frame` must be non-null; `err` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_frame_from_json(
    json: *const c_char,
    frame: *mut *mut SubrigFrame,
    err: *mut *mut SubrigReport,
) -> SubrigStatus {
    guarded(|| {
        if frame.is_null() {
            return SubrigStatus::NullPointer;
        }
        *frame = ptr::null_mut();
        let src = match read_str(json) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let parsed = io::parse_document(src).and_then(|d| match d {
            Document::Frame(f) => io::frame_from_doc(&f, None),
            Document::Carnot(c) => {
                let alpha = io::carnot_alpha(&c)?
                    .ok_or_else(|| Error::BadInput("Carnot document without alpha_sq".into()))?;
                io::carnot_from_doc(&c)?.to_frame(&alpha)
            }
            Document::Report(v) => match v.get("frame").cloned().map(io::document_from_value) {
                Some(Ok(Document::Frame(f))) => io::frame_from_doc(&f, None),
                Some(Err(e)) => Err(e),
                _ => Err(Error::BadInput("report carries no frame".into())),
            },
            other => Err(Error::BadInput(format!("expected a frame, got a {} document", other.kind()))),
        });
        let checked = parsed.and_then(|fd| {
            let issues = subrig::frame::validate(&fd);
            if issues.is_empty() {
                Ok(fd)
            } else {
                let msgs: Vec<String> = issues.iter().map(|i| i.describe()).collect();
                Err(Error::InvalidFrame(msgs.join("; ")))
            }
        });
        match checked {
            Ok(fd) => {
                *frame = Box::into_raw(Box::new(SubrigFrame { fd }));
                SubrigStatus::Ok
            }
            Err(e) => error_status("frame", &e, err),
        }
    })
}

/// # Safety
/// `frame` must come from [`subrig_frame_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn subrig_frame_free(frame: *mut SubrigFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Dimension and rank of a frame.
///
/// # Safety
/// `frame` must be a live handle; `n` and `m` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_frame_dims(frame: *const SubrigFrame, n: *mut u32, m: *mut u32) -> SubrigStatus {
    let Some(f) = frame.as_ref() else { return SubrigStatus::NullPointer };
    if !n.is_null() {
        *n = f.fd.n as u32;
    }
    if !m.is_null() {
        *m = f.fd.m as u32;
    }
    SubrigStatus::Ok
}

/// Decide the pair. `max_layers = 0` keeps the default cap of `2n`.
///
/// # Safety
/// `frame` must be a live handle; `out` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_analyze(
    frame: *const SubrigFrame,
    max_layers: u32,
    seed: u64,
    out: *mut *mut SubrigReport,
) -> SubrigStatus {
    guarded(|| {
        let Some(f) = frame.as_ref() else { return SubrigStatus::NullPointer };
        let opts = AnalyzeOptions { max_layers: (max_layers > 0).then_some(max_layers as usize), seed };
        match analyze_pair(&f.fd, &opts) {
            Ok(r) => {
                put(out, report(io::to_json(&io::analysis_report(&r, seed))));
                if matches!(r.verdict, Verdict::Undetermined(_)) {
                    SubrigStatus::Undetermined
                } else {
                    SubrigStatus::Ok
                }
            }
            Err(e) => error_status("analyze", &e, out),
        }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `pencil` must be non-null; `err` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_pencil_from_json(
    json: *const c_char,
    pencil: *mut *mut SubrigPencil,
    err: *mut *mut SubrigReport,
) -> SubrigStatus {
    guarded(|| {
        if pencil.is_null() {
            return SubrigStatus::NullPointer;
        }
        *pencil = ptr::null_mut();
        let src = match read_str(json) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let parsed = io::parse_document(src).and_then(|d| match d {
            Document::Pencil(p) => io::pencil_forms(&p).map(|f| (f, p.dim)),
            other => Err(Error::BadInput(format!("expected a pencil, got a {} document", other.kind()))),
        });
        match parsed {
            Ok((forms, dim)) => {
                *pencil = Box::into_raw(Box::new(SubrigPencil { forms, dim }));
                SubrigStatus::Ok
            }
            Err(e) => error_status("pencil", &e, err),
        }
    })
}

/// # Safety
/// `pencil` must come from [`subrig_pencil_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn subrig_pencil_free(pencil: *mut SubrigPencil) {
    if !pencil.is_null() {
        drop(Box::from_raw(pencil));
    }
}

/// Invariants (for exactly two forms) and the decomposability verdict.
///
/// # Safety
/// `pencil` must be a live handle; `out` may be null.
#[no_mangle]
pub unsafe extern "C" fn subrig_pencil_decompose(
    pencil: *const SubrigPencil,
    plane_budget: u32,
    seed: u64,
    out: *mut *mut SubrigReport,
) -> SubrigStatus {
    guarded(|| {
        let Some(p) = pencil.as_ref() else { return SubrigStatus::NullPointer };
        let opts = DecomposeOptions { plane_budget: plane_budget as usize, seed };
        let inv = match p.forms.len() {
            2 => match SkewPencil::new(p.forms[0].clone(), p.forms[1].clone()) {
                Ok(sp) => Some(sp.invariants()),
                Err(e) => return error_status("pencil", &e, out),
            },
            _ => None,
        };
        match decomposability(&p.forms, &opts) {
            Ok(d) => {
                let v = io::pencil_report(p.dim, p.forms.len(), inv.as_ref(), &d, opts.plane_budget, seed);
                put(out, report(io::to_json(&v)));
                SubrigStatus::Ok
            }
            Err(e) => error_status("pencil", &e, out),
        }
    })
}

/// The report text; valid until the report is freed.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn subrig_report_json(report: *const SubrigReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn subrig_report_free(report: *mut SubrigReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_match_the_cli() {
        for k in [
            CommandKind::Analyze,
            CommandKind::Nilpotentize,
            CommandKind::CarnotDecompose,
            CommandKind::LcBuild,
            CommandKind::LcVerify,
            CommandKind::Pencil,
            CommandKind::Validate,
        ] {
            assert_eq!(command_kind(k.name()), Some(k));
        }
        assert_eq!(command_kind("analyse"), None);
    }

    #[test]
    fn reports_round_trip_through_c_strings() {
        let r = report("{\"a\": \"λ\"}".into());
        let back = unsafe { CStr::from_ptr(subrig_report_json(r)) }.to_str().unwrap().to_owned();
        unsafe { subrig_report_free(r) };
        assert_eq!(back, "{\"a\": \"λ\"}");
    }

    #[test]
    fn panics_become_internal() {
        assert_eq!(guarded(|| panic!("boom")), SubrigStatus::Internal);
    }
}
