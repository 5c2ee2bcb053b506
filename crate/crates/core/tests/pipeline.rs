use std::path::Path;

use subrig::fundamental::{analyze_pair, verify_orbital_map, AnalyzeOptions, Verdict};
use subrig::io::{self, Document};
use subrig::levi_civita::lc_build;
use subrig::nilpotent::carnot_product_structure;
use subrig::pencil::{decomposability, DecomposeOptions};

fn doc(name: &str) -> Document {
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)).unwrap();
    io::parse_document(&src).unwrap()
}

#[test]
fn every_corpus_document_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    for entry in std::fs::read_dir(dir).unwrap() {
        let src = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        io::parse_document(&src).unwrap();
    }
}

#[test]
fn frame_document_round_trip() {
    let Document::Frame(d) = doc("perturbed_heisenberg.json") else { panic!() };
    let fd = io::frame_from_doc(&d, None).unwrap();
    let back = io::frame_to_doc(&fd);
    let fd2 = io::frame_from_doc(&back, None).unwrap();
    assert_eq!((fd.n, fd.m), (fd2.n, fd2.m));
    assert_eq!(fd.structure, fd2.structure);
    let a = analyze_pair(&fd, &AnalyzeOptions::default()).unwrap();
    let b = analyze_pair(&fd2, &AnalyzeOptions::default()).unwrap();
    assert_eq!(a.verdict, b.verdict);
}

#[test]
fn carnot_document_round_trip() {
    let Document::Carnot(d) = doc("double_heisenberg.json") else { panic!() };
    let c = io::carnot_from_doc(&d).unwrap();
    let alpha = io::carnot_alpha(&d).unwrap().unwrap();
    let again = io::carnot_from_doc(&io::carnot_to_doc(&c, Some(&alpha))).unwrap();
    assert_eq!(c, again);
    assert!(matches!(
        carnot_product_structure(&again, &alpha).unwrap(),
        subrig::nilpotent::ProductOutcome::Product(_)
    ));
}

#[test]
fn lc_pair_through_abstract_document() {
    let Document::Lc(d) = doc("dini_lc.json") else { panic!() };
    let pair = lc_build(&io::lc_spec_from_doc(&d).unwrap()).unwrap();
    let back = io::frame_from_doc(&io::frame_to_doc(&pair.frame), None).unwrap();
    let r = analyze_pair(&back, &AnalyzeOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::OrbitalDiffeoFound);
    let w = r.witness.unwrap();
    assert!(verify_orbital_map(&back, &w).unwrap().all_zero());
    let v = serde_json::to_value(io::analysis_report(&analyze_pair(&back, &AnalyzeOptions::default()).unwrap(), 0)).unwrap();
    let parsed = io::witness_from_value(&v["witness"], &back).unwrap();
    assert_eq!(parsed, w);
}

#[test]
fn pencil_documents() {
    let expect = [
        ("pf_lambda_mu.json", "decomposable"),
        ("pf_definite.json", "indecomposable"),
        ("pencil_dim5.json", "indecomposable"),
        ("pencil_split_2_3.json", "decomposable"),
    ];
    for (name, verdict) in expect {
        let Document::Pencil(p) = doc(name) else { panic!() };
        let forms = io::pencil_forms(&p).unwrap();
        assert_eq!(decomposability(&forms, &DecomposeOptions::default()).unwrap().name(), verdict, "{name}");
    }
}
