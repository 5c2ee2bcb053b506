//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! Every check is exact: rational arithmetic throughout, zero tolerance on
//! residuals and identities. Runs as a plain binary so the lines always print.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subrig::cli::{run_on, Command, CommandKind};
use subrig::expr::parse_fiber;
use subrig::frame::swap_pair;
use subrig::fundamental::{
    analyze_pair, build_layers, build_p_and_q, first_integral, verify_orbital_map, AlphaPhi, AnalyzeOptions,
    FundamentalSystem, PairTerms, Solution, Verdict,
};
use subrig::io::{self, Document};
use subrig::levi_civita::{lc_build, lc_verify, LeviCivitaSpec};
use subrig::linalg::Matrix;
use subrig::nilpotent::{
    carnot_product_structure, hat_layer_check, heisenberg_product, nilpotent_approximation, random_carnot,
    Obstruction, ProductOutcome,
};
use subrig::pencil::{decomposability, splitting_block_diagonalizes, BinaryForm, DecomposeOptions, Decomposability, SkewPencil};
use subrig::rational::{int, rat, Rational};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn data(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)).unwrap()
}

fn lc_spec(name: &str) -> LeviCivitaSpec {
    let Document::Lc(d) = io::parse_document(&data(name)).unwrap() else { panic!("{name} is not an lc document") };
    io::lc_spec_from_doc(&d).unwrap()
}

fn frame_doc(name: &str) -> subrig::frame::FrameData {
    let Document::Frame(d) = io::parse_document(&data(name)).unwrap() else { panic!("{name} is not a frame") };
    io::frame_from_doc(&d, None).unwrap()
}

fn skew(m: usize, entries: &[(usize, usize, i64)]) -> Matrix<Rational> {
    let mut a = vec![vec![int(0); m]; m];
    for &(i, j, v) in entries {
        a[i - 1][j - 1] = int(v);
        a[j - 1][i - 1] = int(-v);
    }
    a
}

fn random_skew(rng: &mut ChaCha8Rng, m: usize) -> Matrix<Rational> {
    let mut a = vec![vec![int(0); m]; m];
    #[allow(clippy::needless_range_loop)]
    for i in 0..m {
        for j in i + 1..m {
            let v = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            a[j][i] = -v.clone();
            a[i][j] = v;
        }
    }
    a
}

fn c1_heisenberg_rigidity() -> Check {
    let heis = heisenberg_product(1);
    let fd = heis.to_frame(&[int(1), int(4)]).map_err(err)?;
    let r = analyze_pair(&fd, &AnalyzeOptions::default()).map_err(err)?;
    ensure(r.verdict.name() == "divisibility_failed", format!("verdict {:?}", r.verdict))?;
    let d = build_p_and_q(&fd).map_err(err)?;
    let expect = parse_fiber("6*u1*u2*u3", &fd.field, 3).map_err(err)?;
    ensure(d.h1p == expect, format!("vec h1(P) = {}", subrig::fiber::fiber_to_expr(&d.h1p)))?;
    ensure(d.p == parse_fiber("u1^2 + 4*u2^2", &fd.field, 3).map_err(err)?, "P")?;
    ensure(!d.holds && d.q.is_none(), "P divides vec h1(P)")?;
    match carnot_product_structure(&heis, &[int(1), int(4)]).map_err(err)? {
        ProductOutcome::Obstruction(o @ Obstruction::CrossBracket { i: 1, j: 2, .. }) => {
            Ok(format!("divisibility_failed, vec h1(P) = 6*u1*u2*u3, {} at (1,2)", o.kind()))
        }
        other => Err(format!("product structure {other:?}")),
    }
}

fn c2_conformal_heisenberg() -> Check {
    let heis = heisenberg_product(1);
    for a in [rat(1, 1), rat(3, 2), rat(-2, 5)] {
        let a2 = &a * &a;
        let fd = heis.to_frame(&[a2.clone(), a2.clone()]).map_err(err)?;
        let r = analyze_pair(&fd, &AnalyzeOptions::default()).map_err(err)?;
        ensure(r.verdict == Verdict::OrbitalDiffeoFound && r.conformal, format!("a = {a}: {:?}", r.verdict))?;
        let w = r.witness.ok_or("no witness")?;
        let expect = parse_fiber(&format!("{a2}*u3"), &fd.field, 3).map_err(err)?;
        ensure(w.den.as_constant().is_some_and(|c| c.is_one()) && w.nums == vec![expect], format!("αΦ3 = {:?}", w.to_exprs()))?;
        let res = verify_orbital_map(&fd, &w).map_err(err)?;
        ensure(res.all_zero(), format!("residual {:?}", res.first_failure()))?;
    }
    Ok("a in {1, 3/2, -2/5}: αΦ3 = a²u3, residuals identically zero".into())
}

fn c3_double_heisenberg_lc() -> Check {
    let pair = lc_build(&lc_spec("double_heisenberg_lc.json")).map_err(err)?;
    let fd = &pair.frame;
    ensure((fd.n, fd.m) == (6, 4), "dimensions")?;
    let r = analyze_pair(fd, &AnalyzeOptions::default()).map_err(err)?;
    ensure(r.verdict == Verdict::OrbitalDiffeoFound, format!("verdict {:?}", r.verdict))?;
    let w = r.witness.ok_or("no witness")?;
    let block: Vec<_> = (4..6)
        .map(|k| subrig::fiber::u(&fd.field, 6, k).scale(&pair.alpha_sq[pair.factor_of[k]]))
        .collect();
    ensure(w.nums == block && w.den.as_constant().is_some_and(|c| c.is_one()), format!("witness {:?}", w.to_exprs()))?;
    ensure(r.affine, "affine flag")?;
    let fi = r.first_integral.ok_or("no first integral")?;
    ensure(fi.exists && fi.nontrivial && fi.n_distinct == 2, format!("first integral {fi:?}"))?;
    let approx = nilpotent_approximation(fd).map_err(err)?;
    let alpha: Vec<Rational> = fd.alpha_sq.iter().map(|a| a.eval(&fd.point, &[])).collect::<Result<_, _>>().map_err(err)?;
    match carnot_product_structure(&approx, &alpha).map_err(err)? {
        ProductOutcome::Product(p) if p.blocks == Some(vec![vec![1, 2, 5], vec![3, 4, 6]]) => Ok(format!(
            "witness {:?}, affine, N = 2 first integral, blocks {{1,2,5}} {{3,4,6}}",
            w.to_exprs()
        )),
        other => Err(format!("product structure {other:?}")),
    }
}

fn c4_dini() -> Check {
    let pair = lc_build(&lc_spec("dini_lc.json")).map_err(err)?;
    let fd = &pair.frame;
    ensure((fd.n, fd.m) == (2, 2) && !fd.field.radicals().is_empty(), "Dini frame shape")?;
    let d12 = build_p_and_q(fd).map_err(err)?;
    let d21 = build_p_and_q(&swap_pair(fd).map_err(err)?).map_err(err)?;
    ensure(d12.holds && d21.holds, format!("divisibility g1g2 {} g2g1 {}", d12.holds, d21.holds))?;
    let lemma = PairTerms::lemma_q(fd).map_err(err)?;
    ensure(d12.q.as_ref() == Some(&lemma) && d12.lemma_agrees == Some(true), "Q differs from the closed form")?;
    let fi = first_integral(fd).map_err(err)?;
    ensure(fi.exists && fi.lhs == fi.q, "logarithmic first-integral identity")?;
    Ok(format!("divisible both ways, Q = {}", subrig::fiber::fiber_to_expr(&lemma)))
}

fn c5_nilpotent_comparison() -> Check {
    let fd = frame_doc("perturbed_heisenberg.json");
    let approx = nilpotent_approximation(&fd).map_err(err)?;
    ensure(approx == heisenberg_product(1), format!("approximation {}", approx.describe()))?;
    for s in 1..=3 {
        ensure(hat_layer_check(&fd, &approx, s).map_err(err)?, format!("hat check fails at layer {s}"))?;
    }
    Ok("Heisenberg constants, hat checks hold for s = 1, 2, 3".into())
}

fn c6_jacobi_dimension() -> Check {
    let fd = heisenberg_product(1).to_frame(&[int(1), int(1)]).map_err(err)?;
    let sys = build_layers(&fd, 4, false).map_err(err)?;
    let generic = sys.jacobi_dimension(1, None).map_err(err)?;
    let special = sys.jacobi_dimension(1, Some(&[int(0), int(0), int(1)])).map_err(err)?;
    ensure(generic == 6 && special == 5, format!("dimensions {generic} / {special}"))?;
    let amp = sys.ampleness(None).map_err(err)?;
    ensure(amp.ample && amp.k0 == Some(2), format!("ampleness {amp:?}"))?;
    // the locus u1 = u2 = 0 is non-ample through every stored layer; points off it are ample
    for t in [1, -3, 7] {
        let a = sys.ampleness(Some(&[int(0), int(0), int(t)])).map_err(err)?;
        ensure(!a.ample, format!("(0,0,{t}) ample"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let pt: Vec<Rational> = (0..3).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=5))).collect();
        if pt[0] == int(0) && pt[1] == int(0) {
            continue;
        }
        let a = sys.ampleness(Some(&pt)).map_err(err)?;
        ensure(a.ample, format!("{pt:?} not ample"))?;
    }
    Ok("dim J = 6 generically, 5 at (0,0,1); k0 = 2; non-ample exactly on u1 = u2 = 0 among samples".into())
}

fn c7_weighted_degrees() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes: [&[usize]; 6] = [&[2, 1], &[2, 1, 2], &[3, 3], &[3, 2], &[4, 2], &[2, 1, 1]];
    let mut done = 0;
    let mut entries = 0;
    let mut attempt = 0;
    while done < 24 {
        attempt += 1;
        if attempt > 200 {
            return Err(format!("only {done} random algebras drawn"));
        }
        let dims = shapes[rng.gen_range(0..shapes.len())];
        let Some(c) = random_carnot(&mut rng, dims) else { continue };
        if c.n() > 7 {
            continue;
        }
        let alpha: Vec<Rational> = (0..c.m()).map(|_| rat(rng.gen_range(1..=9), rng.gen_range(1..=4))).collect();
        let fd = c.to_frame(&alpha).map_err(err)?;
        let s_max = if c.step() == 3 { 2 } else { 3 };
        let sys = build_layers(&fd, s_max, false).map_err(err)?;
        let v = sys.degree_violations(true);
        ensure(v.is_empty(), format!("{} with α {alpha:?}: {}", c.describe(), v.join("; ")))?;
        entries += sys.layers.iter().map(|l| l.a.iter().flatten().filter(|e| !e.is_zero()).count()).sum::<usize>();
        done += 1;
    }
    Ok(format!("{done} random algebras (n ≤ 7), {entries} nonzero a^s entries homogeneous of degree 2s − w_k + 1"))
}

fn c8_pencils() -> Check {
    let opts = DecomposeOptions::default();
    let a = skew(4, &[(1, 2, 1)]);
    let b = skew(4, &[(3, 4, 1)]);
    let p = SkewPencil::new(a.clone(), b.clone()).map_err(err)?;
    ensure(p.pfaffian().map_err(err)? == BinaryForm::lambda().mul(&BinaryForm::mu()), "Pf(J⊕0, 0⊕J)")?;
    let e = |k: usize| (0..4).map(|i| if i == k { int(1) } else { int(0) }).collect::<Vec<_>>();
    match decomposability(&[a, b], &opts).map_err(err)? {
        Decomposability::Decomposable { splitting, .. } if splitting[0] == vec![e(2), e(3)] && splitting[1] == vec![e(0), e(1)] => {}
        other => return Err(format!("λμ pencil: {other:?}")),
    }
    let jj = skew(4, &[(1, 2, 1), (3, 4, 1)]);
    let b2 = skew(4, &[(1, 3, 1), (2, 4, -1)]);
    let p2 = SkewPencil::new(jj.clone(), b2.clone()).map_err(err)?;
    ensure(p2.pfaffian().map_err(err)? == BinaryForm::new(vec![int(1), int(0), int(1)]), "Pf = λ² + μ²")?;
    ensure(decomposability(&[jj, b2], &opts).map_err(err)?.name() == "indecomposable", "λ² + μ² pencil")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..20 {
        let p = SkewPencil::new(random_skew(&mut rng, 5), random_skew(&mut rng, 5)).map_err(err)?;
        ensure(p.first_minimal_index() == Some(2), format!("sample {t}: minimal index {:?}", p.first_minimal_index()))?;
    }
    for t in 0..50 {
        let m = 2 * rng.gen_range(1..=3);
        let p = SkewPencil::new(random_skew(&mut rng, m), random_skew(&mut rng, m)).map_err(err)?;
        let pf = p.pfaffian().map_err(err)?;
        ensure(pf.mul(&pf) == p.det(), format!("sample {t} (m = {m}): pf² ≠ det"))?;
    }
    Ok("Pf = λμ split {e3,e4}/{e1,e2}; λ²+μ² indecomposable; 20 dim-5 samples index 2; 50 pf² = det".into())
}

fn corpus_frames() -> Vec<(String, subrig::frame::FrameData)> {
    let mut out = Vec::new();
    for name in ["heisenberg_pair.json", "heisenberg_conformal.json", "double_heisenberg.json"] {
        let Document::Carnot(c) = io::parse_document(&data(name)).unwrap() else { unreachable!() };
        let alpha = io::carnot_alpha(&c).unwrap().unwrap();
        out.push((name.to_string(), io::carnot_from_doc(&c).unwrap().to_frame(&alpha).unwrap()));
    }
    for name in ["heisenberg_fields.json", "perturbed_heisenberg.json"] {
        out.push((name.to_string(), frame_doc(name)));
    }
    for name in ["double_heisenberg_lc.json", "dini_lc.json", "step3_heisenberg_lc.json"] {
        out.push((name.to_string(), lc_build(&lc_spec(name)).unwrap().frame));
    }
    out
}

fn c9_round_trip() -> Check {
    let mut witnesses = 0;
    for (name, fd) in corpus_frames() {
        let d = build_p_and_q(&fd).map_err(err)?;
        if !d.holds {
            continue;
        }
        let r = analyze_pair(&fd, &AnalyzeOptions::default()).map_err(err)?;
        let mut sys = FundamentalSystem::new(&fd, false).map_err(err)?;
        while sys.layers.len() < r.layers_used.max(1) {
            sys.extend();
        }
        if let Solution::Found(w) = sys.solve().map_err(err)? {
            let res = verify_orbital_map(&fd, &w).map_err(err)?;
            ensure(res.all_zero(), format!("{name}: solve witness fails {:?}", res.first_failure()))?;
            witnesses += 1;
        }
        if let Some(w) = &r.witness {
            ensure(verify_orbital_map(&fd, w).map_err(err)?.all_zero(), format!("{name}: report witness"))?;
        }
    }
    for name in ["double_heisenberg_lc.json", "dini_lc.json", "step3_heisenberg_lc.json"] {
        let rep = lc_verify(&lc_build(&lc_spec(name)).map_err(err)?).map_err(err)?;
        ensure(rep.all_zero(), format!("{name}: block witness {:?}", rep.first_failure()))?;
        witnesses += 1;
    }
    let mut split = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pencils: Vec<Vec<Matrix<Rational>>> = ["pf_lambda_mu.json", "pf_definite.json", "pencil_dim5.json", "pencil_split_2_3.json"]
        .iter()
        .map(|n| {
            let Document::Pencil(p) = io::parse_document(&data(n)).unwrap() else { unreachable!() };
            io::pencil_forms(&p).unwrap()
        })
        .collect();
    for _ in 0..30 {
        // block-diagonal pencils hidden by a random change of basis
        let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let m = p + q;
        let g: Matrix<Rational> = loop {
            let g: Matrix<Rational> = (0..m).map(|_| (0..m).map(|_| int(rng.gen_range(-3..=3))).collect()).collect();
            if subrig::linalg::rank(&g) == m {
                break g;
            }
        };
        let k = rng.gen_range(1..=3);
        let forms = (0..k)
            .map(|_| {
                let mut f = vec![vec![int(0); m]; m];
                let (a, b) = (random_skew(&mut rng, p), random_skew(&mut rng, q));
                for i in 0..p {
                    for j in 0..p {
                        f[i][j] = a[i][j].clone();
                    }
                }
                for i in 0..q {
                    for j in 0..q {
                        f[p + i][p + j] = b[i][j].clone();
                    }
                }
                let gt = subrig::linalg::transpose(&g);
                let zero = int(0);
                subrig::linalg::mat_mul(&subrig::linalg::mat_mul(&gt, &f, &zero), &g, &zero)
            })
            .collect::<Vec<_>>();
        if subrig::linalg::rank(&forms.iter().map(|f| f.iter().flatten().cloned().collect()).collect::<Vec<Vec<Rational>>>()) == k {
            pencils.push(forms);
        }
    }
    for forms in &pencils {
        if let Decomposability::Decomposable { splitting, .. } = decomposability(forms, &DecomposeOptions::default()).map_err(err)? {
            ensure(splitting_block_diagonalizes(forms, &splitting), "splitting does not block-diagonalize")?;
            split += 1;
        }
    }
    Ok(format!("{witnesses} witnesses verify exactly; {split} splittings (of {} pencils) block-diagonalize", pencils.len()))
}

fn c10_negative_controls() -> Check {
    // corrupted witness on the double Heisenberg pair: αΦ6 = 5u6 instead of 4u6
    let pair = lc_build(&lc_spec("double_heisenberg_lc.json")).map_err(err)?;
    let fd = &pair.frame;
    let good = lc_verify(&pair).map_err(err)?.witness;
    let mut nums = good.nums.clone();
    nums[1] = parse_fiber("5*u6", &fd.field, 6).map_err(err)?;
    let bad = AlphaPhi { nums, den: good.den.clone() };
    let res = verify_orbital_map(fd, &bad).map_err(err)?;
    ensure(res.first_failure() == Some(("horizontal", 3)), format!("corrupted witness: {:?}", res.first_failure()))?;
    // corrupted α table
    let mut corrupted = pair.clone();
    corrupted.alpha_sq[1] = fd.field.constant(int(5));
    let rep = lc_verify(&corrupted).map_err(err)?;
    ensure(rep.first_failure() == Some(("horizontal", 3)), format!("corrupted α table: {:?}", rep.first_failure()))?;
    let obstruction = run_on(&Command::new(CommandKind::CarnotDecompose, vec![]), &[data("heisenberg_pair.json")]).report;
    let o = &obstruction["obstruction"];
    ensure(o["i"] == 1 && o["j"] == 2, format!("obstruction report {o}"))?;
    // byte-stable reports under a fixed seed
    let cases = [
        (CommandKind::Analyze, "heisenberg_pair.json"),
        (CommandKind::Analyze, "heisenberg_fields.json"),
        (CommandKind::CarnotDecompose, "heisenberg_pair.json"),
        (CommandKind::CarnotDecompose, "double_heisenberg.json"),
        (CommandKind::Nilpotentize, "perturbed_heisenberg.json"),
        (CommandKind::LcBuild, "dini_lc.json"),
        (CommandKind::LcVerify, "double_heisenberg_lc.json"),
        (CommandKind::Pencil, "pencil_split_2_3.json"),
        (CommandKind::Pencil, "pf_lambda_mu.json"),
    ];
    for (kind, name) in cases {
        let mut cmd = Command::new(kind, vec![]);
        cmd.seed = 11;
        let a = run_on(&cmd, &[data(name)]).render(false);
        let b = run_on(&cmd, &[data(name)]).render(false);
        ensure(a == b, format!("{} {name} differs between runs", kind.name()))?;
    }
    let built = run_on(&Command::new(CommandKind::LcBuild, vec![]), &[data("double_heisenberg_lc.json")]).render(false);
    let mut cmd = Command::new(CommandKind::Analyze, vec![]);
    cmd.seed = 11;
    ensure(run_on(&cmd, std::slice::from_ref(&built)).render(false) == run_on(&cmd, &[built]).render(false), "lc pair analysis")?;
    Ok("corrupted witness and α table fail at horizontal row 3; obstruction names (1,2); 10 reports byte-stable".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Heisenberg rigidity certificate", c1_heisenberg_rigidity),
        ("conformal Heisenberg", c2_conformal_heisenberg),
        ("double-Heisenberg Levi-Civita pair", c3_double_heisenberg_lc),
        ("Riemannian Dini pair", c4_dini),
        ("nilpotent comparison", c5_nilpotent_comparison),
        ("Jacobi dimension formula", c6_jacobi_dimension),
        ("weighted-degree property suite", c7_weighted_degrees),
        ("pencil suite", c8_pencils),
        ("round-trip soundness", c9_round_trip),
        ("negative-control determinism", c10_negative_controls),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} PASS [exact] {title} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [exact] {title} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
