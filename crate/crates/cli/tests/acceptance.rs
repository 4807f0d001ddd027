//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.
//! Exits non-zero when a criterion fails that is not listed in `KNOWN_RED`.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use nrw::catalog::{self, Domain};
use nrw::extension::{build_extension, compute_s};
use nrw::multilinear::{pairs, CurvatureTensor, KForm, SkewMap};
use nrw::nomizu::{double_extension, presentation_basis, structure_checks, KostantSetup};
use nrw::sample::{random_extension, Source};
use nrw::InfinitesimalModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Criteria that cannot pass as written; see the README "Known discrepancies".
const KNOWN_RED: &[u32] = &[2];

const CHECK_TOL: f64 = 1e-8;
const BUILD_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Rand(ChaCha8Rng);

impl Source for Rand {
    fn uniform(&mut self) -> f64 {
        self.0.gen()
    }
}

fn params(v: &[(&str, f64)]) -> BTreeMap<String, f64> {
    v.iter().map(|(k, x)| (k.to_string(), *x)).collect()
}

fn t_err(golden: &Option<KForm>, built: &KForm) -> f64 {
    match golden {
        Some(g) => (built - g).norm_inf(),
        None => f64::INFINITY,
    }
}

fn r_err(golden: &Option<CurvatureTensor>, built: &CurvatureTensor) -> f64 {
    match golden {
        Some(g) => built.distance(g).unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    }
}

fn nrw(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nrw")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (code, stdout) = nrw(&["catalog", "run", "qh7", "--param", "lambda=1"]);
    let elapsed = start.elapsed().as_secs_f64();
    let inst = catalog::instantiate("qh7", &params(&[("lambda", 1.0)])).unwrap();
    let te = t_err(&inst.golden.torsion, &inst.model.torsion);
    let re = r_err(&inst.golden.curvature, &inst.model.curvature);
    let max_res = inst.model.verify(BUILD_TOL).max_residual();
    let json: Value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    let pass = code == 0 && json["pass"] == true && te < 1e-12 && re < 1e-12 && max_res < 1e-12 && elapsed < 1.0;
    outcome(pass, format!("T err {te:.1e}, R err {re:.1e}, max residual {max_res:.1e}, exit {code}, {elapsed:.2}s"))
}

fn criterion_2() -> Outcome {
    let mut worst_t = 0.0f64;
    let mut worst_r = 0.0f64;
    let mut worst_t0 = 0.0f64;
    let mut worst_time = 0.0f64;
    let mut t_mismatch = 0;
    let mut presentation_ok = true;
    for alpha in [0.5, 1.0, 2.0] {
        for lambda in [1.0, 2.0] {
            let start = Instant::now();
            let inst = catalog::instantiate("su2xsu2", &params(&[("alpha", alpha), ("lambda", lambda)])).unwrap();
            let pres = presentation_basis(&inst.data, BUILD_TOL).unwrap();
            worst_time = worst_time.max(start.elapsed().as_secs_f64());
            worst_t = worst_t.max(t_err(&inst.golden.torsion, &inst.model.torsion));
            worst_r = worst_r.max(r_err(&inst.golden.curvature, &inst.model.curvature));
            worst_t0 = worst_t0.max(t_err(&inst.golden.base_torsion, &inst.data.base.torsion));
            t_mismatch += inst.diff.iter().filter(|d| d.tensor == "T").count();
            let coeff = if lambda == 1.0 { String::new() } else { format!("{lambda}*") };
            for i in 1..=6 {
                let want =
                    if i <= 3 { format!("e{i} = m{i} + {coeff}f{i}") } else { format!("e{i} = m{i}") };
                let got = (0..pres.len()).map(|j| pres.describe(j)).find(|s| s.starts_with(&format!("e{i} ")));
                presentation_ok &= got.as_deref() == Some(want.as_str());
            }
            presentation_ok &= pres.report.pass();
        }
    }
    let pass = worst_t < 1e-10 && worst_r < 1e-10 && worst_t0 < 1e-10 && presentation_ok && worst_time < 1.0;
    outcome(
        pass,
        format!(
            "T err {worst_t:.1e} ({t_mismatch} mixed-term sign mismatches over 6 points), R err {worst_r:.1e}, \
             T0 (with c) err {worst_t0:.1e}, e_i = m_i + lambda f_i: {presentation_ok}, {worst_time:.2}s/point"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut draws = Vec::new();
    for _ in 0..3 {
        let sign = |r: &mut ChaCha8Rng| if r.gen::<bool>() { 1.0 } else { -1.0 };
        let lambda = sign(&mut rng) * rng.gen_range(0.2..3.0);
        let mu = sign(&mut rng) * rng.gen_range(0.2..3.0);
        let inst = catalog::instantiate("s2r2", &params(&[("lambda", lambda), ("mu", mu)])).unwrap();
        worst = worst.max(t_err(&inst.golden.torsion, &inst.model.torsion));
        worst = worst.max(r_err(&inst.golden.curvature, &inst.model.curvature));
        draws.push(format!("({lambda:.3},{mu:.3})"));
    }
    outcome(worst < 1e-12, format!("max err {worst:.1e} over draws {}", draws.join(" ")))
}

fn random_params(entry: &catalog::CatalogEntry, rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for p in &entry.params {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let v = match p.domain {
            Domain::Positive => rng.gen_range(0.3..3.0),
            Domain::NonZero => sign * rng.gen_range(0.3..3.0),
            Domain::Real => rng.gen_range(-2.0..2.0),
            Domain::IntegerAtLeast(_) => p.default,
        };
        out.insert(p.name.to_string(), v);
    }
    out
}

/// Random catalog bases, shared by criteria 4-6.
fn random_bases(count: usize, seed: u64) -> Vec<(String, InfinitesimalModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = catalog::list();
    let mut out = Vec::new();
    while out.len() < count {
        let entry = &entries[rng.gen_range(0..entries.len())];
        let p = random_params(entry, &mut rng);
        if let Ok(inst) = catalog::instantiate(entry.name, &p) {
            out.push((entry.name.to_string(), inst.data.base));
        }
    }
    out
}

struct RandomRun {
    count: usize,
    failures: Vec<String>,
    worst_model: f64,
    worst_jacobi: f64,
    worst_structure: f64,
    worst_hom: f64,
    kostant_errors: Vec<String>,
    seconds: f64,
}

fn random_instances() -> RandomRun {
    let start = Instant::now();
    let bases = random_bases(20, 4);
    let mut rng = Rand(ChaCha8Rng::seed_from_u64(44));
    let mut run = RandomRun {
        count: 0,
        failures: Vec::new(),
        worst_model: 0.0,
        worst_jacobi: 0.0,
        worst_structure: 0.0,
        worst_hom: 0.0,
        kostant_errors: Vec::new(),
        seconds: 0.0,
    };
    for i in 0..200 {
        let (name, base) = &bases[i % bases.len()];
        let data = match random_extension(base, &mut rng) {
            Ok(d) => d,
            Err(e) => {
                run.failures.push(format!("#{i} {name}: sampling: {e}"));
                continue;
            }
        };
        run.count += 1;
        match build_extension(&data, BUILD_TOL) {
            Ok(m) => {
                let rep = m.verify(CHECK_TOL);
                run.worst_model = run.worst_model.max(rep.max_residual());
                if !rep.pass() {
                    run.failures.push(format!("#{i} {name}: {:?}", rep.failures()));
                }
            }
            Err(e) => run.failures.push(format!("#{i} {name}: build: {e}")),
        }
        match double_extension(&data, BUILD_TOL) {
            Ok(g) => {
                run.worst_jacobi = run.worst_jacobi.max(g.jacobi_residual());
                let rep = structure_checks(&g, CHECK_TOL);
                run.worst_structure = run.worst_structure.max(rep.max_residual());
            }
            Err(e) => run.failures.push(format!("#{i} {name}: double extension: {e}")),
        }
        match KostantSetup::new(&data, BUILD_TOL) {
            Ok(setup) => run.worst_hom = run.worst_hom.max(setup.homomorphism_residual()),
            Err(e) => run.kostant_errors.push(format!("#{i} {name}: {e}")),
        }
    }
    run.seconds = start.elapsed().as_secs_f64();
    run
}

fn criterion_4(run: &RandomRun) -> Outcome {
    let pass = run.count >= 200 && run.failures.is_empty() && run.worst_model < CHECK_TOL && run.worst_jacobi < CHECK_TOL
        && run.seconds < 60.0;
    let mut detail = format!(
        "{} instances, max model residual {:.1e}, max Jacobi {:.1e}, {:.1}s",
        run.count, run.worst_model, run.worst_jacobi, run.seconds
    );
    if let Some(f) = run.failures.first() {
        detail += &format!("; first failure {f}");
    }
    outcome(pass, detail)
}

fn criterion_5(run: &RandomRun) -> Outcome {
    let mut worst_structure = run.worst_structure;
    let mut worst_hom = run.worst_hom;
    let mut errors = run.kostant_errors.clone();
    for entry in catalog::list() {
        let inst = catalog::instantiate(entry.name, &BTreeMap::new()).unwrap();
        let g = double_extension(&inst.data, BUILD_TOL).unwrap();
        worst_structure = worst_structure.max(structure_checks(&g, CHECK_TOL).max_residual());
        match KostantSetup::new(&inst.data, BUILD_TOL) {
            Ok(setup) => worst_hom = worst_hom.max(setup.homomorphism_residual()),
            Err(e) => errors.push(format!("{}: {e}", entry.name)),
        }
    }
    let pass = worst_structure < CHECK_TOL && worst_hom < CHECK_TOL && errors.is_empty();
    let mut detail = format!("max structure residual {worst_structure:.1e}, max homomorphism residual {worst_hom:.1e}");
    if let Some(e) = errors.first() {
        detail += &format!("; {} setup errors, first {e}", errors.len());
    }
    outcome(pass, detail)
}

fn corrupt(model: &InfinitesimalModel, rng: &mut ChaCha8Rng) -> InfinitesimalModel {
    let n = model.dim();
    let mut idx: Vec<usize> = Vec::new();
    while idx.len() < 3 {
        let i = rng.gen_range(0..n);
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    idx.sort();
    let delta = rng.gen_range(1e-3..1.0);
    let mut t = model.torsion.clone();
    let mut r = model.curvature.clone();
    if rng.gen::<bool>() {
        t += &KForm::from_terms(n, 3, [(idx.clone(), delta)]).unwrap();
    } else {
        let ps = pairs(n);
        let two = |(a, b): (usize, usize)| KForm::from_terms(n, 2, [(vec![a, b], 1.0)]).unwrap();
        let x = two(ps[rng.gen_range(0..ps.len())]);
        let y = two(ps[rng.gen_range(0..ps.len())]);
        r = r.add(&CurvatureTensor::sym_pair(&x, &y, delta).unwrap()).unwrap();
    }
    InfinitesimalModel::new(model.frame.clone(), t, r).unwrap()
}

fn criterion_6() -> Outcome {
    let bases = random_bases(10, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut src = Rand(ChaCha8Rng::seed_from_u64(666));
    let (mut agree, mut valid, mut total) = (0, 0, 0);
    let mut worst_rel = 0.0f64;
    for i in 0..100 {
        let (_, base) = &bases[i % bases.len()];
        let data = random_extension(base, &mut src).unwrap();
        let mut model = build_extension(&data, BUILD_TOL).unwrap();
        if i % 2 == 1 {
            model = corrupt(&model, &mut rng);
        }
        let cyclic = model.bianchi1_cyclic();
        let four = model.bianchi1_4form();
        total += 1;
        valid += usize::from(cyclic < CHECK_TOL);
        if (cyclic < CHECK_TOL) == (four < CHECK_TOL) {
            agree += 1;
        }
        if cyclic.max(four) > CHECK_TOL {
            worst_rel = worst_rel.max((cyclic - four).abs() / cyclic.max(four));
        }
    }
    outcome(
        agree == total,
        format!("{agree}/{total} verdicts agree ({valid} satisfy B.1), max relative residual gap {worst_rel:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for n in 2..=8 {
        let basis: Vec<KForm> =
            pairs(n).into_iter().map(|(i, j)| KForm::from_terms(n, 2, [(vec![i, j], 1.0)]).unwrap()).collect();
        for a in &basis {
            let am = SkewMap::from_two_form(a).unwrap();
            for b in &basis {
                let bm = SkewMap::from_two_form(b).unwrap();
                let via_matrix = am.commutator(&bm).unwrap().to_two_form();
                worst = worst.max((&via_matrix - &a.barwedge(b).unwrap()).norm_inf());
                count += 1;
            }
        }
    }
    outcome(worst < 1e-13, format!("{count} basis pairs for dim 2..=8, max residual {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let inst = catalog::instantiate("qh7", &BTreeMap::new()).unwrap();
    let model = &inst.model;
    let n = model.dim();
    let (mut flipped, mut total) = (0, 0);
    for (idx, c) in model.torsion.terms() {
        total += 1;
        let mut t = model.torsion.clone();
        t += &KForm::from_terms(n, 3, [(idx.clone(), 1e-3 * c.signum())]).unwrap();
        let mutated = InfinitesimalModel::new(model.frame.clone(), t, model.curvature.clone()).unwrap();
        if !mutated.verify(BUILD_TOL).pass() {
            flipped += 1;
        }
    }
    outcome(total > 0 && flipped == total, format!("{flipped}/{total} single-coefficient mutations detected"))
}

fn criterion_9() -> Outcome {
    let (code1, out1) = nrw(&["catalog", "run", "aloff-wallach"]);
    let (code2, out2) = nrw(&["catalog", "run", "aloff-wallach"]);
    let (code3, text) = nrw(&["catalog", "run", "aloff-wallach", "--text"]);
    let json: Value = serde_json::from_str(&out1).unwrap_or(Value::Null);
    let diff = json["suspected_transcription_differences"].as_array().cloned().unwrap_or_default();
    let located = diff.iter().all(|d| d["location"].as_str().is_some_and(|s| !s.is_empty()));
    let model_pass = json["model"]["pass"] == true;
    let pass = code1 == 0
        && code2 == 0
        && code3 == 0
        && out1 == out2
        && model_pass
        && !diff.is_empty()
        && located
        && text.contains("suspected transcription differences");
    outcome(
        pass,
        format!(
            "exit {code1}, model checks pass: {model_pass}, {} located differences, deterministic: {}",
            diff.len(),
            out1 == out2
        ),
    )
}

fn criterion_10() -> Outcome {
    let base = |name: &str| catalog::instantiate(name, &BTreeMap::new()).unwrap().data.base;
    let dims = [
        compute_s(&base("qh7"), None).len(),
        compute_s(&base("su2xsu2"), None).len(),
        compute_s(&base("s2r2"), None).len(),
    ];
    outcome(dims == [6, 6, 2], format!("flat R^4 {}, su2xsu2 {}, S2xR2 {}", dims[0], dims[1], dims[2]))
}

fn main() {
    // Respect `cargo test -- --list` and filters that exclude this target.
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let run = random_instances();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "qh7 golden reconstruction", criterion_1()),
        (2, "su2xsu2 golden reconstruction", criterion_2()),
        (3, "s2r2 golden reconstruction", criterion_3()),
        (4, "random extensions are models", criterion_4(&run)),
        (5, "double extension structure", criterion_5(&run)),
        (6, "B.1 route agreement", criterion_6()),
        (7, "barwedge equals commutator", criterion_7()),
        (8, "qh7 mutation sensitivity", criterion_8()),
        (9, "aloff-wallach adjudication", criterion_9()),
        (10, "compute_s dimensions", criterion_10()),
    ];
    let mut unexpected = 0;
    for (n, name, o) in &results {
        let tag = match (o.pass, KNOWN_RED.contains(n)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {n:>2} {tag:<12} {name}: {}", o.detail);
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected failures", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
