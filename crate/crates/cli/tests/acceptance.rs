//! Acceptance suite: one PASS/FAIL line per criterion. All comparisons are
//! exact (tolerance 0).

use std::time::Instant;

use parendo::cartan::{cartan_test, CartanCase};
use parendo::endo::{analyze, Fingerprint, TypeLabel};
use parendo::generators::{generate, germ_complex_riemannian, germ_type1, hh_negative_control, GenerateOptions};
use parendo::geometry::{curvature, curvature_of};
use parendo::holonomy::commutant;
use parendo::jet::Jet;
use parendo::pipeline::{classify_germ, generate_classified, ClassificationReport, PipelineConfig};
use parendo::scalar::Q;
use parendo::tables::{run_table, Table};
use parendo::verify::{curvature_2d_oracle, ricci_double_contraction};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const ATTEMPTS: usize = 5;
const CORPUS_SEEDS: u64 = 3;

type Outcome = Result<String, String>;

fn label_dim(label: TypeLabel) -> usize {
    match label {
        TypeLabel::One => 3,
        TypeLabel::OneC => 6,
        TypeLabel::TwoC | TypeLabel::ThreeC => 8,
        _ => 4,
    }
}

/// Fingerprints written out independently of the library's lookup table.
fn table_fingerprint(label: TypeLabel) -> Fingerprint {
    let (dim_s, dim_s_plus, sig_s, sig_s_plus) = match label {
        TypeLabel::One => (1, 1, (1, 0), (1, 0)),
        TypeLabel::OneC => (2, 2, (1, 1), (1, 1)),
        TypeLabel::Two => (2, 1, (2, 0), (1, 0)),
        TypeLabel::TwoPrime => (2, 1, (1, 1), (1, 0)),
        TypeLabel::TwoC => (4, 2, (2, 2), (1, 1)),
        TypeLabel::Three => (4, 1, (4, 0), (1, 0)),
        TypeLabel::ThreePrime => (4, 1, (2, 2), (1, 0)),
        TypeLabel::ThreeC => (8, 2, (4, 4), (1, 1)),
        TypeLabel::HplusH => (8, 4, (4, 4), (1, 3)),
    };
    Fingerprint { dim_s, dim_s_plus, sig_s, sig_s_plus }
}

struct Corpus {
    /// Per label: the accepted run at the smallest dimension with its seed log.
    minimal: Vec<(TypeLabel, ClassificationReport, Vec<u64>)>,
    /// Every generated germ report (several seeds per label).
    all: Vec<(TypeLabel, u64, ClassificationReport)>,
}

fn build_corpus() -> Result<Corpus, String> {
    let cfg = PipelineConfig::default();
    let mut minimal = Vec::new();
    let mut all = Vec::new();
    for label in TypeLabel::HOLONOMY {
        let opts = GenerateOptions { dim: Some(label_dim(label)), ..Default::default() };
        let (_, rep, log) = generate_classified(label, &opts, &cfg, ATTEMPTS).map_err(|e| e.to_string())?;
        minimal.push((label, rep, log.iter().map(|a| a.seed).collect()));
        for seed in 0..CORPUS_SEEDS {
            let gen = generate(label, &GenerateOptions { seed, ..Default::default() }).map_err(|e| e.to_string())?;
            let rep = classify_germ(&gen.germ, &PipelineConfig { seed, ..cfg.clone() })
                .map_err(|e| format!("{label} seed {seed}: {e}"))?;
            all.push((label, seed, rep));
        }
    }
    Ok(Corpus { minimal, all })
}

fn criterion1(c: &Corpus) -> Outcome {
    let mut parts = Vec::new();
    for (label, rep, seeds) in &c.minimal {
        if rep.label != Some(*label) || rep.d != label_dim(*label) {
            return Err(format!("{label}: got {:?} at d={}", rep.label, rep.d));
        }
        parts.push(format!("{label}@d={} seeds {:?}", rep.d, seeds));
    }
    // a generic complex surface (real d = 4) is of type (2ℂ), not (1ℂ)
    let g = germ_complex_riemannian(2, 0, 1, 4).map_err(|e| e.to_string())?;
    let r = classify_germ(&g, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    if r.label != Some(TypeLabel::TwoC) {
        return Err(format!("complex d=4 germ classified {:?}, expected (2ℂ)", r.label));
    }
    Ok(format!("{}; complex d=4 → (2ℂ)", parts.join(", ")))
}

fn criterion2() -> Outcome {
    let cases: [(TypeLabel, usize, usize); 5] = [
        (TypeLabel::One, 4, 6),
        (TypeLabel::Two, 4, 4),
        (TypeLabel::TwoPrime, 4, 4),
        (TypeLabel::OneC, 6, 2 * 3),
        (TypeLabel::TwoC, 8, 2 * 4),
    ];
    let mut parts = Vec::new();
    for (label, d, want) in cases {
        let opts = GenerateOptions { dim: Some(d), ..Default::default() };
        let (_, rep, log) =
            generate_classified(label, &opts, &PipelineConfig::default(), ATTEMPTS).map_err(|e| e.to_string())?;
        if rep.holonomy.dim != want {
            return Err(format!("{label} d={d}: dim 𝔥 = {} ≠ {want}", rep.holonomy.dim));
        }
        parts.push(format!("{label} d={d}: {want} (seed {})", log.last().unwrap().seed));
    }
    Ok(parts.join(", "))
}

fn criterion3(c: &Corpus) -> Outcome {
    for (label, rep, _) in &c.minimal {
        let fp = rep.fingerprint.ok_or(format!("{label}: no fingerprint"))?;
        if fp != table_fingerprint(*label) || fp != label.fingerprint() {
            return Err(format!("{label}: {fp} ≠ {}", table_fingerprint(*label)));
        }
    }
    Ok("8/8 fingerprints match".into())
}

fn criterion4() -> Outcome {
    let mut n = 0;
    for t in [Table::Relations, Table::NormalForms, Table::Tensors] {
        let r = run_table(t, 0).map_err(|e| e.to_string())?;
        if let Some(f) = r.failures().next() {
            return Err(format!("{t:?}: {} {:?} {}", f.label, f.signature, f.item));
        }
        n += r.checks.len();
    }
    Ok(format!("{n} table checks, 0 failures"))
}

fn criterion5() -> Outcome {
    let cases = [
        (1, CartanCase::Real { epsilon: -1, p: 1 }),
        (1, CartanCase::Real { epsilon: 1, p: 1 }),
        (2, CartanCase::Real { epsilon: -1, p: 2 }),
        (2, CartanCase::Real { epsilon: 1, p: 2 }),
        (1, CartanCase::Complex),
    ];
    let mut parts = Vec::new();
    for (delta, case) in cases {
        let t = Instant::now();
        let r = cartan_test(delta, case, 2).map_err(|e| e.to_string())?;
        let want: Vec<usize> = (1..=4 * delta).map(|k| if k <= 2 * delta + 1 { k - 1 } else { 0 }).collect();
        let n = 2 * delta + 2;
        let c3 = n * (n - 1) * (n - 2) / 6;
        let sum: usize = r.characters.iter().enumerate().map(|(i, s)| (i + 1) * s).sum();
        if r.characters != want || r.dim_v != 2 * c3 || sum != r.dim_v || !r.relations.all_hold {
            return Err(format!("δ={delta} {case:?}: s={:?} dim V={} Σks={sum}", r.characters, r.dim_v));
        }
        let tag = match case {
            CartanCase::Real { epsilon, .. } => format!("ε={epsilon:+}"),
            CartanCase::Complex => "ℂ".into(),
        };
        parts.push(format!("δ={delta} {tag}: s={:?}, dim V={} ({:.1}s)", r.characters, r.dim_v, t.elapsed().as_secs_f64()));
    }
    Ok(parts.join("; "))
}

fn check_named(rep: &ClassificationReport, name: &str) -> Result<(), String> {
    let v = rep.verification.as_ref().ok_or("no verification")?;
    let c = v.get(name).ok_or(format!("missing check {name}"))?;
    if !c.passed {
        return Err(format!("{name}: {}", c.witness.clone().unwrap_or_default()));
    }
    Ok(())
}

fn criterion6(c: &Corpus) -> Outcome {
    let mut complex = 0;
    for (label, seed, rep) in &c.all {
        let ctx = |e: String| format!("{label} seed {seed}: {e}");
        for name in ["ricci_selfadjoint", "selfadjoint_commutes_with_r", "ricci_skewadjoint", "ricci_skew_commutator"] {
            check_named(rep, name).map_err(ctx)?;
        }
        if matches!(label, TypeLabel::Three | TypeLabel::ThreePrime | TypeLabel::ThreeC) {
            check_named(rep, "ricci_flat").map_err(ctx)?;
            check_named(rep, "ricci_flat_from_anticommuting").map_err(ctx)?;
        }
        if *label == TypeLabel::OneC {
            let v = rep.verification.as_ref().unwrap().get("complex_ricci").unwrap();
            if v.skipped || !v.passed || v.instances == 0 {
                return Err(ctx("complex Ricci oracle did not run or failed".into()));
            }
            complex += 1;
        }
    }
    Ok(format!("{} germs; ric = 0 on (3),(3′),(3ℂ); holomorphic oracle on {complex} (1ℂ) germs", c.all.len()))
}

fn criterion7(c: &Corpus) -> Outcome {
    let mut pairs = 0;
    for (label, seed, rep) in &c.all {
        for name in ["pseudocommutation", "commutator_image_in_e0", "commute_when_e0_trivial"] {
            check_named(rep, name).map_err(|e| format!("{label} seed {seed}: {e}"))?;
        }
        pairs += rep.verification.as_ref().unwrap().get("commutator_image_in_e0").unwrap().instances;
    }
    Ok(format!("{pairs} (U,V) pairs over {} germs", c.all.len()))
}

fn criterion8(c: &Corpus) -> Outcome {
    let (h, g0) = hh_negative_control();
    let e = commutant(&h, &g0);
    let a = analyze(&e).map_err(|e| e.to_string())?;
    if e.dim() != 8 || a.label != Some(TypeLabel::HplusH) {
        return Err(format!("ℍ⊕ℍ control: dim {} label {:?}", e.dim(), a.label));
    }
    if let Some((l, s, _)) = c.all.iter().find(|(_, _, r)| r.label == Some(TypeLabel::HplusH)) {
        return Err(format!("germ {l} seed {s} produced HplusH"));
    }
    Ok(format!("control dim 8 → HplusH; 0/{} germs gave HplusH", c.all.len()))
}

fn criterion9(c: &Corpus) -> Outcome {
    if let Some((l, s, _)) = c.all.iter().find(|(_, _, r)| !r.radical_oracle_agrees) {
        return Err(format!("radical oracles disagree on {l} seed {s}"));
    }
    let mut runner = TestRunner::new(Config { cases: 48, failure_persistence: None, ..Config::default() });
    let coeffs = (proptest::collection::vec(-3i64..=3, 10), 1i64..=3, prop_oneof![Just(-1i64), Just(1), Just(2)]);
    runner
        .run(&coeffs, |(v, e0, g0)| {
            let k = 3;
            let exps: [[u32; 2]; 5] = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];
            let mk = |c0: i64, c: &[i64]| {
                exps.iter().zip(c).fold(Jet::constant(2, k, Q::int(c0)), |a, (ex, &ci)| a.add(&Jet::monomial(2, k, ex, Q::int(ci))))
            };
            let (e, g) = (mk(e0, &v[..5]), mk(g0, &v[5..]));
            let z = Jet::zero(2, k);
            let cur = curvature_of(&vec![vec![e.clone(), z.clone()], vec![z, g.clone()]], 0).unwrap();
            prop_assert_eq!(cur.r(0, 1), &curvature_2d_oracle(&e, &g));
            Ok(())
        })
        .map_err(|e| format!("2D oracle: {e}"))?;
    let mut n = 0;
    for d in 2..=4 {
        for q in 0..=d / 2 {
            for seed in 0..6 {
                let germ = germ_type1(d - q, q, seed, 2, 2).map_err(|e| e.to_string())?;
                if ricci_double_contraction(&germ.g) != curvature(&germ, 0).map_err(|e| e.to_string())?.ricci() {
                    return Err(format!("double contraction differs at d={d} q={q} seed={seed}"));
                }
                n += 1;
            }
        }
    }
    Ok(format!("radical oracles agree on {} commutants; 48 diagonal surfaces; {n} random germs d ≤ 4", c.all.len()))
}

fn main() {
    let start = Instant::now();
    let corpus = build_corpus();
    let with = |f: fn(&Corpus) -> Outcome| match &corpus {
        Ok(c) => f(c),
        Err(e) => Err(format!("corpus: {e}")),
    };
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "eight-type realization", with(criterion1)),
        (2, "generic holonomy dimensions", criterion2()),
        (3, "fingerprint table", with(criterion3)),
        (4, "table cross-check", criterion4()),
        (5, "Cartan test", criterion5()),
        (6, "Ricci suite", with(criterion6)),
        (7, "quasi-commutation suite", with(criterion7)),
        (8, "negative control", with(criterion8)),
        (9, "oracle equivalence", with(criterion9)),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n} [{name}]: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} [{name}]: FAIL ({why})");
            }
        }
    }
    println!("acceptance: {}/{} passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
