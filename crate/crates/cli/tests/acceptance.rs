//! Acceptance runner: one PASS/FAIL line per criterion, run sequentially.
//!
//! `cargo test -p viscom-cli --test acceptance` exits non-zero if any line fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use viscom::aesthetics::{class_vector, measure, order_and_complexity, Measure, ObjectClass};
use viscom::kg::{label_classes, KgClass};
use viscom::ml::baselines::{baseline_predict, BaselineKind};
use viscom::ml::experiment::{run_experiment, run_importance, ExperimentConfig, Mode};
use viscom::ml::metrics::{accuracy, macro_f1, ConfusionMatrix};
use viscom::ml::rng;
use viscom::ml::stats::{bonferroni, t_test_one_sided};
use viscom::ml::synth::{generate, SynthConfig, CONSTANT, PLANTED};
use viscom::registry::{in_family, page_feature_names, session_feature_names, viscom_names};
use viscom::snapshot::RenderGeometry;
use viscom::vips::{segment_vips, BlockKind};
use viscom::webrel::FactSet;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn registry_arithmetic() -> Check {
    let v = viscom_names();
    let count = |names: &[String], p: &str| names.iter().filter(|n| in_family(n, p)).count();
    let parts = [
        count(&v, "viscom.aesthetics"),
        count(&v, "viscom.layout"),
        count(&v, "viscom.visual"),
        count(&v, "viscom.html"),
    ];
    ensure(parts == [70, 5, 8, 31], || format!("aesthetics/layout/visual/html = {parts:?}"))?;
    ensure(v.len() == 114, || format!("viscom {}", v.len()))?;
    let frac = format!("{:.1}", 100.0 * 70.0 / v.len() as f64);
    ensure(frac == "61.4", || format!("aesthetics fraction {frac}"))?;
    let n_facts = FactSet::default_facts().len();
    let session = session_feature_names(n_facts);
    let rest = [count(&session, "texcom"), count(&session, "webrel"), count(&session, "query")];
    ensure(rest == [32, 10, 11], || format!("texcom/webrel/query = {rest:?}"))?;
    ensure(page_feature_names(n_facts).len() == 156 && session.len() == 167, || "page/session totals".into())?;
    Ok(format!("viscom 114 (aesthetics {frac}%), texcom 32, webrel 10, query 11"))
}

fn study_labels() -> Vec<usize> {
    [(0, 43), (1, 41), (2, 28)].iter().flat_map(|&(c, n)| std::iter::repeat_n(c, n)).collect()
}

fn baselines() -> Check {
    let y = study_labels();
    let n = y.len();
    let mf = baseline_predict(BaselineKind::MostFrequent, &y, 3, n, &mut rng::stream(0, &[]));
    let cm = ConfusionMatrix::new(&y, &mf, 3);
    let (acc, f1) = (100.0 * accuracy(&cm), 100.0 * macro_f1(&cm));
    ensure((acc - 38.39).abs() < 0.005 && (f1 - 18.49).abs() < 0.005, || format!("most_frequent {acc:.3}/{f1:.3}"))?;
    ensure((acc - 38.4).abs() <= 0.1 && (f1 - 18.5).abs() <= 0.1, || "outside ±0.1 pp of 38.4 / 18.5".into())?;

    let empirical = |kind: BaselineKind, tag: u64| {
        (0..1000u64)
            .map(|s| {
                let p = baseline_predict(kind, &y, 3, n, &mut rng::stream(s, &[tag]));
                accuracy(&ConfusionMatrix::new(&y, &p, 3))
            })
            .sum::<f64>()
            / 1000.0
    };
    let sum_p2 = (43f64.powi(2) + 41f64.powi(2) + 28f64.powi(2)) / 112f64.powi(2);
    let strat = empirical(BaselineKind::Stratified, 1);
    let unif = empirical(BaselineKind::Uniform, 2);
    ensure((strat - sum_p2).abs() <= 0.02, || format!("stratified {strat:.4} vs {sum_p2:.4}"))?;
    ensure((unif - 1.0 / 3.0).abs() <= 0.02, || format!("uniform {unif:.4}"))?;
    Ok(format!(
        "most_frequent {acc:.2}% / F1 {f1:.2}%, stratified {:.2}% (Σp² {:.2}%), uniform {:.2}%",
        100.0 * strat,
        100.0 * sum_p2,
        100.0 * unif
    ))
}

fn bonferroni_thresholds() -> Check {
    let (a5, a8) = (bonferroni(0.05, 5), bonferroni(0.05, 8));
    ensure(a5 == 0.01 && a8 == 0.00625, || format!("{a5} {a8}"))?;
    Ok("n=5 → 0.01, n=8 → 0.00625".into())
}

fn run_props<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn kg_labeling() -> Check {
    run_props(500, prop::collection::vec(-1.0f64..1.0, 2..150), |kgs| {
        let z = oracles::z_scores(&kgs);
        if !z.iter().all(|z| z.is_finite()) {
            return Ok(());
        }
        let labels = label_classes(&kgs).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(labels.len(), kgs.len());
        for ((l, e), z) in labels.iter().zip(oracles::kg_classes(&kgs)).zip(&z) {
            if (z.abs() - 0.5).abs() > 1e-6 {
                prop_assert_eq!(l.class.index(), e);
            }
        }
        Ok(())
    })?;
    run_props(500, (prop::collection::vec(-1.0f64..1.0, 2..150), 1e-3f64..1e3, -10.0f64..10.0), |(kgs, a, b)| {
        if !oracles::z_scores(&kgs).iter().all(|z| z.is_finite() && (z.abs() - 0.5).abs() > 1e-6) {
            return Ok(());
        }
        let mapped: Vec<f64> = kgs.iter().map(|k| a * k + b).collect();
        let c1: Vec<KgClass> = label_classes(&kgs).unwrap().iter().map(|l| l.class).collect();
        let c2: Vec<KgClass> = label_classes(&mapped).unwrap().iter().map(|l| l.class).collect();
        prop_assert_eq!(c1, c2);
        Ok(())
    })?;
    // {−4, 4} once and {−1, 1} four times: deviation 2, so ±1 lands on z = ±0.5.
    run_props(200, (1usize..10, 1e-3f64..1e3, -10.0f64..10.0), |(reps, a, b)| {
        let mut raw = Vec::new();
        for _ in 0..reps {
            raw.extend([-4.0, 4.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
        }
        let kgs: Vec<f64> = raw.iter().map(|k| a * k + b).collect();
        for (l, r) in label_classes(&kgs).unwrap().iter().zip(&raw) {
            if r.abs() == 1.0 {
                prop_assert_eq!(l.class, KgClass::Moderate);
            }
        }
        Ok(())
    })?;
    Ok("totality, affine invariance and boundary cases hold".into())
}

#[derive(Deserialize)]
struct Expected {
    root_doc: u8,
    n_leaf: usize,
    n_nonleaf: usize,
    layers: usize,
    leaf_kinds: Vec<BlockKind>,
}

#[derive(Deserialize)]
struct VipsFixture {
    pdoc: u8,
    geometry: RenderGeometry,
    expected: Expected,
}

fn vips_fixtures() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/vips");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    paths.sort();
    ensure(paths.len() == 5, || format!("{} fixtures", paths.len()))?;
    for p in &paths {
        let f: VipsFixture = serde_json::from_str(&fs::read_to_string(p).unwrap()).map_err(|e| e.to_string())?;
        let t = segment_vips(&f.geometry, f.pdoc).map_err(|e| e.to_string())?;
        let e = &f.expected;
        let kinds: Vec<BlockKind> = t.leaves().iter().map(|b| b.kind).collect();
        let got = (t.root.doc, t.n_leaf(), t.n_nonleaf(), t.layers());
        ensure(got == (e.root_doc, e.n_leaf, e.n_nonleaf, e.layers) && kinds == e.leaf_kinds, || {
            format!("{}: got {got:?}", p.display())
        })?;
    }
    Ok("5/5 trees match".into())
}

fn aesthetics_fuzz() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let subsets = [None, Some(ObjectClass::Text), Some(ObjectClass::Image), Some(ObjectClass::Form), Some(ObjectClass::Other)];
    let mut worst_scale: f64 = 0.0;
    for i in 0..10_000 {
        let o = oracles::random_objects(&mut r);
        for c in subsets {
            let sub = c.map_or_else(|| o.clone(), |c| o.of_class(c));
            let v = class_vector(&sub);
            ensure(v.iter().all(|x| (0.0..=1.0).contains(x)), || format!("case {i}: {v:?}"))?;
        }
        let s = r.random_range(0.05..20.0);
        let big = oracles::scaled(&o, s);
        let values: Vec<f64> = Measure::ALL.iter().map(|&m| measure(m, &o)).collect();
        for (m, a) in Measure::ALL.iter().zip(&values) {
            worst_scale = worst_scale.max((a - measure(*m, &big)).abs());
        }
        let oc = order_and_complexity(&values).unwrap();
        ensure((oc - oracles::mean_rev(&values)).abs() < 1e-12, || format!("case {i}: order_and_complexity"))?;

        let mirrored = oracles::mirrored_objects(&mut r);
        for m in [Measure::Symmetry, Measure::Balance, Measure::Equilibrium] {
            let v = measure(m, &mirrored);
            ensure(v == 1.0, || format!("case {i}: mirrored {} = {v}", m.name()))?;
        }
        let d = measure(Measure::Density, &oracles::half_covered(&mut r));
        ensure(d == 1.0, || format!("case {i}: density at half coverage {d}"))?;
    }
    ensure(worst_scale <= 1e-9, || format!("scale drift {worst_scale:e}"))?;
    Ok(format!("10^4 sets; worst scale drift {worst_scale:.1e}"))
}

fn end_to_end() -> Check {
    let data = generate(&SynthConfig::default()).map_err(|e| e.to_string())?.dataset().unwrap();
    let mut cfg = ExperimentConfig::new(&["synthetic"], Mode::Full, 7);
    cfg.n_settings = Some(5);
    let r = run_experiment(&data, &cfg).map_err(|e| e.to_string())?;
    let s = &r.settings[0];
    let folds: Vec<_> = s.classifiers.iter().flat_map(|c| &c.folds).collect();
    let hits = folds.iter().filter(|f| f.selected.iter().any(|n| n == PLANTED)).count();
    ensure(r.alpha_bon == 0.01, || format!("alpha_bon {}", r.alpha_bon))?;
    ensure(hits * 100 >= folds.len() * 95, || format!("planted selected in {hits}/{}", folds.len()))?;
    ensure(s.accuracy_mean >= 0.8, || format!("accuracy {:.3}", s.accuracy_mean))?;
    ensure(s.significant, || format!("p {:e} not below {}", s.p_value, r.alpha_bon))?;

    let mut flagged = 0;
    for seed in 0..100u64 {
        let null = SynthConfig { planted: false, n_noise: 5, seed: 1000 + seed, ..SynthConfig::default() };
        let data = generate(&null).map_err(|e| e.to_string())?.dataset().unwrap();
        let mut cfg = ExperimentConfig::new(&["synthetic"], Mode::Full, seed);
        cfg.n_settings = Some(5);
        let r = run_experiment(&data, &cfg).map_err(|e| e.to_string())?;
        flagged += r.settings.iter().filter(|s| s.significant).count();
    }
    ensure(flagged <= 5, || format!("null runs flagged {flagged}/100"))?;
    Ok(format!(
        "planted selected {hits}/{}, accuracy {:.1}%, p {:.1e}; null flagged {flagged}/100",
        folds.len(),
        100.0 * s.accuracy_mean,
        s.p_value
    ))
}

fn pfi() -> Check {
    let synth = SynthConfig { constant: true, ..SynthConfig::default() };
    let data = generate(&synth).map_err(|e| e.to_string())?.dataset().unwrap();
    let cfg = ExperimentConfig::new(&["synthetic"], Mode::Full, 7);
    let rows = run_importance(&data, &cfg).map_err(|e| e.to_string())?;
    let top = rows.iter().max_by(|a, b| a.mean_delta.total_cmp(&b.mean_delta)).unwrap();
    ensure(top.feature_name == PLANTED && top.mean_delta > 0.0, || format!("top {} {}", top.feature_name, top.mean_delta))?;
    let c = rows.iter().find(|p| p.feature_name == CONSTANT).unwrap();
    ensure(c.mean_delta == 0.0, || format!("constant mean_delta {}", c.mean_delta))?;
    ensure(rows.iter().all(|p| p.repeats == 100), || "repeats".into())?;
    Ok(format!("planted mean_delta {:.3}, constant 0, repeats 100", top.mean_delta))
}

fn metric_oracles() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    for i in 0..1000 {
        let n = r.random_range(1..300);
        let t: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let p: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let cm = ConfusionMatrix::new(&t, &p, 3);
        let (acc, f1) = oracles::brute_metrics(&t, &p, 3);
        ensure((accuracy(&cm) - acc).abs() < 1e-15 && (macro_f1(&cm) - f1).abs() < 1e-15, || format!("case {i}"))?;
    }
    let mut worst: f64 = 0.0;
    for m in 3..=31 {
        for _ in 0..20 {
            let v: Vec<f64> = (0..m).map(|_| r.random_range(0.2..0.8)).collect();
            let t = t_test_one_sided(&v, r.random_range(0.3..0.6)).map_err(|e| e.to_string())?;
            worst = worst.max((t.p_value - oracles::t_sf_integral(t.t, m - 1)).abs());
        }
    }
    ensure(worst < 1e-6, || format!("t-test deviation {worst:e}"))?;
    Ok(format!("1000 confusion cases exact; t-test df 2–30 max |Δp| {worst:.1e}"))
}

fn viscom(dir: &Path, args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_viscom"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn determinism() -> Check {
    let fx = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let run = |workers: &str| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        let d = tmp.path();
        let cfg = s(&fx.join("configs/corpus_full.json"));
        viscom(d, &["--workers", workers, "extract", &s(&fx.join("corpus"))])?;
        viscom(d, &["--workers", workers, "aggregate", &s(&fx.join("sessions.jsonl")), &s(&d.join("features_pages.csv"))])?;
        viscom(d, &["--workers", workers, "--config", &cfg, "experiment", &s(&d.join("features.csv")), &s(&d.join("labels.csv"))])?;
        Ok(fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| !p.file_name().unwrap().to_string_lossy().starts_with("manifest."))
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect())
    };
    let (a, b, c) = (run("1")?, run("2")?, run("1")?);
    ensure(a == b && a == c, || "outputs differ".into())?;
    Ok(format!("{} files byte-identical over 3 runs (1, 2, 1 workers)", a.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("registry arithmetic", Duration::from_secs(1), registry_arithmetic),
        ("baseline reproduction", Duration::from_secs(5), baselines),
        ("bonferroni thresholds", Duration::from_secs(1), bonferroni_thresholds),
        ("kg labeling properties", Duration::from_secs(1), kg_labeling),
        ("vips fixture suite", Duration::from_secs(1), vips_fixtures),
        ("aesthetics invariants", Duration::from_secs(30), aesthetics_fuzz),
        ("end-to-end synthetic", Duration::from_secs(300), end_to_end),
        ("permutation importance", Duration::from_secs(60), pfi),
        ("metric oracles", Duration::from_secs(60), metric_oracles),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > budget => Err(format!("{msg}; over the {budget:?} budget")),
            o => o,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        failed += usize::from(outcome.is_err());
        println!("{tag}  {name:<24} {:>8.2}s  {msg}", took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
