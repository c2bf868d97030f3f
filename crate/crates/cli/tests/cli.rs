//! End-to-end runs of the `viscom` binary on the checked-in fixtures.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viscom"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn extract_corpus(dir: &Path) -> PathBuf {
    let corpus = fixtures().join("corpus");
    ok(dir, &["extract", path(&corpus)]);
    dir.join("features_pages.csv")
}

fn aggregate_corpus(dir: &Path) -> (PathBuf, PathBuf) {
    let pages = extract_corpus(dir);
    let sessions = fixtures().join("sessions.jsonl");
    ok(dir, &["aggregate", path(&sessions), path(&pages)]);
    (dir.join("features.csv"), dir.join("labels.csv"))
}

fn config(name: &str) -> String {
    fixtures().join("configs").join(name).to_str().unwrap().to_string()
}

#[test]
fn extract_writes_one_row_per_bundle() {
    let tmp = TempDir::new().unwrap();
    let (header, rows) = csv_rows(&extract_corpus(tmp.path()));
    assert_eq!(header.len(), 2 + 156);
    assert_eq!(header[0], "snapshot_id");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], "p01_wiki_lightning");
    for r in &rows {
        assert_eq!(r[1], "page");
        assert!(r[2..].iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite)), "{}", r[0]);
    }
}

#[test]
fn unreadable_bundle_becomes_a_missing_row() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("corpus");
    for name in ["p01_wiki_lightning", "p02_news_storm"] {
        let dst = root.join(name);
        fs::create_dir_all(&dst).unwrap();
        for f in ["page.html", "screenshot.png", "geometry.json", "meta.json"] {
            fs::copy(fixtures().join("corpus").join(name).join(f), dst.join(f)).unwrap();
        }
    }
    fs::write(root.join("p02_news_storm/screenshot.png"), b"not a png").unwrap();
    let out = tmp.path().join("out");
    ok(&out, &["extract", path(&root)]);
    let (_, rows) = csv_rows(&out.join("features_pages.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[0][2..].iter().all(|v| !v.is_empty()));
    assert!(rows[1][2..].iter().all(String::is_empty));
}

#[test]
fn empty_root_is_a_user_error() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("empty");
    fs::create_dir(&root).unwrap();
    assert_eq!(code(&run(tmp.path(), &["extract", path(&root)])), 2);
}

#[test]
fn all_pages_failing_is_an_internal_error() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("broken");
    fs::create_dir_all(root.join("p1")).unwrap();
    fs::write(root.join("p1/page.html"), "<p>x</p>").unwrap();
    let o = run(tmp.path(), &["extract", path(&root)]);
    assert_eq!(code(&o), 1);
    let (_, rows) = csv_rows(&tmp.path().join("features_pages.csv"));
    assert_eq!(rows.len(), 1);
}

#[test]
fn aggregate_averages_content_pages() {
    let tmp = TempDir::new().unwrap();
    let (features, labels) = aggregate_corpus(tmp.path());
    let (header, rows) = csv_rows(&features);
    assert_eq!(header.len(), 2 + 167);
    assert_eq!(header[0], "user_id");
    assert_eq!(rows.len(), 36);

    let (_, pages) = csv_rows(&tmp.path().join("features_pages.csv"));
    let page: BTreeMap<&str, &Vec<String>> = pages.iter().map(|r| (r[0].as_str(), r)).collect();
    let sessions: Vec<Value> = fs::read_to_string(fixtures().join("sessions.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for (s, row) in sessions.iter().zip(&rows) {
        assert_eq!(s["user_id"], row[0].as_str());
        let visited: Vec<&str> = s["events"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["page_type"] == "content")
            .map(|e| e["snapshot_id"].as_str().unwrap())
            .collect();
        for col in 2..2 + 156 {
            if visited.is_empty() {
                assert_eq!(row[col], "", "{} {}", row[0], header[col]);
                continue;
            }
            let m = visited.iter().map(|v| page[v][col].parse::<f64>().unwrap()).sum::<f64>() / visited.len() as f64;
            let got: f64 = row[col].parse().unwrap();
            assert!((got - m).abs() <= 1e-9 * m.abs().max(1.0), "{} {}: {got} vs {m}", row[0], header[col]);
        }
    }

    let (lh, lrows) = csv_rows(&labels);
    assert_eq!(lh, ["user_id", "kg", "z", "class"]);
    assert_eq!(lrows.len(), 36);
    let classes: std::collections::BTreeSet<&str> = lrows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(classes.len(), 3);
}

#[test]
fn missing_snapshot_is_a_user_error() {
    let tmp = TempDir::new().unwrap();
    let pages = extract_corpus(tmp.path());
    let sessions = tmp.path().join("sessions.jsonl");
    fs::write(
        &sessions,
        concat!(
            r#"{"user_id":"a","events":[{"timestamp":0,"url":"https://x.org/","snapshot_id":"nope","page_type":"content"}],"test":{"pre_correct":1,"post_correct":3,"n_items":10}}"#,
            "\n",
            r#"{"user_id":"b","events":[],"test":{"pre_correct":2,"post_correct":2,"n_items":10}}"#,
            "\n"
        ),
    )
    .unwrap();
    assert_eq!(code(&run(tmp.path(), &["aggregate", path(&sessions), path(&pages)])), 2);
}

#[test]
fn subsets_design_has_eight_settings() {
    let tmp = TempDir::new().unwrap();
    let (f, l) = aggregate_corpus(tmp.path());
    ok(tmp.path(), &["--config", &config("corpus_subsets.json"), "experiment", path(&f), path(&l)]);
    let (_, rows) = csv_rows(&tmp.path().join("report.csv"));
    assert_eq!(rows.iter().filter(|r| r[0] == "baseline").count(), 3);
    let settings: Vec<(&str, &str)> =
        rows.iter().filter(|r| r[0] == "subsets").map(|r| (r[1].as_str(), r[2].as_str())).collect();
    assert_eq!(settings.len(), 8);
    assert_eq!(settings[0], ("viscom.html", "grid:1/5/10/15/20"));
    assert_eq!(settings[7], ("viscom.aesthetics", "none"));
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["alpha_bon"], 0.05 / 8.0);
}

#[test]
fn configured_setting_count_drives_bonferroni() {
    let tmp = TempDir::new().unwrap();
    let (f, l) = aggregate_corpus(tmp.path());
    ok(tmp.path(), &["--config", &config("corpus_full.json"), "experiment", path(&f), path(&l)]);
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_settings"], 5);
    assert_eq!(report["alpha_bon"], 0.01);
    assert_eq!(report["settings"].as_array().unwrap().len(), 4);
    assert_eq!(report["seed"], 1);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let (f, l) = aggregate_corpus(tmp.path());
    ok(tmp.path(), &["--seed", "99", "--config", &config("corpus_subsets.json"), "experiment", path(&f), path(&l)]);
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 99);
    assert_eq!(report["config"]["seed"], 99);
}

#[test]
fn bad_configs_are_user_errors() {
    let tmp = TempDir::new().unwrap();
    let (f, l) = aggregate_corpus(tmp.path());
    let cases = [
        r#"{"feature_sets": ["viscom"], "mode": "full", "colour": 1}"#,
        r#"{"feature_sets": ["nothing"], "mode": "full"}"#,
        r#"{"feature_sets": ["viscom"], "mode": "sideways"}"#,
        r#"{"feature_sets": ["viscom"], "mode": "full", "alpha": 2}"#,
        r#"{"feature_sets": ["viscom"], "mode": "full", "k_outer": 40}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = tmp.path().join(format!("bad{i}.json"));
        fs::write(&cfg, text).unwrap();
        let o = run(tmp.path(), &["--config", path(&cfg), "experiment", path(&f), path(&l)]);
        assert_eq!(code(&o), 2, "{text}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(tmp.path(), &["experiment", path(&f), path(&l)])), 2);
}

#[test]
fn report_matches_frozen_text() {
    let tmp = TempDir::new().unwrap();
    let reports = fixtures().join("reports");
    let report = reports.join("report.json");
    let pfi = reports.join("pfi.csv");

    let o = ok(tmp.path(), &["report", path(&report)]);
    let expected = fs::read_to_string(reports.join("report.txt")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expected);
    assert_eq!(fs::read_to_string(tmp.path().join("report.txt")).unwrap(), expected);

    let plot = tmp.path().join("pfi.png");
    let o = ok(tmp.path(), &["report", path(&report), "--pfi", path(&pfi), "--plot", path(&plot)]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), fs::read_to_string(reports.join("report_pfi.txt")).unwrap());
    let img = image::open(&plot).unwrap();
    assert_eq!(img.width(), 480);
}

#[test]
fn manifest_hashes_match_outputs() {
    let tmp = TempDir::new().unwrap();
    aggregate_corpus(tmp.path());
    for (cmd, outputs) in [("extract", vec!["features_pages.csv"]), ("aggregate", vec!["features.csv", "labels.csv"])] {
        let m: Value =
            serde_json::from_slice(&fs::read(tmp.path().join(format!("manifest.{cmd}.json"))).unwrap()).unwrap();
        assert_eq!(m["command"], cmd);
        let hashes = m["outputs"].as_object().unwrap();
        assert_eq!(hashes.len(), outputs.len());
        for name in outputs {
            let digest = hex::encode(Sha256::digest(fs::read(tmp.path().join(name)).unwrap()));
            assert_eq!(hashes[name], digest.as_str());
        }
    }
}

fn pipeline_outputs(dir: &Path, workers: &str) -> BTreeMap<String, Vec<u8>> {
    let corpus = fixtures().join("corpus");
    let sessions = fixtures().join("sessions.jsonl");
    let pages = dir.join("features_pages.csv");
    let (f, l) = (dir.join("features.csv"), dir.join("labels.csv"));
    ok(dir, &["--workers", workers, "extract", path(&corpus)]);
    ok(dir, &["--workers", workers, "aggregate", path(&sessions), path(&pages)]);
    ok(dir, &["--workers", workers, "--config", &config("corpus_full.json"), "experiment", path(&f), path(&l)]);
    ok(dir, &["--workers", workers, "--config", &config("corpus_full.json"), "importance", path(&f), path(&l)]);
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.file_name().unwrap().to_string_lossy().starts_with("manifest."))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn outputs_are_identical_across_runs_and_worker_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let one = pipeline_outputs(a.path(), "1");
    let two = pipeline_outputs(b.path(), "2");
    assert_eq!(one.keys().collect::<Vec<_>>().len(), 6);
    assert_eq!(one, two);
}

#[test]
fn registry_and_synth() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["registry"]);
    let reg: Value = serde_json::from_slice(&fs::read(tmp.path().join("registry.json")).unwrap()).unwrap();
    assert!(reg.as_array().is_some_and(|a| !a.is_empty()));

    ok(tmp.path(), &["--seed", "3", "synth", "--constant"]);
    let (header, rows) = csv_rows(&tmp.path().join("features.csv"));
    assert_eq!(rows.len(), 112);
    assert_eq!(header.last().unwrap(), "synthetic.planted");
    assert!(header.contains(&"synthetic.constant".to_string()));
    assert_eq!(code(&run(tmp.path(), &["synth", "--noise-sd", "-1"])), 2);
}
