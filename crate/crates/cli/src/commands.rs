use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::warn;
use viscom::aggregate::aggregate_sessions;
use viscom::embed::{EmbeddingProvider, HashedBagProvider, RemoteProvider, DEFAULT_DIM, DEFAULT_MAX_IN_FLIGHT};
use viscom::extract::{bundle_dirs, extract_all, Extractor};
use viscom::features::Scope;
use viscom::kg::{read_labels, write_labels};
use viscom::ml::experiment::{
    read_pfi_csv, run_experiment, run_importance, write_pfi_csv, write_report_csv, ExperimentConfig,
    ExperimentError, ExperimentReport,
};
use viscom::ml::synth::{generate, SynthConfig};
use viscom::ml::Dataset;
use viscom::registry;
use viscom::session::read_sessions;
use viscom::table::FeatureTable;
use viscom::webrel::FactSet;

use crate::manifest::Recorder;
use crate::render;
use crate::Global;

#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration (exit 2).
    User(String),
    /// Everything else (exit 1).
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn user(what: impl fmt::Display) -> CliError {
    CliError::User(what.to_string())
}

fn internal(what: impl fmt::Display) -> CliError {
    CliError::Internal(what.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| user(format!("{}: {e}", path.display())))
}

fn out_dir(g: &Global) -> Result<&Path> {
    fs::create_dir_all(&g.out_dir).map_err(|e| internal(format!("{}: {e}", g.out_dir.display())))?;
    Ok(&g.out_dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn finish(rec: Recorder, dir: &Path, outputs: &[PathBuf]) -> Result<()> {
    rec.finish(dir, outputs).map(|_| ()).map_err(internal)
}

fn facts(g: &Global) -> Result<FactSet> {
    match &g.facts {
        Some(p) => FactSet::load(p).map_err(|e| user(format!("{}: {e}", p.display()))),
        None => Ok(FactSet::default_facts()),
    }
}

fn provider(g: &Global) -> Arc<dyn EmbeddingProvider> {
    match &g.provider_url {
        Some(url) => Arc::new(RemoteProvider::new(url, DEFAULT_DIM, DEFAULT_MAX_IN_FLIGHT)),
        None => Arc::new(HashedBagProvider::default()),
    }
}

pub fn extract(g: &Global, root: &Path) -> Result<()> {
    let rec = Recorder::start("extract", None, &[root], None);
    let dirs = bundle_dirs(root).map_err(|e| user(format!("{}: {e}", root.display())))?;
    if dirs.is_empty() {
        return Err(user(format!("{}: no snapshot bundles", root.display())));
    }
    let facts = facts(g)?;
    let ex = Extractor::new(&facts, provider(g)).map_err(|e| internal(format!("embedding facts: {e}")))?;

    let results = extract_all(&ex, &dirs);
    let mut table = FeatureTable::new("snapshot_id", Scope::Page, ex.feature_names());
    for r in &results {
        for e in &r.errors {
            warn!("{}: {e}", r.id);
        }
        table.push(&r.id, &r.features).map_err(internal)?;
    }
    let dir = out_dir(g)?;
    let path = dir.join("features_pages.csv");
    table.write_csv(create(&path)?).map_err(internal)?;
    finish(rec, dir, &[path])?;
    if results.iter().all(|r| r.failed()) {
        return Err(internal("every page failed to extract"));
    }
    Ok(())
}

pub fn aggregate(g: &Global, sessions: &Path, pages: &Path) -> Result<()> {
    let rec = Recorder::start("aggregate", None, &[sessions, pages], None);
    let s = read_sessions(open(sessions)?).map_err(|e| user(format!("{}: {e}", sessions.display())))?;
    let t = FeatureTable::read_csv(open(pages)?).map_err(|e| user(format!("{}: {e}", pages.display())))?;
    let a = aggregate_sessions(&s, &t).map_err(user)?;

    let dir = out_dir(g)?;
    let features = dir.join("features.csv");
    let labels = dir.join("labels.csv");
    a.features.write_csv(create(&features)?).map_err(internal)?;
    write_labels(create(&labels)?, &a.labels).map_err(internal)?;
    finish(rec, dir, &[features, labels])
}

fn load_experiment(g: &Global, features: &Path, labels: &Path) -> Result<(Dataset, ExperimentConfig)> {
    let cfg_path = g.config.as_ref().ok_or_else(|| user("--config is required"))?;
    let text = fs::read_to_string(cfg_path).map_err(|e| user(format!("{}: {e}", cfg_path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(user)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let t = FeatureTable::read_csv(open(features)?).map_err(|e| user(format!("{}: {e}", features.display())))?;
    let l = read_labels(open(labels)?).map_err(|e| user(format!("{}: {e}", labels.display())))?;
    let data = Dataset::from_tables(&t, &l).map_err(user)?;
    Ok((data, cfg))
}

fn experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Config(c) => user(c),
        ExperimentError::Pipeline(p) => internal(p),
    }
}

pub fn experiment(g: &Global, features: &Path, labels: &Path) -> Result<()> {
    let (data, cfg) = load_experiment(g, features, labels)?;
    let rec = Recorder::start("experiment", g.config.as_deref(), &[features, labels], Some(cfg.seed));
    let report = run_experiment(&data, &cfg).map_err(experiment_error)?;

    let dir = out_dir(g)?;
    let json = dir.join("report.json");
    let csv = dir.join("report.csv");
    let mut w = create(&json)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(internal)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(internal)?;
    write_report_csv(create(&csv)?, &report).map_err(internal)?;
    finish(rec, dir, &[json, csv])
}

pub fn importance(g: &Global, features: &Path, labels: &Path) -> Result<()> {
    let (data, cfg) = load_experiment(g, features, labels)?;
    let rec = Recorder::start("importance", g.config.as_deref(), &[features, labels], Some(cfg.seed));
    let rows = run_importance(&data, &cfg).map_err(experiment_error)?;
    let dir = out_dir(g)?;
    let path = dir.join("pfi.csv");
    write_pfi_csv(create(&path)?, &rows).map_err(internal)?;
    finish(rec, dir, &[path])
}

pub fn report(g: &Global, report: &Path, pfi: Option<&Path>, plot: Option<&Path>) -> Result<()> {
    let mut inputs = vec![report];
    inputs.extend(pfi);
    let rec = Recorder::start("report", None, &inputs, None);
    let r: ExperimentReport =
        serde_json::from_reader(open(report)?).map_err(|e| user(format!("{}: {e}", report.display())))?;
    let rows = match pfi {
        Some(p) => Some(read_pfi_csv(open(p)?).map_err(|e| user(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let text = render::report_text(&r, rows.as_deref());
    print!("{text}");

    let dir = out_dir(g)?;
    let txt = dir.join("report.txt");
    fs::write(&txt, &text).map_err(internal)?;
    let mut outputs = vec![txt];
    if let (Some(path), Some(rows)) = (plot, &rows) {
        render::pfi_plot(rows).save(path).map_err(internal)?;
        outputs.push(path.to_path_buf());
    }
    finish(rec, dir, &outputs)
}

pub fn registry(g: &Global) -> Result<()> {
    let rec = Recorder::start("registry", None, &[], None);
    let n = facts(g)?.len();
    let dir = out_dir(g)?;
    let path = dir.join("registry.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &registry::describe(n)).map_err(internal)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(internal)?;
    finish(rec, dir, &[path])
}

pub fn synth(g: &Global, n: usize, n_noise: usize, noise_sd: f64, planted: bool, constant: bool) -> Result<()> {
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(user("--noise-sd must be finite and non-negative"));
    }
    let seed = g.seed.unwrap_or(0);
    let rec = Recorder::start("synth", None, &[], Some(seed));
    let cfg = SynthConfig { n, n_noise, noise_sd, planted, constant, seed };
    let data = generate(&cfg).map_err(user)?;
    let dir = out_dir(g)?;
    let features = dir.join("features.csv");
    let labels = dir.join("labels.csv");
    data.table.write_csv(create(&features)?).map_err(internal)?;
    write_labels(create(&labels)?, &data.labels).map_err(internal)?;
    finish(rec, dir, &[features, labels])
}
