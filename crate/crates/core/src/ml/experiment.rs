//! Experiment designs, nested cross-validation runs and their reports.
//!
//! A run evaluates a list of settings (feature sets plus a selection rule)
//! with every configured classifier family on shared stratified outer folds.
//! Per setting, the classifier mean accuracies are compared against the best
//! baseline with a one-sided t-test at the Bonferroni-corrected level.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::baselines::{baseline_predict, BaselineKind};
use super::classifiers::Family;
use super::cv::{complement, stratified_kfold, CvError};
use super::data::{Dataset, N_CLASSES};
use super::metrics::{accuracy, macro_f1, ConfusionMatrix};
use super::pfi::{permutation_importance, PfiResult};
use super::pipeline::{fit_outer, score, PipelineError, SelectionPlan};
use super::rng::{self, tag};
use super::stats::{bonferroni, mean, pop_std, t_test_one_sided, StatsError};
use crate::registry::in_family;

pub const DEFAULT_GAMMAS: [usize; 5] = [1, 5, 10, 15, 20];
pub const COMBINATION_GAMMA: usize = 10;
const VISCOM_SUBSETS: [&str; 4] = ["viscom.html", "viscom.visual", "viscom.layout", "viscom.aesthetics"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One setting per feature set, selected by the γ policy.
    Full,
    /// Each feature set with and without selection.
    Subsets,
    /// All feature sets together, exactly γ = 10 from each.
    Combination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaPolicy {
    Grid(Vec<usize>),
    Fixed(usize),
    None,
}

impl Default for GammaPolicy {
    fn default() -> Self {
        GammaPolicy::Grid(DEFAULT_GAMMAS.to_vec())
    }
}

fn default_k_outer() -> usize {
    10
}
fn default_k_inner() -> usize {
    3
}
fn default_repeats() -> usize {
    super::pfi::DEFAULT_REPEATS
}
fn default_alpha() -> f64 {
    0.05
}
fn default_classifiers() -> Vec<Family> {
    Family::ALL.to_vec()
}
fn default_pfi_classifier() -> Family {
    Family::Knn
}

/// `experiment.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry prefixes such as `viscom.layout` or `texcom`.
    pub feature_sets: Vec<String>,
    pub mode: Mode,
    #[serde(default = "default_k_outer")]
    pub k_outer: usize,
    #[serde(default = "default_k_inner")]
    pub k_inner: usize,
    #[serde(default)]
    pub gamma_policy: GammaPolicy,
    /// Permutations per feature and fold for importance runs.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Settings counted by the Bonferroni correction; defaults to the number run.
    #[serde(default)]
    pub n_settings: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<Family>,
    #[serde(default = "default_pfi_classifier")]
    pub pfi_classifier: Family,
}

impl ExperimentConfig {
    pub fn new(feature_sets: &[&str], mode: Mode, seed: u64) -> Self {
        ExperimentConfig {
            feature_sets: feature_sets.iter().map(|s| s.to_string()).collect(),
            mode,
            k_outer: default_k_outer(),
            k_inner: default_k_inner(),
            gamma_policy: GammaPolicy::default(),
            repeats: default_repeats(),
            alpha: default_alpha(),
            n_settings: None,
            seed,
            classifiers: default_classifiers(),
            pfi_classifier: default_pfi_classifier(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("no feature sets given")]
    NoFeatureSets,
    #[error("feature set `{0}` matches no column")]
    UnknownFeatureSet(String),
    #[error("no classifiers given")]
    NoClassifiers,
    #[error("need at least 2 classifiers for the significance test")]
    TooFewClassifiers,
    #[error("γ values must be at least 1")]
    BadGamma,
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("alpha must be in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("inner k = {k} exceeds the smallest outer training split ({n})")]
    BadInnerK { k: usize, n: usize },
    #[error(transparent)]
    Cv(#[from] CvError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// One row of the design: which columns, and how they are selected.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub name: String,
    pub feature_sets: Vec<String>,
    pub selection: String,
    pub plan: SelectionPlan,
}

fn gamma_options(policy: &GammaPolicy, sizes: &[usize]) -> Vec<Option<Vec<usize>>> {
    let per_group = |g: usize| sizes.iter().map(|&m| g.min(m)).collect::<Vec<_>>();
    match policy {
        GammaPolicy::None => vec![None],
        GammaPolicy::Fixed(g) => vec![Some(per_group(*g))],
        GammaPolicy::Grid(gs) => {
            let mut out: Vec<Option<Vec<usize>>> = Vec::new();
            for &g in gs {
                let o = Some(per_group(g));
                if !out.contains(&o) {
                    out.push(o);
                }
            }
            out
        }
    }
}

fn policy_label(p: &GammaPolicy) -> String {
    match p {
        GammaPolicy::None => "none".into(),
        GammaPolicy::Fixed(g) => format!("fixed:{g}"),
        GammaPolicy::Grid(gs) => {
            let v: Vec<String> = gs.iter().map(usize::to_string).collect();
            format!("grid:{}", v.join("/"))
        }
    }
}

/// Column indices addressed by a registry prefix.
pub fn columns_of(names: &[String], prefix: &str) -> Vec<usize> {
    names
        .iter()
        .enumerate()
        .filter(|(_, n)| in_family(n, prefix))
        .map(|(i, _)| i)
        .collect()
}

/// Expands and checks the configured design against the dataset's columns.
pub fn build_settings(cfg: &ExperimentConfig, names: &[String]) -> Result<Vec<Setting>, ConfigError> {
    if cfg.feature_sets.is_empty() {
        return Err(ConfigError::NoFeatureSets);
    }
    if let GammaPolicy::Grid(g) = &cfg.gamma_policy {
        if g.is_empty() || g.contains(&0) {
            return Err(ConfigError::BadGamma);
        }
    }
    if cfg.gamma_policy == GammaPolicy::Fixed(0) {
        return Err(ConfigError::BadGamma);
    }
    let sets: Vec<String> = if cfg.mode == Mode::Subsets && cfg.feature_sets == ["viscom"] {
        VISCOM_SUBSETS.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.feature_sets.clone()
    };
    let mut groups = Vec::with_capacity(sets.len());
    for s in &sets {
        let cols = columns_of(names, s);
        if cols.is_empty() {
            return Err(ConfigError::UnknownFeatureSet(s.clone()));
        }
        groups.push(cols);
    }

    let single = |s: &String, cols: &Vec<usize>, policy: &GammaPolicy| Setting {
        name: s.clone(),
        feature_sets: vec![s.clone()],
        selection: policy_label(policy),
        plan: SelectionPlan {
            groups: vec![cols.clone()],
            options: gamma_options(policy, &[cols.len()]),
        },
    };
    Ok(match cfg.mode {
        Mode::Full => sets.iter().zip(&groups).map(|(s, c)| single(s, c, &cfg.gamma_policy)).collect(),
        Mode::Subsets => {
            let with = if cfg.gamma_policy == GammaPolicy::None {
                GammaPolicy::default()
            } else {
                cfg.gamma_policy.clone()
            };
            sets.iter()
                .zip(&groups)
                .flat_map(|(s, c)| [single(s, c, &with), single(s, c, &GammaPolicy::None)])
                .collect()
        }
        Mode::Combination => {
            let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
            let forced = GammaPolicy::Fixed(COMBINATION_GAMMA);
            vec![Setting {
                name: sets.join("+"),
                feature_sets: sets.clone(),
                selection: format!("per-set:{COMBINATION_GAMMA}"),
                plan: SelectionPlan {
                    groups,
                    options: gamma_options(&forced, &sizes),
                },
            }]
        }
    })
}

/// Checks everything that can be checked before fitting.
pub fn validate(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<Setting>, ConfigError> {
    if cfg.classifiers.is_empty() {
        return Err(ConfigError::NoClassifiers);
    }
    if cfg.classifiers.len() < 2 {
        return Err(ConfigError::TooFewClassifiers);
    }
    if cfg.repeats == 0 {
        return Err(ConfigError::Zero("repeats"));
    }
    if cfg.n_settings == Some(0) {
        return Err(ConfigError::Zero("n_settings"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(ConfigError::BadAlpha(cfg.alpha));
    }
    let folds = stratified_kfold(&data.y, cfg.k_outer, 0)?;
    let smallest_train = data.n() - folds.iter().map(Vec::len).max().unwrap_or(0);
    if cfg.k_inner < 2 || cfg.k_inner > smallest_train {
        return Err(ConfigError::BadInnerK { k: cfg.k_inner, n: smallest_train });
    }
    build_settings(cfg, &data.feature_names)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub params: super::classifiers::ClassifierSpec,
    /// Chosen γ per feature set; absent without selection.
    pub gammas: Option<Vec<usize>>,
    /// Selected columns; empty without selection.
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: Family,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    pub folds: Vec<FoldResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    pub name: String,
    pub feature_sets: Vec<String>,
    pub selection: String,
    pub n_features: usize,
    /// Means and population deviations over the classifier means.
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    /// `None` when the classifier means have zero variance.
    pub t: Option<f64>,
    pub p_value: f64,
    pub significant: bool,
    pub classifiers: Vec<ClassifierResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub baseline: BaselineKind,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub n_sessions: usize,
    pub class_counts: [usize; N_CLASSES],
    pub n_settings: usize,
    pub alpha_bon: f64,
    pub best_baseline: BaselineKind,
    pub baseline_accuracy: f64,
    pub baselines: Vec<BaselineResult>,
    pub settings: Vec<SettingResult>,
}

fn outer_folds(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<Vec<usize>>, CvError> {
    stratified_kfold(&data.y, cfg.k_outer, rng::derive_seed(cfg.seed, &[tag::OUTER_SPLIT]))
}

fn kind_index(k: BaselineKind) -> u64 {
    BaselineKind::ALL.iter().position(|&b| b == k).unwrap_or(0) as u64
}

/// Baselines on the outer folds: mean and population deviation across folds.
pub fn evaluate_baselines(data: &Dataset, folds: &[Vec<usize>], seed: u64) -> Vec<BaselineResult> {
    BaselineKind::ALL
        .iter()
        .map(|&kind| {
            let (accs, f1s): (Vec<f64>, Vec<f64>) = folds
                .iter()
                .enumerate()
                .map(|(f, test)| {
                    let train_y: Vec<usize> = complement(data.n(), test).iter().map(|&i| data.y[i]).collect();
                    let y: Vec<usize> = test.iter().map(|&i| data.y[i]).collect();
                    let mut r = rng::stream(seed, &[tag::BASELINE, kind_index(kind), f as u64]);
                    let pred = baseline_predict(kind, &train_y, N_CLASSES, y.len(), &mut r);
                    let cm = ConfusionMatrix::new(&y, &pred, N_CLASSES);
                    (accuracy(&cm), macro_f1(&cm))
                })
                .unzip();
            BaselineResult {
                baseline: kind,
                accuracy_mean: mean(&accs),
                accuracy_std: pop_std(&accs),
                macro_f1_mean: mean(&f1s),
                macro_f1_std: pop_std(&f1s),
            }
        })
        .collect()
}

/// One-sided comparison of the classifier means against the baseline.
///
/// Equal classifier means leave the t statistic undefined; the outcome is
/// then decided by the sign of the difference alone.
pub fn significance(means: &[f64], baseline: f64) -> (Option<f64>, f64) {
    match t_test_one_sided(means, baseline) {
        Ok(t) => (Some(t.t), t.p_value),
        Err(StatsError::DegenerateSample) => (None, if mean(means) > baseline { 0.0 } else { 1.0 }),
        Err(_) => (None, 1.0),
    }
}

pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let settings = validate(cfg, data)?;
    let folds = outer_folds(cfg, data).map_err(ConfigError::from)?;
    let splits: Vec<(Dataset, Dataset)> = folds
        .iter()
        .map(|t| (data.rows(&complement(data.n(), t)), data.rows(t)))
        .collect();

    let (n_clf, n_folds) = (cfg.classifiers.len(), folds.len());
    let tasks: Vec<(usize, usize, usize)> = (0..settings.len())
        .flat_map(|s| (0..n_clf).flat_map(move |c| (0..n_folds).map(move |f| (s, c, f))))
        .collect();
    let results: Vec<Result<FoldResult, PipelineError>> = tasks
        .par_iter()
        .map(|&(s, c, f)| {
            let family = cfg.classifiers[c];
            let setting = &settings[s];
            let (train, test) = &splits[f];
            let master = rng::derive_seed(cfg.seed, &[s as u64]);
            let fit = fit_outer(family, &family.grid(), train, test, &setting.plan, cfg.k_inner, master, f)?;
            let (acc, f1) = score(fit.model.as_ref(), &fit.test_x, &test.y);
            let selected = if fit.choice.gammas.is_some() {
                fit.cols.iter().map(|&j| data.feature_names[j].clone()).collect()
            } else {
                Vec::new()
            };
            Ok(FoldResult {
                fold: f,
                accuracy: acc,
                macro_f1: f1,
                params: fit.choice.spec,
                gammas: fit.choice.gammas,
                selected,
            })
        })
        .collect();
    let mut results = results.into_iter();

    let baselines = evaluate_baselines(data, &folds, cfg.seed);
    let best = baselines
        .iter()
        .fold(&baselines[0], |b, r| if r.accuracy_mean > b.accuracy_mean { r } else { b });
    let n_settings = cfg.n_settings.unwrap_or(settings.len());
    let alpha_bon = bonferroni(cfg.alpha, n_settings);

    let mut out = Vec::with_capacity(settings.len());
    for setting in &settings {
        let mut per_clf = Vec::with_capacity(cfg.classifiers.len());
        for &family in &cfg.classifiers {
            let fr: Vec<FoldResult> = results.by_ref().take(folds.len()).collect::<Result<_, _>>()?;
            let accs: Vec<f64> = fr.iter().map(|r| r.accuracy).collect();
            let f1s: Vec<f64> = fr.iter().map(|r| r.macro_f1).collect();
            per_clf.push(ClassifierResult {
                classifier: family,
                accuracy_mean: mean(&accs),
                accuracy_std: pop_std(&accs),
                macro_f1_mean: mean(&f1s),
                macro_f1_std: pop_std(&f1s),
                folds: fr,
            });
        }
        let accs: Vec<f64> = per_clf.iter().map(|c| c.accuracy_mean).collect();
        let f1s: Vec<f64> = per_clf.iter().map(|c| c.macro_f1_mean).collect();
        let (t, p) = significance(&accs, best.accuracy_mean);
        out.push(SettingResult {
            name: setting.name.clone(),
            feature_sets: setting.feature_sets.clone(),
            selection: setting.selection.clone(),
            n_features: setting.plan.groups.iter().map(Vec::len).sum(),
            accuracy_mean: mean(&accs),
            accuracy_std: pop_std(&accs),
            macro_f1_mean: mean(&f1s),
            macro_f1_std: pop_std(&f1s),
            t,
            p_value: p,
            significant: p < alpha_bon,
            classifiers: per_clf,
        });
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        seed: cfg.seed,
        n_sessions: data.n(),
        class_counts: data.class_counts(),
        n_settings,
        alpha_bon,
        best_baseline: best.baseline,
        baseline_accuracy: best.accuracy_mean,
        baselines,
        settings: out,
    })
}

/// Permutation importance for the first configured setting with the PFI
/// classifier. Deltas are pooled over folds and repeats; in a fold where a
/// column was not selected its deltas are exactly 0.
pub fn run_importance(data: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<PfiResult>, ExperimentError> {
    let settings = validate(cfg, data)?;
    let setting = &settings[0];
    let folds = outer_folds(cfg, data).map_err(ConfigError::from)?;
    let family = cfg.pfi_classifier;
    let master = rng::derive_seed(cfg.seed, &[0]);

    type FoldPfi = (Vec<usize>, f64, Vec<Vec<f64>>);
    let per_fold: Vec<Result<FoldPfi, PipelineError>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, t)| {
            let train = data.rows(&complement(data.n(), t));
            let test = data.rows(t);
            let fit = fit_outer(family, &family.grid(), &train, &test, &setting.plan, cfg.k_inner, master, f)?;
            let (base, deltas) = permutation_importance(
                fit.model.as_ref(),
                &fit.test_x,
                &test.y,
                cfg.repeats,
                cfg.seed,
                &[tag::PFI, f as u64],
            );
            Ok((fit.cols, base, deltas))
        })
        .collect();
    let per_fold: Vec<FoldPfi> = per_fold.into_iter().collect::<Result<_, _>>()?;

    let accuracy_ori = mean(&per_fold.iter().map(|p| p.1).collect::<Vec<_>>());
    let mut cols: Vec<usize> = setting.plan.groups.concat();
    cols.sort_unstable();
    cols.dedup();
    Ok(cols
        .iter()
        .map(|&j| {
            let mut pooled = Vec::with_capacity(per_fold.len() * cfg.repeats);
            let mut selection_count = 0;
            for (sel, _, deltas) in &per_fold {
                match sel.iter().position(|&c| c == j) {
                    Some(k) => {
                        selection_count += 1;
                        pooled.extend(&deltas[k]);
                    }
                    None => pooled.extend(std::iter::repeat_n(0.0, cfg.repeats)),
                }
            }
            PfiResult {
                feature_name: data.feature_names[j].clone(),
                accuracy_ori,
                mean_delta: mean(&pooled),
                std_delta: pop_std(&pooled),
                selection_count,
                repeats: cfg.repeats,
            }
        })
        .collect())
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Table-shaped summary: baselines first, then one row per setting.
pub fn write_report_csv<W: Write>(w: W, r: &ExperimentReport) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "group",
        "setting",
        "selection",
        "n_features",
        "macro_f1_mean",
        "macro_f1_std",
        "accuracy_mean",
        "accuracy_std",
        "p_value",
        "significant",
    ])?;
    for b in &r.baselines {
        out.write_record([
            "baseline".to_string(),
            b.baseline.name().to_string(),
            String::new(),
            String::new(),
            f(b.macro_f1_mean),
            f(b.macro_f1_std),
            f(b.accuracy_mean),
            f(b.accuracy_std),
            String::new(),
            String::new(),
        ])?;
    }
    let group = match r.config.mode {
        Mode::Full => "full",
        Mode::Subsets => "subsets",
        Mode::Combination => "combination",
    };
    for s in &r.settings {
        out.write_record([
            group.to_string(),
            s.name.clone(),
            s.selection.clone(),
            s.n_features.to_string(),
            f(s.macro_f1_mean),
            f(s.macro_f1_std),
            f(s.accuracy_mean),
            f(s.accuracy_std),
            f(s.p_value),
            s.significant.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_pfi_csv<W: Write>(w: W, rows: &[PfiResult]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["feature", "selection_count", "mean_delta", "std_delta", "accuracy_ori", "repeats"])?;
    for p in rows {
        out.write_record([
            p.feature_name.clone(),
            p.selection_count.to_string(),
            f(p.mean_delta),
            f(p.std_delta),
            f(p.accuracy_ori),
            p.repeats.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum PfiCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

pub fn read_pfi_csv<R: std::io::Read>(r: R) -> Result<Vec<PfiResult>, PfiCsvError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| PfiCsvError::Malformed { row: i + 1, message };
        if rec.len() != 6 {
            return Err(bad(format!("expected 6 fields, got {}", rec.len())));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("`{s}` is not a count")));
        out.push(PfiResult {
            feature_name: rec[0].to_string(),
            selection_count: int(&rec[1])?,
            mean_delta: real(&rec[2])?,
            std_delta: real(&rec[3])?,
            accuracy_ori: real(&rec[4])?,
            repeats: int(&rec[5])?,
        });
    }
    Ok(out)
}
