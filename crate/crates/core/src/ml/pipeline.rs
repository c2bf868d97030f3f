//! Per-split preprocessing, feature selection and nested grid search.
//!
//! Everything here is fitted on a training split only: imputation means,
//! standardization statistics and the correlation ranking used for
//! selection. The held-out rows are transformed with those statistics.

use super::classifiers::{Classifier, ClassifierSpec, Family, Predictor, TrainError};
use super::cv::{complement, stratified_kfold, CvError};
use super::data::{Dataset, N_CLASSES};
use super::metrics::{accuracy, macro_f1, ConfusionMatrix};
use super::rng::{self, tag};
use super::stats::pearson;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Cv(#[from] CvError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// Training means per column; an all-missing column imputes to 0.
pub fn column_means(x: &[Vec<f64>]) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    (0..d)
        .map(|j| {
            let (s, c) = x
                .iter()
                .map(|r| r[j])
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if c == 0 {
                0.0
            } else {
                s / c as f64
            }
        })
        .collect()
}

pub fn impute(x: &[Vec<f64>], means: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| r.iter().zip(means).map(|(&v, &m)| if v.is_nan() { m } else { v }).collect())
        .collect()
}

/// Column mean and population standard deviation (1 for constant columns).
pub fn scaling(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let means = column_means(x);
    let n = x.len().max(1) as f64;
    let sds = means
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let sd = (x.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (means, sds)
}

pub fn standardize(x: &[Vec<f64>], means: &[f64], sds: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| r.iter().zip(means.iter().zip(sds)).map(|(v, (m, s))| (v - m) / s).collect())
        .collect()
}

/// Columns of `x` ranked by |Pearson r| against `target`, descending; ties
/// keep column order.
pub fn rank_features(x: &[Vec<f64>], target: &[f64], cols: &[usize]) -> Vec<usize> {
    let r: Vec<(f64, usize)> = cols
        .iter()
        .map(|&j| {
            let col: Vec<f64> = x.iter().map(|row| row[j]).collect();
            (pearson(&col, target).map(f64::abs).unwrap_or(0.0), j)
        })
        .collect();
    let mut r = r;
    r.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    r.into_iter().map(|(_, j)| j).collect()
}

/// Top-`gamma` columns by |r| against the numeric target, on training rows.
pub fn select_features(train: &Dataset, kg: &[f64], gamma: usize) -> Vec<usize> {
    let x = impute(&train.x, &column_means(&train.x));
    let cols: Vec<usize> = (0..train.d()).collect();
    let mut r = rank_features(&x, kg, &cols);
    r.truncate(gamma);
    r
}

/// Feature selection for one setting: column groups and, per group, the
/// number of columns to keep (`None` keeps every column).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPlan {
    pub groups: Vec<Vec<usize>>,
    /// Candidate γ vectors (one entry per group), in search order.
    pub options: Vec<Option<Vec<usize>>>,
}

impl SelectionPlan {
    pub fn all(cols: Vec<usize>) -> Self {
        SelectionPlan {
            groups: vec![cols],
            options: vec![None],
        }
    }
}

/// A training split and its held-out rows, preprocessed with training statistics.
pub struct Prepared {
    train_raw: Vec<Vec<f64>>,
    test_raw: Vec<Vec<f64>>,
    train_std: Vec<Vec<f64>>,
    test_std: Vec<Vec<f64>>,
    rankings: Vec<Vec<usize>>,
    pub train_y: Vec<usize>,
}

impl Prepared {
    pub fn new(train: &Dataset, test_x: &[Vec<f64>], groups: &[Vec<usize>]) -> Self {
        let means = column_means(&train.x);
        let train_raw = impute(&train.x, &means);
        let test_raw = impute(test_x, &means);
        let (m, s) = scaling(&train_raw);
        let train_std = standardize(&train_raw, &m, &s);
        let test_std = standardize(&test_raw, &m, &s);
        let rankings = groups.iter().map(|g| rank_features(&train_raw, &train.kg, g)).collect();
        Prepared {
            train_raw,
            test_raw,
            train_std,
            test_std,
            rankings,
            train_y: train.y.clone(),
        }
    }

    /// Selected columns, ascending, for a γ option.
    pub fn selected(&self, groups: &[Vec<usize>], gammas: &Option<Vec<usize>>) -> Vec<usize> {
        let mut cols: Vec<usize> = match gammas {
            None => groups.concat(),
            Some(g) => self
                .rankings
                .iter()
                .zip(g)
                .flat_map(|(r, &k)| r.iter().take(k).copied())
                .collect(),
        };
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// Train and test matrices restricted to `cols`.
    pub fn view(&self, scaled: bool, cols: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (tr, te) = if scaled {
            (&self.train_std, &self.test_std)
        } else {
            (&self.train_raw, &self.test_raw)
        };
        let pick = |m: &Vec<Vec<f64>>| m.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        (pick(tr), pick(te))
    }
}

/// Outcome of the nested search on one outer training split.
#[derive(Debug, Clone, PartialEq)]
pub struct GridChoice {
    pub spec: ClassifierSpec,
    pub gammas: Option<Vec<usize>>,
    pub inner_f1: f64,
}

/// Mean inner macro-F1 for each (classifier, γ) combination; the first best wins.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    family: Family,
    grid: &[ClassifierSpec],
    train: &Dataset,
    plan: &SelectionPlan,
    k_inner: usize,
    master: u64,
    outer_fold: usize,
) -> Result<GridChoice, PipelineError> {
    let inner = stratified_kfold(&train.y, k_inner, rng::derive_seed(master, &[tag::INNER_SPLIT, outer_fold as u64]))?;
    let prepared: Vec<(Prepared, Vec<usize>)> = inner
        .iter()
        .map(|test| {
            let tr = train.rows(&complement(train.n(), test));
            let te = train.rows(test);
            (Prepared::new(&tr, &te.x, &plan.groups), te.y)
        })
        .collect();

    let mut best: Option<GridChoice> = None;
    let mut combo = 0u64;
    for spec in grid {
        for gammas in &plan.options {
            let mut f1s = Vec::with_capacity(prepared.len());
            for (i, (p, val_y)) in prepared.iter().enumerate() {
                let cols = p.selected(&plan.groups, gammas);
                let (xtr, xte) = p.view(spec.wants_scaling(), &cols);
                let seed = rng::derive_seed(master, &[tag::MODEL, family as u64, outer_fold as u64, combo, i as u64]);
                let m = spec.fit(&xtr, &p.train_y, N_CLASSES, seed)?;
                f1s.push(macro_f1(&ConfusionMatrix::new(val_y, &m.predict(&xte), N_CLASSES)));
            }
            let f1 = f1s.iter().sum::<f64>() / f1s.len() as f64;
            if best.as_ref().is_none_or(|b| f1 > b.inner_f1) {
                best = Some(GridChoice {
                    spec: *spec,
                    gammas: gammas.clone(),
                    inner_f1: f1,
                });
            }
            combo += 1;
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// A model refitted on a full outer training split.
pub struct Fitted {
    pub choice: GridChoice,
    pub cols: Vec<usize>,
    pub model: Box<dyn Predictor>,
    /// Held-out rows in model space.
    pub test_x: Vec<Vec<f64>>,
}

const FINAL_FIT: u64 = u64::MAX;

/// Nested search on `train`, then refit with the winner and transform `test`.
#[allow(clippy::too_many_arguments)]
pub fn fit_outer(
    family: Family,
    grid: &[ClassifierSpec],
    train: &Dataset,
    test: &Dataset,
    plan: &SelectionPlan,
    k_inner: usize,
    master: u64,
    outer_fold: usize,
) -> Result<Fitted, PipelineError> {
    let choice = grid_search(family, grid, train, plan, k_inner, master, outer_fold)?;
    let p = Prepared::new(train, &test.x, &plan.groups);
    let cols = p.selected(&plan.groups, &choice.gammas);
    let (xtr, test_x) = p.view(choice.spec.wants_scaling(), &cols);
    let seed = rng::derive_seed(master, &[tag::MODEL, family as u64, outer_fold as u64, FINAL_FIT]);
    let model = choice.spec.fit(&xtr, &p.train_y, N_CLASSES, seed)?;
    Ok(Fitted {
        choice,
        cols,
        model,
        test_x,
    })
}

pub fn score(model: &dyn Predictor, x: &[Vec<f64>], y: &[usize]) -> (f64, f64) {
    let cm = ConfusionMatrix::new(y, &model.predict(x), N_CLASSES);
    (accuracy(&cm), macro_f1(&cm))
}
