//! The five classifiers and the plug-in contract they share.
//!
//! Inputs are dense matrices without missing values; imputation and scaling
//! happen in the pipeline. Every tie is broken toward the smallest index:
//! class votes toward the smallest class, neighbours toward the earliest
//! training row, splits toward the lowest feature and then the lowest
//! threshold.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("class {0} is absent from the training split")]
    DegenerateTraining(usize),
    #[error("empty training set")]
    Empty,
}

pub trait Predictor: Send + Sync {
    fn predict_row(&self, row: &[f64]) -> usize;

    fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// A trainable model family member with fixed hyperparameters.
pub trait Classifier: Send + Sync {
    fn family(&self) -> &'static str;
    /// Whether inputs should be standardized before fitting.
    fn wants_scaling(&self) -> bool;
    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Box<dyn Predictor>, TrainError>;
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn check_training(y: &[usize], n_classes: usize) -> Result<(), TrainError> {
    if y.is_empty() {
        return Err(TrainError::Empty);
    }
    let mut seen = vec![false; n_classes];
    for &c in y {
        seen[c] = true;
    }
    match seen.iter().position(|s| !s) {
        Some(c) => Err(TrainError::DegenerateTraining(c)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Knn { k: usize, metric: Metric },
    GaussianNb { var_floor: f64 },
    DecisionTree { max_depth: Option<usize>, min_leaf: usize },
    RandomForest { n_trees: usize, max_depth: Option<usize> },
    AdaBoost { rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Knn,
    GaussianNb,
    DecisionTree,
    RandomForest,
    AdaBoost,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Knn,
        Family::GaussianNb,
        Family::DecisionTree,
        Family::RandomForest,
        Family::AdaBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Knn => "knn",
            Family::GaussianNb => "gaussian_nb",
            Family::DecisionTree => "decision_tree",
            Family::RandomForest => "random_forest",
            Family::AdaBoost => "adaboost",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// The fixed hyperparameter grid, in search order.
    pub fn grid(self) -> Vec<ClassifierSpec> {
        use ClassifierSpec::*;
        match self {
            Family::Knn => [1, 3, 5, 7, 11]
                .into_iter()
                .flat_map(|k| [Metric::Euclidean, Metric::Manhattan].map(|metric| Knn { k, metric }))
                .collect(),
            Family::GaussianNb => [1e-9, 1e-6, 1e-3].map(|var_floor| GaussianNb { var_floor }).to_vec(),
            Family::DecisionTree => [Some(2), Some(3), Some(5), None]
                .into_iter()
                .flat_map(|max_depth| [1, 3, 5].map(|min_leaf| DecisionTree { max_depth, min_leaf }))
                .collect(),
            Family::RandomForest => [50, 200]
                .into_iter()
                .flat_map(|n_trees| [Some(3), None].map(|max_depth| RandomForest { n_trees, max_depth }))
                .collect(),
            Family::AdaBoost => [50, 200].map(|rounds| AdaBoost { rounds }).to_vec(),
        }
    }
}

impl ClassifierSpec {
    pub fn family_kind(&self) -> Family {
        match self {
            ClassifierSpec::Knn { .. } => Family::Knn,
            ClassifierSpec::GaussianNb { .. } => Family::GaussianNb,
            ClassifierSpec::DecisionTree { .. } => Family::DecisionTree,
            ClassifierSpec::RandomForest { .. } => Family::RandomForest,
            ClassifierSpec::AdaBoost { .. } => Family::AdaBoost,
        }
    }
}

impl Classifier for ClassifierSpec {
    fn family(&self) -> &'static str {
        self.family_kind().name()
    }

    fn wants_scaling(&self) -> bool {
        matches!(
            self,
            ClassifierSpec::Knn { .. } | ClassifierSpec::GaussianNb { .. } | ClassifierSpec::AdaBoost { .. }
        )
    }

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Box<dyn Predictor>, TrainError> {
        check_training(y, n_classes)?;
        Ok(match *self {
            ClassifierSpec::Knn { k, metric } => Box::new(Knn {
                x: x.to_vec(),
                y: y.to_vec(),
                k,
                metric,
                n_classes,
            }),
            ClassifierSpec::GaussianNb { var_floor } => Box::new(GaussianNb::fit(x, y, n_classes, var_floor)),
            ClassifierSpec::DecisionTree { max_depth, min_leaf } => {
                let params = TreeParams { max_depth, min_leaf, max_features: None };
                let w = vec![1.0; y.len()];
                let idx: Vec<usize> = (0..y.len()).collect();
                Box::new(Tree::fit(x, y, &w, &idx, n_classes, &params, &mut rng::stream(seed, &[])))
            }
            ClassifierSpec::RandomForest { n_trees, max_depth } => {
                Box::new(Forest::fit(x, y, n_classes, n_trees, max_depth, seed))
            }
            ClassifierSpec::AdaBoost { rounds } => Box::new(AdaBoost::fit(x, y, n_classes, rounds, seed)),
        })
    }
}

struct Knn {
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
    metric: Metric,
    n_classes: usize,
}

impl Predictor for Knn {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let dist = match self.metric {
                    Metric::Euclidean => r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                    Metric::Manhattan => r.iter().zip(row).map(|(a, b)| (a - b).abs()).sum::<f64>(),
                };
                (dist, i)
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in d.iter().take(self.k.min(d.len())) {
            votes[self.y[i]] += 1.0;
        }
        argmax_first(&votes)
    }
}

struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, var_floor: f64) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut count = vec![0usize; n_classes];
        let mut mean = vec![vec![0.0; d]; n_classes];
        for (r, &c) in x.iter().zip(y) {
            count[c] += 1;
            for j in 0..d {
                mean[c][j] += r[j];
            }
        }
        for c in 0..n_classes {
            mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        let mut var = vec![vec![0.0; d]; n_classes];
        for (r, &c) in x.iter().zip(y) {
            for j in 0..d {
                var[c][j] += (r[j] - mean[c][j]).powi(2);
            }
        }
        for c in 0..n_classes {
            var[c].iter_mut().for_each(|v| *v = (*v / count[c] as f64).max(var_floor));
        }
        let n = y.len() as f64;
        GaussianNb {
            log_prior: count.iter().map(|&c| (c as f64 / n).ln()).collect(),
            mean,
            var,
        }
    }
}

impl Predictor for GaussianNb {
    fn predict_row(&self, row: &[f64]) -> usize {
        let scores: Vec<f64> = (0..self.log_prior.len())
            .map(|c| {
                self.log_prior[c]
                    + row
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            let s2 = self.var[c][j];
                            -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (v - self.mean[c][j]).powi(2) / (2.0 * s2)
                        })
                        .sum::<f64>()
            })
            .collect();
        argmax_first(&scores)
    }
}

struct TreeParams {
    max_depth: Option<usize>,
    min_leaf: usize,
    /// Features examined per node; `None` means all.
    max_features: Option<usize>,
}

enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART with weighted Gini impurity.
pub struct Tree {
    nodes: Vec<Node>,
}

fn gini(w: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - w.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

struct Split {
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    w: &'a [f64],
    n_classes: usize,
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn class_weights(&self, idx: &[usize]) -> Vec<f64> {
        let mut cw = vec![0.0; self.n_classes];
        for &i in idx {
            cw[self.y[i]] += self.w[i];
        }
        cw
    }

    fn best_split(&self, idx: &[usize], features: &[usize], parent: f64) -> Option<Split> {
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let total = self.class_weights(idx);
        let wt: f64 = total.iter().sum();
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        let mut left = vec![0.0; self.n_classes];
        for &f in features {
            order.clear();
            order.extend(idx.iter().map(|&i| (self.x[i][f], i)));
            order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            left.iter_mut().for_each(|v| *v = 0.0);
            let mut wl = 0.0;
            for pos in 0..order.len() - 1 {
                let (a, i) = order[pos];
                left[self.y[i]] += self.w[i];
                wl += self.w[i];
                let b = order[pos + 1].0;
                let n_left = pos + 1;
                if a == b || n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let wr = wt - wl;
                if wl <= 0.0 || wr <= 0.0 {
                    continue;
                }
                // w·gini(w) = w − Σ c² / w
                let (mut sl, mut sr) = (0.0, 0.0);
                for (t, l) in total.iter().zip(&left) {
                    sl += l * l;
                    sr += (t - l) * (t - l);
                }
                let imp = (wl - sl / wl + wr - sr / wr) / wt;
                if best.is_none_or(|(b_imp, _, _)| imp < b_imp) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((imp, f, threshold));
                }
            }
        }
        let (imp, feature, threshold) = best?;
        if imp >= parent - 1e-12 {
            return None;
        }
        let (left, right) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        Some(Split { feature, threshold, left, right })
    }

    fn build(&mut self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let cw = self.class_weights(idx);
        let total: f64 = cw.iter().sum();
        let leaf = argmax_first(&cw);
        let impurity = gini(&cw, total);
        let d = self.x.first().map_or(0, Vec::len);
        let stop = impurity <= 0.0
            || self.params.max_depth.is_some_and(|m| depth >= m)
            || idx.len() < 2 * self.params.min_leaf.max(1)
            || d == 0;
        let split = if stop {
            None
        } else {
            let features: Vec<usize> = match self.params.max_features {
                Some(m) if m < d => {
                    let mut f = sample(rng, d, m).into_vec();
                    f.sort_unstable();
                    f
                }
                _ => (0..d).collect(),
            };
            self.best_split(idx, &features, impurity)
        };
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(leaf));
        if let Some(s) = split {
            let left = self.build(&s.left, depth + 1, rng);
            let right = self.build(&s.right, depth + 1, rng);
            self.nodes[id] = Node::Split {
                feature: s.feature,
                threshold: s.threshold,
                left,
                right,
            };
        }
        id
    }
}

impl Tree {
    fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        w: &[f64],
        idx: &[usize],
        n_classes: usize,
        params: &TreeParams,
        rng: &mut ChaCha8Rng,
    ) -> Tree {
        let mut b = Builder {
            x,
            y,
            w,
            n_classes,
            params,
            nodes: Vec::new(),
        };
        b.build(idx, 0, rng);
        Tree { nodes: b.nodes }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

impl Predictor for Tree {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(c) => return c,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

struct Forest {
    trees: Vec<Tree>,
    n_classes: usize,
}

impl Forest {
    fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, n_trees: usize, max_depth: Option<usize>, seed: u64) -> Self {
        let n = y.len();
        let d = x.first().map_or(0, Vec::len);
        let params = TreeParams {
            max_depth,
            min_leaf: 1,
            max_features: Some(((d as f64).sqrt().floor() as usize).max(1)),
        };
        let trees = (0..n_trees)
            .map(|t| {
                let mut r = rng::stream(seed, &[t as u64]);
                // A bootstrap sample as per-row multiplicities.
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[r.random_range(0..n)] += 1.0;
                }
                let boot: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
                Tree::fit(x, y, &w, &boot, n_classes, &params, &mut r)
            })
            .collect();
        Forest { trees, n_classes }
    }
}

impl Predictor for Forest {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1.0;
        }
        argmax_first(&votes)
    }
}

/// SAMME boosting over depth-1 trees.
struct AdaBoost {
    stumps: Vec<(f64, Tree)>,
    n_classes: usize,
}

impl AdaBoost {
    fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, rounds: usize, seed: u64) -> Self {
        let n = y.len();
        let k = n_classes as f64;
        let params = TreeParams {
            max_depth: Some(1),
            min_leaf: 1,
            max_features: None,
        };
        let idx: Vec<usize> = (0..n).collect();
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let mut r = rng::stream(seed, &[]);
        for _ in 0..rounds {
            let stump = Tree::fit(x, y, &w, &idx, n_classes, &params, &mut r);
            let miss: Vec<bool> = x.iter().zip(y).map(|(row, &c)| stump.predict_row(row) != c).collect();
            let wsum: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / wsum;
            if err <= 0.0 {
                stumps.push((1.0, stump));
                break;
            }
            if err >= 1.0 - 1.0 / k {
                if stumps.is_empty() {
                    stumps.push((1.0, stump));
                }
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (k - 1.0).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            stumps.push((alpha, stump));
        }
        AdaBoost { stumps, n_classes }
    }
}

impl Predictor for AdaBoost {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut score = vec![0.0; self.n_classes];
        for (alpha, s) in &self.stumps {
            score[s.predict_row(row)] += alpha;
        }
        argmax_first(&score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn grid_sizes() {
        let sizes: Vec<usize> = Family::ALL.iter().map(|f| f.grid().len()).collect();
        assert_eq!(sizes, vec![10, 3, 12, 4, 2]);
    }

    #[test]
    fn one_nn_recalls_training_points() {
        let x = vec![vec![0.0, 1.0], vec![2.0, 0.5], vec![5.0, 5.0]];
        let y = vec![0, 1, 2];
        let m = ClassifierSpec::Knn { k: 1, metric: Metric::Euclidean }.fit(&x, &y, 3, 0).unwrap();
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn knn_vote_tie_goes_to_smallest_class() {
        let x = one_d(&[-1.0, 1.0, 10.0]);
        let m = ClassifierSpec::Knn { k: 2, metric: Metric::Manhattan }.fit(&x, &[2, 1, 0], 3, 0).unwrap();
        assert_eq!(m.predict_row(&[0.0]), 1);
    }

    #[test]
    fn gaussian_nb_midpoint() {
        // Symmetric samples around 0 and 10 with equal spread: boundary at 5.
        let base: Vec<f64> = (0..50).map(|i| (i as f64 - 24.5) / 12.5).collect();
        let xs: Vec<f64> = base.iter().copied().chain(base.iter().map(|v| v + 10.0)).collect();
        let y: Vec<usize> = [vec![0; 50], vec![1; 50]].concat();
        let m = ClassifierSpec::GaussianNb { var_floor: 1e-9 }.fit(&one_d(&xs), &y, 2, 0).unwrap();
        assert_eq!(m.predict_row(&[5.1]), 1);
        assert_eq!(m.predict_row(&[4.9]), 0);
    }

    #[test]
    fn stump_separates() {
        let x = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = vec![0, 0, 0, 1, 1, 1];
        let m = ClassifierSpec::DecisionTree { max_depth: Some(1), min_leaf: 1 }.fit(&x, &y, 2, 0).unwrap();
        assert_eq!(m.predict(&x), y);
        assert_eq!(m.predict_row(&[2.5]), 0);
        assert_eq!(m.predict_row(&[2.51]), 1);
    }

    #[test]
    fn split_tie_prefers_lowest_feature() {
        // Both columns separate perfectly; the tree must use column 0.
        let x = vec![vec![0.0, 10.0], vec![1.0, 11.0], vec![5.0, 20.0], vec![6.0, 21.0]];
        let y = vec![0, 0, 1, 1];
        let w = vec![1.0; 4];
        let t = Tree::fit(&x, &y, &w, &[0, 1, 2, 3], 2, &TreeParams { max_depth: None, min_leaf: 1, max_features: None }, &mut rng::stream(0, &[]));
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 3.0));
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn degenerate_training() {
        let e = ClassifierSpec::GaussianNb { var_floor: 1e-9 }.fit(&one_d(&[0.0, 1.0]), &[0, 0], 2, 0);
        assert_eq!(e.err(), Some(TrainError::DegenerateTraining(1)));
    }

    #[test]
    fn ensembles_fit_separable_data() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        for spec in [
            ClassifierSpec::RandomForest { n_trees: 25, max_depth: None },
            ClassifierSpec::AdaBoost { rounds: 50 },
        ] {
            let m = spec.fit(&one_d(&xs), &y, 3, 9).unwrap();
            let acc = m.predict(&one_d(&xs)).iter().zip(&y).filter(|(a, b)| a == b).count();
            assert!(acc >= 27, "{spec:?} {acc}");
        }
    }
}
