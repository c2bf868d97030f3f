//! Permutation feature importance on held-out rows.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::classifiers::Predictor;
use super::data::N_CLASSES;
use super::metrics::{accuracy, ConfusionMatrix};
use super::rng;

pub const DEFAULT_REPEATS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfiResult {
    pub feature_name: String,
    pub accuracy_ori: f64,
    pub mean_delta: f64,
    pub std_delta: f64,
    pub selection_count: usize,
    pub repeats: usize,
}

fn acc(model: &dyn Predictor, x: &[Vec<f64>], y: &[usize]) -> f64 {
    accuracy(&ConfusionMatrix::new(y, &model.predict(x), N_CLASSES))
}

/// Original accuracy and, per column, `repeats` accuracy drops.
///
/// The permutation for column `j`, repeat `r` is drawn from the stream
/// `path ++ [j, r]` under `master`.
pub fn permutation_importance(
    model: &dyn Predictor,
    x: &[Vec<f64>],
    y: &[usize],
    repeats: usize,
    master: u64,
    path: &[u64],
) -> (f64, Vec<Vec<f64>>) {
    let base = acc(model, x, y);
    let d = x.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(d);
    let mut xp = x.to_vec();
    for j in 0..d {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        let mut deltas = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let mut p = col.clone();
            let mut stream_path = path.to_vec();
            stream_path.extend([j as u64, r as u64]);
            p.shuffle(&mut rng::stream(master, &stream_path));
            for (row, v) in xp.iter_mut().zip(&p) {
                row[j] = *v;
            }
            deltas.push(base - acc(model, &xp, y));
        }
        for (row, v) in xp.iter_mut().zip(&col) {
            row[j] = *v;
        }
        out.push(deltas);
    }
    (base, out)
}
