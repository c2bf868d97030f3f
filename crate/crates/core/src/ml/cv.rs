//! Stratified k-fold splitting.
//!
//! Indices of each class are shuffled with the fold stream, classes are
//! concatenated in label order, and position `i` of the concatenation goes
//! to fold `i mod k`. Each class is therefore spread over the folds as
//! evenly as its count allows, and fold sizes differ by at most one.

use rand::seq::SliceRandom;
use thiserror::Error;

use super::rng;

#[derive(Debug, Error, PartialEq)]
pub enum CvError {
    #[error("k = {k} is invalid for {n} samples (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
}

/// Test-index sets, each sorted ascending.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, CvError> {
    let n = y.len();
    if k < 2 || k > n {
        return Err(CvError::BadK { k, n });
    }
    let n_classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = rng::stream(seed, &[]);
    let mut order = Vec::with_capacity(n);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices in `0..n` that are not in `test` (which must be sorted).
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| test.binary_search(i).is_err()).collect()
}
