//! Label-only baselines.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    MostFrequent,
    Stratified,
    Uniform,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::MostFrequent,
        BaselineKind::Stratified,
        BaselineKind::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::MostFrequent => "most_frequent",
            BaselineKind::Stratified => "stratified",
            BaselineKind::Uniform => "uniform",
        }
    }
}

/// Majority label of `y`, ties to the smallest class index.
pub fn majority(y: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

pub fn baseline_predict<R: Rng>(
    kind: BaselineKind,
    train_y: &[usize],
    n_classes: usize,
    n_test: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(!train_y.is_empty(), "baseline needs training labels");
    match kind {
        BaselineKind::MostFrequent => vec![majority(train_y, n_classes); n_test],
        BaselineKind::Stratified => {
            let mut counts = vec![0usize; n_classes];
            for &c in train_y {
                counts[c] += 1;
            }
            let dist = WeightedIndex::new(&counts).expect("non-empty training labels");
            (0..n_test).map(|_| dist.sample(rng)).collect()
        }
        BaselineKind::Uniform => (0..n_test).map(|_| rng.random_range(0..n_classes)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::rng;

    #[test]
    fn majority_ties_to_lowest() {
        assert_eq!(majority(&[2, 1, 2, 1], 3), 1);
        assert_eq!(majority(&[], 3), 0);
    }

    #[test]
    fn most_frequent_is_low() {
        let y: Vec<usize> = [vec![0; 43], vec![1; 41], vec![2; 28]].concat();
        let p = baseline_predict(BaselineKind::MostFrequent, &y, 3, 5, &mut rng::stream(0, &[]));
        assert_eq!(p, vec![0; 5]);
    }
}
