//! Confusion matrices, macro-F1 and accuracy.

/// `counts[t][p]`: samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Self {
        assert_eq!(y_true.len(), y_pred.len(), "prediction count mismatch");
        let mut counts = vec![vec![0; n_classes]; n_classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            counts[t][p] += 1;
        }
        ConfusionMatrix { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, c: usize) -> usize {
        self.counts[c][c]
    }

    pub fn fp(&self, c: usize) -> usize {
        (0..self.counts.len()).filter(|&t| t != c).map(|t| self.counts[t][c]).sum()
    }

    pub fn fn_(&self, c: usize) -> usize {
        (0..self.counts.len()).filter(|&p| p != c).map(|p| self.counts[c][p]).sum()
    }

    pub fn tn(&self, c: usize) -> usize {
        self.total() - self.tp(c) - self.fp(c) - self.fn_(c)
    }

    /// Per-class `2TP / (2TP + FP + FN)`, 0 for an empty denominator.
    pub fn f1(&self, c: usize) -> f64 {
        let tp = self.tp(c) as f64;
        let den = 2.0 * tp + self.fp(c) as f64 + self.fn_(c) as f64;
        if den == 0.0 {
            0.0
        } else {
            2.0 * tp / den
        }
    }
}

pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let k = cm.counts.len();
    (0..k).map(|c| cm.f1(c)).sum::<f64>() / k as f64
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    let correct: usize = (0..cm.counts.len()).map(|c| cm.tp(c)).sum();
    correct as f64 / cm.total() as f64
}
