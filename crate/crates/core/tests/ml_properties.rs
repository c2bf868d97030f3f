//! Cross-validation, selection and importance properties of the harness.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use viscom::kg::label_classes;
use viscom::ml::classifiers::{Classifier, ClassifierSpec, Family, Metric};
use viscom::ml::cv::stratified_kfold;
use viscom::ml::experiment::{run_experiment, ExperimentConfig, GammaPolicy, Mode};
use viscom::ml::pfi::permutation_importance;
use viscom::ml::pipeline::select_features;
use viscom::ml::rng::{derive_seed, tag};
use viscom::ml::stats::{mean, pop_std};
use viscom::ml::synth::{generate, SynthConfig, PLANTED};
use viscom::ml::Dataset;

proptest! {
    #[test]
    fn folds_partition_and_stratify(y in prop::collection::vec(0usize..3, 20..150), k in 2usize..11, seed in any::<u64>()) {
        let mut counts = [0usize; 3];
        for &c in &y {
            counts[c] += 1;
        }
        prop_assume!(counts.iter().all(|&c| c >= k));
        let folds = stratified_kfold(&y, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
        for c in 0..3 {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| y[i] == c).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1, "{per:?}");
        }
    }

    #[test]
    fn selection_ignores_positive_affine_rescaling(seed in any::<u64>(), col in 0usize..6, a in 1e-3f64..1e3, b in -1e3f64..1e3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let kg: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let x: Vec<Vec<f64>> = kg
            .iter()
            .map(|k| (0..6).map(|j| k * j as f64 / 6.0 + r.random_range(-1.0..1.0)).collect())
            .collect();
        let names: Vec<String> = (0..6).map(|j| format!("f.{j}")).collect();
        let d = Dataset::new(x.clone(), vec![0; n], kg.clone(), names.clone()).unwrap();
        let mut x2 = x;
        for row in &mut x2 {
            row[col] = a * row[col] + b;
        }
        let d2 = Dataset::new(x2, vec![0; n], kg.clone(), names).unwrap();
        for gamma in 1..=6 {
            prop_assert_eq!(select_features(&d, &kg, gamma), select_features(&d2, &kg, gamma));
        }
    }
}

#[test]
fn planted_column_ranks_first() {
    let mut hits = 0;
    for seed in 0..100 {
        let cfg = SynthConfig { noise_sd: 0.01, seed, ..SynthConfig::default() };
        let data = generate(&cfg).unwrap().dataset().unwrap();
        let top = select_features(&data, &data.kg, 1)[0];
        if data.feature_names[top] == PLANTED {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

/// Column `leak_f` equals the label signal on the rows of outer fold `f` and
/// is noise elsewhere, so it only looks useful to a harness that peeks at
/// test rows.
#[test]
fn leakage_probe() {
    let n = 120;
    let seed = 11;
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let kg: Vec<f64> = (0..n).map(|_| normal.sample(&mut r)).collect();
    let y: Vec<usize> = label_classes(&kg).unwrap().iter().map(|l| l.class.index()).collect();
    let folds = stratified_kfold(&y, 10, derive_seed(seed, &[tag::OUTER_SPLIT])).unwrap();
    let mut fold_of = vec![0; n];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            fold_of[i] = f;
        }
    }
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![kg[i] + 0.8 * normal.sample(&mut r)];
            for f in 0..10 {
                row.push(if fold_of[i] == f { kg[i] } else { normal.sample(&mut r) });
            }
            row
        })
        .collect();
    let mut names = vec!["probe.honest".to_string()];
    names.extend((0..10).map(|f| format!("probe.leak_{f}")));
    let data = Dataset::new(x, y, kg, names).unwrap();

    let mut cfg = ExperimentConfig::new(&["probe"], Mode::Full, seed);
    cfg.gamma_policy = GammaPolicy::Fixed(1);
    cfg.classifiers = vec![Family::Knn, Family::GaussianNb];
    let report = run_experiment(&data, &cfg).unwrap();
    for c in &report.settings[0].classifiers {
        for f in &c.folds {
            assert_eq!(f.selected.len(), 1);
            assert_ne!(f.selected[0], format!("probe.leak_{}", f.fold), "fold {}", f.fold);
        }
    }
}

/// The deviation of mean_delta across independent seeds shrinks like
/// 1/√repeats: 100× the repeats gives roughly a tenth of the spread.
#[test]
fn importance_concentrates_with_repeats() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let make = |r: &mut ChaCha8Rng, n: usize| -> (Vec<Vec<f64>>, Vec<usize>) {
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random_range(0.0..3.0), r.random_range(0.0..1.0)]).collect();
        let y = x.iter().map(|v| (v[0] as usize).min(2)).collect();
        (x, y)
    };
    let (tx, ty) = make(&mut r, 90);
    let (x, y) = make(&mut r, 40);
    let model = ClassifierSpec::Knn { k: 1, metric: Metric::Euclidean }.fit(&tx, &ty, 3, 0).unwrap();
    let spread = |repeats: usize, seeds: u64| {
        let means: Vec<f64> = (0..seeds)
            .map(|s| mean(&permutation_importance(model.as_ref(), &x, &y, repeats, s, &[]).1[0]))
            .collect();
        pop_std(&means)
    };
    let (s10, s1000) = (spread(10, 200), spread(1000, 40));
    let ratio = s10 / s1000;
    assert!((5.0..20.0).contains(&ratio), "{s10} / {s1000} = {ratio}");
}
