//! Knowledge-gain classification: nested cross-validation with feature
//! selection, label-only baselines, significance testing and permutation
//! importance.

pub mod baselines;
pub mod classifiers;
pub mod cv;
pub mod data;
pub mod experiment;
pub mod metrics;
pub mod pfi;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synth;

pub use classifiers::{Classifier, ClassifierSpec, Family, Predictor};
pub use data::Dataset;
pub use experiment::{run_experiment, run_importance, ExperimentConfig, ExperimentReport, Mode};
pub use pfi::PfiResult;
