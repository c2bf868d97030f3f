//! Seeded synthetic session tables with a known answer.
//!
//! Each session draws a latent knowledge gain `kg ~ N(0, 1)`. The planted
//! column is `kg + N(0, noise_sd²)`; noise columns are independent `N(0, 1)`
//! draws. Labels come from the usual z-score thresholds on `kg`.

use rand_distr::{Distribution, Normal};

use super::data::{DataError, Dataset};
use super::rng::{self, tag};
use crate::features::Scope;
use crate::kg::{label_classes, KgError, LabelRow};
use crate::table::FeatureTable;

pub const PREFIX: &str = "synthetic";
pub const PLANTED: &str = "synthetic.planted";
pub const CONSTANT: &str = "synthetic.constant";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub n_noise: usize,
    pub noise_sd: f64,
    /// Without a planted column every feature is noise.
    pub planted: bool,
    pub constant: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 112,
            n_noise: 10,
            noise_sd: 0.05,
            planted: true,
            constant: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub table: FeatureTable,
    pub labels: Vec<LabelRow>,
}

impl SynthData {
    pub fn dataset(&self) -> Result<Dataset, DataError> {
        Dataset::from_tables(&self.table, &self.labels)
    }
}

pub fn feature_names(cfg: &SynthConfig) -> Vec<String> {
    let mut names: Vec<String> = (1..=cfg.n_noise).map(|i| format!("{PREFIX}.noise_{i:02}")).collect();
    if cfg.constant {
        names.push(CONSTANT.to_string());
    }
    if cfg.planted {
        names.push(PLANTED.to_string());
    }
    names
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData, KgError> {
    let mut r = rng::stream(cfg.seed, &[tag::SYNTH]);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, cfg.noise_sd.max(0.0)).expect("finite noise sd");
    let names = feature_names(cfg);
    let mut table = FeatureTable::new("user_id", Scope::Session, names);
    let mut kgs = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let kg: f64 = std_normal.sample(&mut r);
        let planted = kg + noise.sample(&mut r);
        let mut row: Vec<Option<f64>> = (0..cfg.n_noise).map(|_| Some(std_normal.sample(&mut r))).collect();
        if cfg.constant {
            row.push(Some(1.0));
        }
        if cfg.planted {
            row.push(Some(planted));
        }
        table.ids.push(format!("s{:03}", i + 1));
        table.rows.push(row);
        kgs.push(kg);
    }
    let labels = label_classes(&kgs)?
        .into_iter()
        .zip(&table.ids)
        .map(|(l, id)| LabelRow {
            user_id: id.clone(),
            kg: l.kg,
            z: l.z,
            class: l.class,
        })
        .collect();
    Ok(SynthData { table, labels })
}
