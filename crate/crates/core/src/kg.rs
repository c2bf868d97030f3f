//! Session aggregation, knowledge gain and class labels.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, Scope};
use crate::page_type::PageType;
use crate::session::{KnowledgeTest, NavigationEvent, SessionRecord};

/// z-scores within this distance of ±0.5 count as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;
pub const Z_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum KgError {
    #[error("need at least 2 knowledge-gain values, got {0}")]
    TooFew(usize),
    #[error("knowledge gain has zero variance")]
    DegenerateDistribution,
    #[error("page {index} does not match the page registry")]
    RegistryMismatch { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KgClass {
    Low,
    Moderate,
    High,
}

impl KgClass {
    pub const ALL: [KgClass; 3] = [KgClass::Low, KgClass::Moderate, KgClass::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            KgClass::Low => "low",
            KgClass::Moderate => "moderate",
            KgClass::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KgLabel {
    pub kg: f64,
    pub z: f64,
    pub mu: f64,
    pub sigma: f64,
    pub class: KgClass,
}

pub fn filter_content_pages(s: &SessionRecord) -> Vec<NavigationEvent> {
    s.events
        .iter()
        .filter(|e| e.page_type == PageType::Content)
        .cloned()
        .collect()
}

/// Mean of each page feature over `pages` (missing values skipped), then the
/// query features appended. No pages gives all page features missing.
pub fn aggregate_session(
    page_names: &[String],
    pages: &[FeatureVector],
    query_f: &FeatureVector,
) -> Result<FeatureVector, KgError> {
    let d = page_names.len();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for (index, p) in pages.iter().enumerate() {
        if p.names() != page_names {
            return Err(KgError::RegistryMismatch { index });
        }
        for (j, v) in p.values().iter().enumerate() {
            if let Some(x) = v {
                sums[j] += x;
                counts[j] += 1;
            }
        }
    }
    let values: Vec<Option<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    FeatureVector::new(page_names.to_vec(), values, Scope::Session)
        .and_then(|v| v.concat(query_f))
        .map_err(|_| KgError::RegistryMismatch { index: pages.len() })
}

pub fn compute_kg(t: &KnowledgeTest) -> f64 {
    (t.post_correct as f64 - t.pre_correct as f64) / t.n_items as f64
}

pub fn classify_z(z: f64) -> KgClass {
    if z < -Z_THRESHOLD - BOUNDARY_TOL {
        KgClass::Low
    } else if z > Z_THRESHOLD + BOUNDARY_TOL {
        KgClass::High
    } else {
        KgClass::Moderate
    }
}

/// z-scores with population mean and standard deviation, then thresholds at ±0.5.
pub fn label_classes(kgs: &[f64]) -> Result<Vec<KgLabel>, KgError> {
    let n = kgs.len();
    if n < 2 {
        return Err(KgError::TooFew(n));
    }
    let mu = kgs.iter().sum::<f64>() / n as f64;
    let var = kgs.iter().map(|k| (k - mu) * (k - mu)).sum::<f64>() / n as f64;
    let sigma = var.sqrt();
    if sigma == 0.0 || sigma <= 1e-12 * mu.abs() {
        return Err(KgError::DegenerateDistribution);
    }
    Ok(kgs
        .iter()
        .map(|&kg| {
            let z = (kg - mu) / sigma;
            KgLabel {
                kg,
                z,
                mu,
                sigma,
                class: classify_z(z),
            }
        })
        .collect())
}

#[derive(Debug, Error)]
pub enum LabelsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

/// `labels.csv`: `user_id,kg,z,class`.
pub fn write_labels<W: Write>(w: W, rows: &[LabelRow]) -> Result<(), LabelsError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["user_id", "kg", "z", "class"])?;
    for l in rows {
        out.write_record([l.user_id.clone(), l.kg.to_string(), l.z.to_string(), l.class.name().to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub user_id: String,
    pub kg: f64,
    pub z: f64,
    pub class: KgClass,
}

pub fn read_labels<R: Read>(r: R) -> Result<Vec<LabelRow>, LabelsError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| LabelsError::Malformed { row: i + 1, message };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", rec.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
        rows.push(LabelRow {
            user_id: rec[0].to_string(),
            kg: num(&rec[1])?,
            z: num(&rec[2])?,
            class: KgClass::parse(&rec[3]).ok_or_else(|| bad(format!("unknown class `{}`", &rec[3])))?,
        });
    }
    Ok(rows)
}
