//! Labelled design matrices.

use std::collections::HashMap;

use thiserror::Error;

use crate::kg::{KgClass, LabelRow};
use crate::table::FeatureTable;

pub const N_CLASSES: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("row {row} has {got} values, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("{x} feature rows but {y} labels")]
    LengthMismatch { x: usize, y: usize },
    #[error("label {0} out of range")]
    BadLabel(usize),
    #[error("no label for `{0}`")]
    MissingLabel(String),
}

/// Rows of `x` are samples; `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    /// Numeric target used for correlation-based selection.
    pub kg: Vec<f64>,
    pub feature_names: Vec<String>,
    pub ids: Vec<String>,
}

impl Dataset {
    pub fn new(
        x: Vec<Vec<f64>>,
        y: Vec<usize>,
        kg: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if x.len() != y.len() || kg.len() != y.len() {
            return Err(DataError::LengthMismatch { x: x.len(), y: y.len() });
        }
        let d = feature_names.len();
        if let Some((row, r)) = x.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(DataError::Ragged { row, got: r.len(), expected: d });
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
            return Err(DataError::BadLabel(bad));
        }
        let ids = (0..y.len()).map(|i| i.to_string()).collect();
        Ok(Dataset { x, y, kg, feature_names, ids })
    }

    /// Joins a session feature table with its labels by id, in table order.
    pub fn from_tables(t: &FeatureTable, labels: &[LabelRow]) -> Result<Self, DataError> {
        let by_id: HashMap<&str, &LabelRow> = labels.iter().map(|l| (l.user_id.as_str(), l)).collect();
        let mut y = Vec::with_capacity(t.len());
        let mut kg = Vec::with_capacity(t.len());
        for id in &t.ids {
            let l = by_id.get(id.as_str()).ok_or_else(|| DataError::MissingLabel(id.clone()))?;
            y.push(l.class.index());
            kg.push(l.kg);
        }
        let x = t
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        let mut ds = Dataset::new(x, y, kg, t.names.clone())?;
        ds.ids = t.ids.clone();
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            kg: idx.iter().map(|&i| self.kg[i]).collect(),
            feature_names: self.feature_names.clone(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    pub fn columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            x: self.x.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            y: self.y.clone(),
            kg: self.kg.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            ids: self.ids.clone(),
        }
    }

    pub fn class_counts(&self) -> [usize; N_CLASSES] {
        let mut c = [0; N_CLASSES];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }
}

pub fn class_name(c: usize) -> &'static str {
    KgClass::ALL[c].name()
}
