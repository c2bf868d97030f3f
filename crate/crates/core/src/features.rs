//! Named, ordered feature vectors.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Page,
    Session,
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("{names} names but {values} values")]
    LengthMismatch { names: usize, values: usize },
    #[error("duplicate feature name `{0}`")]
    DuplicateName(String),
    #[error("feature `{0}` is not finite")]
    NonFinite(String),
}

/// A feature vector. `None` marks a missing value, which is distinct from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<Option<f64>>,
    scope: Scope,
}

impl FeatureVector {
    pub fn new(
        names: Vec<String>,
        values: Vec<Option<f64>>,
        scope: Scope,
    ) -> Result<Self, FeatureError> {
        if names.len() != values.len() {
            return Err(FeatureError::LengthMismatch {
                names: names.len(),
                values: values.len(),
            });
        }
        let mut seen = HashSet::with_capacity(names.len());
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(FeatureError::DuplicateName(n.clone()));
            }
        }
        for (n, v) in names.iter().zip(&values) {
            if matches!(v, Some(x) if !x.is_finite()) {
                return Err(FeatureError::NonFinite(n.clone()));
            }
        }
        Ok(FeatureVector {
            names,
            values,
            scope,
        })
    }

    /// Page-scope vector with every value present.
    ///
    /// Panics if the lengths differ or a value is non-finite; extractors own
    /// both sides, so either is a bug.
    pub fn page(names: Vec<String>, values: Vec<f64>) -> Self {
        Self::new(names, values.into_iter().map(Some).collect(), Scope::Page)
            .expect("extractor produced an invalid feature vector")
    }

    pub fn missing(names: Vec<String>, scope: Scope) -> Self {
        let values = vec![None; names.len()];
        FeatureVector {
            names,
            values,
            scope,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<Option<f64>> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Present values, with missing entries mapped to NaN.
    pub fn to_dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }

    /// Appends `other`, keeping this vector's scope.
    pub fn concat(mut self, other: &FeatureVector) -> Result<Self, FeatureError> {
        self.names.extend(other.names.iter().cloned());
        self.values.extend(other.values.iter().copied());
        Self::new(self.names, self.values, self.scope)
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_nan() {
        let e = FeatureVector::new(vec!["a".into(), "a".into()], vec![None, None], Scope::Page);
        assert_eq!(e.unwrap_err(), FeatureError::DuplicateName("a".into()));
        let e = FeatureVector::new(vec!["a".into()], vec![Some(f64::NAN)], Scope::Page);
        assert!(matches!(e, Err(FeatureError::NonFinite(_))));
    }

    #[test]
    fn missing_is_not_zero() {
        let v = FeatureVector::missing(vec!["a".into()], Scope::Session);
        assert_eq!(v.get("a"), Some(None));
        assert_ne!(v.get("a"), Some(Some(0.0)));
    }
}
