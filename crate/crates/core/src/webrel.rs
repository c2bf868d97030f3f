//! Page relevance: best paragraph similarity for each topic fact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{check_vectors, cosine, EmbeddingProvider, ProviderError};
use crate::features::FeatureVector;
use crate::main_text::MainText;

pub const PREFIX: &str = "webrel.";

/// Example thunderstorm facts shipped with the crate.
pub const DEFAULT_FACTS_JSON: &str = include_str!("../data/facts.json");

#[derive(Debug, Error)]
pub enum FactsError {
    #[error("fact list is empty")]
    Empty,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed facts file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactSet {
    pub facts: Vec<String>,
}

impl FactSet {
    pub fn from_json(s: &str) -> Result<Self, FactsError> {
        let f: FactSet = serde_json::from_str(s)?;
        if f.facts.is_empty() {
            return Err(FactsError::Empty);
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, FactsError> {
        let s = std::fs::read_to_string(path).map_err(|source| FactsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&s)
    }

    pub fn default_facts() -> Self {
        Self::from_json(DEFAULT_FACTS_JSON).expect("shipped facts parse")
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

pub fn feature_names(n_facts: usize) -> Vec<String> {
    (1..=n_facts).map(|j| format!("{PREFIX}fact_{j:02}")).collect()
}

/// Fact embeddings, computed once and reused across pages.
pub struct FactEmbeddings {
    vectors: Vec<Vec<f64>>,
}

impl FactEmbeddings {
    pub fn new(f: &FactSet, p: &dyn EmbeddingProvider) -> Result<Self, ProviderError> {
        let vectors = p.embed_batch(&f.facts)?;
        check_vectors(&vectors, p.dim())?;
        if vectors.len() != f.len() {
            return Err(ProviderError::Failure("fact count mismatch".into()));
        }
        Ok(FactEmbeddings { vectors })
    }
}

pub fn relevance_with(
    t: &MainText,
    facts: &FactEmbeddings,
    p: &dyn EmbeddingProvider,
) -> Result<FeatureVector, ProviderError> {
    let n = facts.vectors.len();
    let mut values = vec![0.0; n];
    if !t.is_empty() {
        let paras = p.embed_batch(&t.paragraphs)?;
        check_vectors(&paras, p.dim())?;
        if paras.len() != t.paragraphs.len() {
            return Err(ProviderError::Failure("paragraph count mismatch".into()));
        }
        for (j, f) in facts.vectors.iter().enumerate() {
            values[j] = paras
                .iter()
                .map(|v| cosine(v, f))
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    Ok(FeatureVector::page(feature_names(n), values))
}

pub fn relevance_features(
    t: &MainText,
    f: &FactSet,
    p: &dyn EmbeddingProvider,
) -> Result<FeatureVector, ProviderError> {
    relevance_with(t, &FactEmbeddings::new(f, p)?, p)
}
