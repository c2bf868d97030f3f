//! Per-page feature extraction over snapshot bundles.
//!
//! A page yields the full page registry. When one stage fails, the columns
//! it owns are missing and the rest are still computed; an unreadable bundle
//! yields an all-missing row.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::aesthetics;
use crate::dom::parse_dom;
use crate::embed::{EmbeddingProvider, ProviderError};
use crate::features::{FeatureVector, Scope};
use crate::html_stats::{self, TagGroupSpec};
use crate::main_text::extract_main_text;
use crate::registry;
use crate::snapshot::{load_snapshot, PageSnapshot};
use crate::textcom;
use crate::vips::{self, VipsConfig};
use crate::visual::{self, VISUAL_FEATURES};
use crate::webrel::{self, FactEmbeddings, FactSet};

pub struct Extractor {
    html_registry: Vec<TagGroupSpec>,
    vips: VipsConfig,
    pdoc: u8,
    n_facts: usize,
    facts: FactEmbeddings,
    provider: Arc<dyn EmbeddingProvider>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageResult {
    pub id: String,
    pub features: FeatureVector,
    /// Stage failures, in pipeline order.
    pub errors: Vec<String>,
}

impl PageResult {
    pub fn failed(&self) -> bool {
        self.features.values().iter().all(Option::is_none)
    }
}

fn names_of(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Extractor {
    pub fn new(facts: &FactSet, provider: Arc<dyn EmbeddingProvider>) -> Result<Self, ProviderError> {
        Ok(Extractor {
            html_registry: html_stats::default_registry(),
            vips: VipsConfig::default(),
            pdoc: vips::DEFAULT_PDOC,
            n_facts: facts.len(),
            facts: FactEmbeddings::new(facts, provider.as_ref())?,
            provider,
        })
    }

    pub fn feature_names(&self) -> Vec<String> {
        registry::page_feature_names(self.n_facts)
    }

    pub fn extract(&self, s: &PageSnapshot) -> PageResult {
        let mut errors = Vec::new();
        let mut stage = |r: Result<FeatureVector, String>, names: Vec<String>, what: &str| match r {
            Ok(v) => v,
            Err(e) => {
                errors.push(format!("{what}: {e}"));
                FeatureVector::missing(names, Scope::Page)
            }
        };

        let dom = parse_dom(&s.html).map_err(|e| e.to_string());
        let html = stage(
            dom.as_ref()
                .map(|d| html_stats::html_features(d, &self.html_registry))
                .map_err(Clone::clone),
            html_stats::feature_names(&self.html_registry),
            "html",
        );
        let visual = stage(
            visual::visual_features(&s.screenshot),
            names_of(&VISUAL_FEATURES),
            "visual",
        );
        let tree = vips::segment_vips_with(&s.geometry, self.pdoc, &self.vips).map_err(|e| e.to_string());
        let layout = stage(
            tree.as_ref()
                .map(|t| vips::layout_features(t, &s.geometry))
                .map_err(Clone::clone),
            names_of(&vips::LAYOUT_FEATURES),
            "layout",
        );
        let aes = stage(
            tree.as_ref()
                .map(|t| aesthetics::aesthetics_features(t, &s.geometry))
                .map_err(Clone::clone),
            aesthetics::feature_names(),
            "aesthetics",
        );
        let text = dom.as_ref().map(extract_main_text).map_err(Clone::clone);
        let tex = stage(
            text.as_ref().map(textcom::textcom_features).map_err(Clone::clone),
            textcom::feature_names(),
            "texcom",
        );
        let rel = stage(
            text.as_ref().map_err(Clone::clone).and_then(|t| {
                webrel::relevance_with(t, &self.facts, self.provider.as_ref()).map_err(|e| e.to_string())
            }),
            webrel::feature_names(self.n_facts),
            "webrel",
        );

        let mut v = html;
        for part in [&visual, &layout, &aes, &tex, &rel] {
            v = v.concat(part).expect("families have disjoint names");
        }
        PageResult {
            id: s.id.clone(),
            features: v,
            errors,
        }
    }

    pub fn extract_dir(&self, bundle: &Path) -> PageResult {
        match load_snapshot(bundle) {
            Ok(s) => self.extract(&s),
            Err(e) => PageResult {
                id: bundle
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                features: FeatureVector::missing(self.feature_names(), Scope::Page),
                errors: vec![format!("load: {e}")],
            },
        }
    }
}

/// Bundle directories directly under `root`, sorted by name.
pub fn bundle_dirs(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Extracts every bundle on the current rayon pool, in sorted bundle order.
pub fn extract_all(ex: &Extractor, dirs: &[PathBuf]) -> Vec<PageResult> {
    dirs.par_iter().map(|d| ex.extract_dir(d)).collect()
}
