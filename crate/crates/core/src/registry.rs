//! The full feature registry: names, their order and their family prefixes.

use serde::Serialize;

use crate::{aesthetics, html_stats, query, textcom, vips, visual, webrel};

/// Feature families, addressable by name prefix in experiment configs.
pub const FAMILIES: [&str; 7] = [
    "viscom.html",
    "viscom.visual",
    "viscom.layout",
    "viscom.aesthetics",
    "texcom",
    "webrel",
    "query",
];

pub fn viscom_names() -> Vec<String> {
    let mut names = html_stats::feature_names(&html_stats::default_registry());
    names.extend(visual::VISUAL_FEATURES.iter().map(|s| s.to_string()));
    names.extend(vips::LAYOUT_FEATURES.iter().map(|s| s.to_string()));
    names.extend(aesthetics::feature_names());
    names
}

/// Per-page columns: VisCom, then TexCom, then one WebRel column per fact.
pub fn page_feature_names(n_facts: usize) -> Vec<String> {
    let mut names = viscom_names();
    names.extend(textcom::feature_names());
    names.extend(webrel::feature_names(n_facts));
    names
}

/// Per-session columns: averaged page columns, then query features.
pub fn session_feature_names(n_facts: usize) -> Vec<String> {
    let mut names = page_feature_names(n_facts);
    names.extend(query::feature_names());
    names
}

/// Whether `name` belongs to the family or set addressed by `prefix`.
pub fn in_family(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix)
        .is_some_and(|rest| rest.starts_with('.'))
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    pub family: String,
    pub count: usize,
    pub names: Vec<String>,
}

/// Registry summary, one entry per family, for `registry` export.
pub fn describe(n_facts: usize) -> Vec<FamilyEntry> {
    let all = session_feature_names(n_facts);
    FAMILIES
        .iter()
        .map(|f| {
            let names: Vec<String> = all.iter().filter(|n| in_family(n, f)).cloned().collect();
            FamilyEntry {
                family: f.to_string(),
                count: names.len(),
                names,
            }
        })
        .collect()
}
