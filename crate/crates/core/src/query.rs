//! Query-behavior features of a session.

use std::collections::BTreeSet;

use crate::features::{FeatureVector, Scope};
use crate::page_type::PageType;
use crate::session::SessionRecord;

pub const PREFIX: &str = "query.";

pub const FEATURES: [&str; 11] = [
    "n_queries",
    "avg_query_len_tokens",
    "max_query_len_tokens",
    "min_query_len_tokens",
    "avg_query_len_chars",
    "n_unique_query_terms",
    "mean_jaccard_consecutive_queries",
    "n_serp_visits",
    "n_content_pages",
    "session_duration_minutes",
    "queries_per_minute",
];

pub fn feature_names() -> Vec<String> {
    FEATURES.iter().map(|f| format!("{PREFIX}{f}")).collect()
}

fn terms(q: &str) -> BTreeSet<String> {
    q.split_whitespace().map(str::to_lowercase).collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

pub fn query_features(s: &SessionRecord) -> FeatureVector {
    let queries: Vec<&str> = s
        .events
        .iter()
        .filter_map(|e| e.query.as_deref())
        .collect();
    let n = queries.len();
    let lens: Vec<usize> = queries.iter().map(|q| q.split_whitespace().count()).collect();
    let sets: Vec<BTreeSet<String>> = queries.iter().map(|q| terms(q)).collect();
    let count_type = |t: PageType| s.events.iter().filter(|e| e.page_type == t).count() as f64;

    let (t_min, t_max) = s
        .events
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.timestamp), hi.max(e.timestamp))
        });
    let minutes = if s.events.is_empty() { 0.0 } else { (t_max - t_min) / 60.0 };

    let mut v = vec![0.0; 11];
    v[0] = n as f64;
    if n > 0 {
        let nf = n as f64;
        v[1] = lens.iter().sum::<usize>() as f64 / nf;
        v[2] = *lens.iter().max().expect("n > 0") as f64;
        v[3] = *lens.iter().min().expect("n > 0") as f64;
        v[4] = queries.iter().map(|q| q.trim().chars().count()).sum::<usize>() as f64 / nf;
        v[5] = sets.iter().flatten().collect::<BTreeSet<_>>().len() as f64;
        if n > 1 {
            v[6] = sets.windows(2).map(|w| jaccard(&w[0], &w[1])).sum::<f64>() / (nf - 1.0);
        }
        if minutes > 0.0 {
            v[10] = nf / minutes;
        }
    }
    v[7] = count_type(PageType::Serp);
    v[8] = count_type(PageType::Content);
    v[9] = minutes;
    FeatureVector::page(feature_names(), v).with_scope(Scope::Session)
}
