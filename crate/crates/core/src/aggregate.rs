//! Session tables from page tables and session logs.

use std::collections::HashMap;

use thiserror::Error;

use crate::features::{FeatureVector, Scope};
use crate::kg::{aggregate_session, compute_kg, filter_content_pages, label_classes, KgError, LabelRow};
use crate::query::{self, query_features};
use crate::session::SessionRecord;
use crate::table::FeatureTable;

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("session {user_id}: content event {index} has no snapshot id")]
    NoSnapshotId { user_id: String, index: usize },
    #[error("session {user_id}: snapshot `{snapshot_id}` is not in the page table")]
    MissingSnapshot { user_id: String, snapshot_id: String },
    #[error("duplicate session id `{0}`")]
    DuplicateSession(String),
    #[error(transparent)]
    Kg(#[from] KgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregated {
    pub features: FeatureTable,
    pub labels: Vec<LabelRow>,
}

/// One row per session, sorted by user id: the mean over its content pages
/// (every visit counts) followed by the query features, plus KG labels.
pub fn aggregate_sessions(sessions: &[SessionRecord], pages: &FeatureTable) -> Result<Aggregated, AggregateError> {
    let mut order: Vec<&SessionRecord> = sessions.iter().collect();
    order.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    if let Some(w) = order.windows(2).find(|w| w[0].user_id == w[1].user_id) {
        return Err(AggregateError::DuplicateSession(w[0].user_id.clone()));
    }

    let by_id: HashMap<&str, usize> = pages.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut names = pages.names.clone();
    names.extend(query::feature_names());
    let mut table = FeatureTable::new("user_id", Scope::Session, names);
    let mut kgs = Vec::with_capacity(order.len());
    for s in &order {
        let mut vs: Vec<FeatureVector> = Vec::new();
        for (index, e) in filter_content_pages(s).iter().enumerate() {
            let id = e.snapshot_id.as_ref().ok_or_else(|| AggregateError::NoSnapshotId {
                user_id: s.user_id.clone(),
                index,
            })?;
            let i = *by_id.get(id.as_str()).ok_or_else(|| AggregateError::MissingSnapshot {
                user_id: s.user_id.clone(),
                snapshot_id: id.clone(),
            })?;
            vs.push(FeatureVector::new(pages.names.clone(), pages.rows[i].clone(), Scope::Page).expect("table rows match the header"));
        }
        let v = aggregate_session(&pages.names, &vs, &query_features(s))?;
        table.push(&s.user_id, &v).map_err(|_| KgError::RegistryMismatch { index: 0 })?;
        kgs.push(compute_kg(&s.test));
    }
    let labels = label_classes(&kgs)?
        .into_iter()
        .zip(&order)
        .map(|(l, s)| LabelRow {
            user_id: s.user_id.clone(),
            kg: l.kg,
            z: l.z,
            class: l.class,
        })
        .collect();
    Ok(Aggregated { features: table, labels })
}
