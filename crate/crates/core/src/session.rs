//! Session logs: one participant per line of `sessions.jsonl`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::page_type::PageType;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationEvent {
    /// Seconds since session start.
    pub timestamp: f64,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_id: Option<String>,
    /// Present iff the event is a query submission.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    pub page_type: PageType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeTest {
    pub pre_correct: u32,
    pub post_correct: u32,
    pub n_items: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub user_id: String,
    pub events: Vec<NavigationEvent>,
    pub test: KnowledgeTest,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("session {user_id}: {rule}")]
    Invalid { user_id: String, rule: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SessionRecord {
    /// Checks the record invariants, returning the first violated rule.
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |rule: String| {
            Err(SessionError::Invalid {
                user_id: self.user_id.clone(),
                rule,
            })
        };
        let t = self.test;
        if t.n_items == 0 {
            return bad("n_items must be positive".into());
        }
        if t.pre_correct > t.n_items || t.post_correct > t.n_items {
            return bad("test scores exceed n_items".into());
        }
        for (i, e) in self.events.iter().enumerate() {
            if !(e.timestamp.is_finite() && e.timestamp >= 0.0) {
                return bad(format!("event {i}: timestamp must be finite and >= 0"));
            }
            if e.query.is_some() && e.page_type != PageType::Serp {
                return bad(format!("event {i}: query events must be serp pages"));
            }
        }
        if self
            .events
            .windows(2)
            .any(|w| w[1].timestamp < w[0].timestamp)
        {
            return bad("events are not ordered by timestamp".into());
        }
        Ok(())
    }
}

/// Reads and validates a JSON-lines session log. Blank lines are skipped.
pub fn read_sessions<R: BufRead>(reader: R) -> Result<Vec<SessionRecord>, SessionError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SessionRecord = serde_json::from_str(&line).map_err(|e| SessionError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_sessions<W: Write>(mut w: W, sessions: &[SessionRecord]) -> std::io::Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
