//! Sentence records: a parsed graph plus optional gold event annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::AmrGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldArgument {
    pub var: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEvent {
    pub trigger_var: String,
    #[serde(rename = "type")]
    pub event_type: String,
    #[serde(default)]
    pub args: Vec<GoldArgument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub graph: AmrGraph,
    /// Optional node var to token index alignment.
    pub alignments: BTreeMap<String, usize>,
    pub gold: Option<Vec<GoldEvent>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("gold var {0} unresolved")]
    UnresolvedGoldVar(String),
    #[error("alignment var {0} unresolved")]
    UnresolvedAlignment(String),
    #[error("duplicate record id {0}")]
    DuplicateId(String),
}

impl SentenceRecord {
    /// Checks that every gold and alignment var names a graph node.
    pub fn validate(&self) -> Result<(), RecordError> {
        for event in self.gold.iter().flatten() {
            let vars = core::iter::once(&event.trigger_var).chain(event.args.iter().map(|a| &a.var));
            for var in vars {
                if !self.graph.contains(var) {
                    return Err(RecordError::UnresolvedGoldVar(var.clone()));
                }
            }
        }
        if let Some(var) = self.alignments.keys().find(|v| !self.graph.contains(v)) {
            return Err(RecordError::UnresolvedAlignment(var.clone()));
        }
        Ok(())
    }

    pub fn gold_events(&self) -> &[GoldEvent] {
        self.gold.as_deref().unwrap_or(&[])
    }
}

/// Checks that record ids are unique, returning the first duplicate.
pub fn check_unique_ids(records: &[SentenceRecord]) -> Result<(), RecordError> {
    let mut ids = BTreeSet::new();
    for r in records {
        if !ids.insert(r.id.as_str()) {
            return Err(RecordError::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}
