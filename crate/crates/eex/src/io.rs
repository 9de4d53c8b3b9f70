//! Readers and writers for corpora, embeddings, lexicons, and ontologies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use eex_core::candidates::SenseLexicon;
use eex_core::corpus::{GoldEvent, SentenceRecord};
use eex_core::{parse_penman, serialize_penman, EmbeddingTable, Ontology};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl LoadError {
    pub(crate) fn format(path: &Path, message: impl ToString) -> Self {
        LoadError::Format { path: path.to_path_buf(), message: message.to_string() }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), LoadError> {
    fs::write(path, contents).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    tokens: Option<Vec<String>>,
    penman: Option<String>,
    #[serde(default)]
    alignments: BTreeMap<String, usize>,
    gold: Option<Vec<GoldEvent>>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    tokens: &'a [String],
    penman: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    alignments: &'a BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold: &'a Option<Vec<GoldEvent>>,
}

/// Parses a JSON-lines corpus. Blank lines are skipped; line numbers are
/// 1-based physical lines.
pub fn parse_corpus(text: &str) -> Result<Vec<SentenceRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| CorpusError { line: line_no, message };
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| err(format!("invalid record: {e}")))?;
        let id = raw.id.ok_or_else(|| err("missing field id".into()))?;
        let tokens = raw.tokens.ok_or_else(|| err("missing field tokens".into()))?;
        let penman = raw.penman.ok_or_else(|| err("missing field penman".into()))?;
        let graph = parse_penman(&penman).map_err(|e| err(e.to_string()))?;
        let record = SentenceRecord { id, tokens, graph, alignments: raw.alignments, gold: raw.gold };
        record.validate().map_err(|e| err(e.to_string()))?;
        if !ids.insert(record.id.clone()) {
            return Err(err(format!("duplicate record id {}", record.id)));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_corpus(path: &Path) -> Result<Vec<SentenceRecord>, LoadError> {
    parse_corpus(&read(path)?).map_err(|e| LoadError::format(path, e))
}

/// One JSON object per record, graphs in canonical PENMAN.
pub fn corpus_to_string(records: &[SentenceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = RecordOut {
            id: &r.id,
            tokens: &r.tokens,
            penman: serialize_penman(&r.graph),
            alignments: &r.alignments,
            gold: &r.gold,
        };
        out.push_str(&serde_json::to_string(&line).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, LoadError> {
    EmbeddingTable::from_text(&read(path)?).map_err(|e| LoadError::format(path, e))
}

/// Word2vec text format with a `count dim` header. Components use the
/// shortest representation that reads back to the same value.
pub fn embeddings_to_string(table: &EmbeddingTable) -> String {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (key, v) in table.entries() {
        out.push_str(key);
        for x in v {
            write!(out, " {x:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn load_lexicon(path: &Path) -> Result<SenseLexicon, LoadError> {
    SenseLexicon::parse_tsv(&read(path)?).map_err(|e| LoadError::format(path, e))
}

pub fn parse_ontology(text: &str) -> Result<Ontology, String> {
    let ontology: Ontology = serde_json::from_str(text).map_err(|e| e.to_string())?;
    ontology.validate().map_err(|e| e.to_string())?;
    Ok(ontology)
}

pub fn load_ontology(path: &Path) -> Result<Ontology, LoadError> {
    parse_ontology(&read(path)?).map_err(|e| LoadError::format(path, e))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, LoadError> {
    fs::read(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}
