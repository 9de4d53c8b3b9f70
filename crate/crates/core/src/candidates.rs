//! Candidate trigger and argument identification over AMR graphs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::amr::AmrGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
}

/// Lemmas that may trigger events: OntoNotes-mappable nouns and verbs
/// plus FrameNet verbal or nominal lexical units.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SenseLexicon {
    pub ontonotes: BTreeSet<(String, Pos)>,
    pub framenet_lu: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: expected 2 columns")]
    Columns { line: usize },
    #[error("line {line}: empty lemma")]
    EmptyLemma { line: usize },
    #[error("line {line}: unknown pos {pos}")]
    UnknownPos { line: usize, pos: String },
}

impl SenseLexicon {
    /// Parses the `lemma<TAB>pos` format; `pos` is `noun`, `verb`, or `lu`.
    /// Lines starting with `#` and blank lines are skipped, as is an
    /// optional `lemma pos` header.
    pub fn parse_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = if trimmed.contains('\t') {
                trimmed.split('\t').map(str::trim).collect()
            } else {
                trimmed.split_whitespace().collect()
            };
            let [lemma, pos] = cols[..] else {
                return Err(LexiconError::Columns { line });
            };
            if lemma == "lemma" && pos == "pos" {
                continue;
            }
            if lemma.is_empty() {
                return Err(LexiconError::EmptyLemma { line });
            }
            let lemma = lemma.to_lowercase();
            match pos {
                "noun" => {
                    lex.ontonotes.insert((lemma, Pos::Noun));
                }
                "verb" => {
                    lex.ontonotes.insert((lemma, Pos::Verb));
                }
                "lu" => {
                    lex.framenet_lu.insert(lemma);
                }
                other => return Err(LexiconError::UnknownPos { line, pos: other.to_string() }),
            }
        }
        Ok(lex)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.ontonotes.contains(&(lemma.to_string(), Pos::Noun))
            || self.ontonotes.contains(&(lemma.to_string(), Pos::Verb))
            || self.framenet_lu.contains(lemma)
    }
}

/// Strips a trailing sense suffix `-DD` (two digits): `dispatch-01` -> `dispatch`.
pub fn strip_sense_suffix(concept: &str) -> &str {
    let b = concept.as_bytes();
    let n = b.len();
    if n > 3 && b[n - 3] == b'-' && b[n - 2].is_ascii_digit() && b[n - 1].is_ascii_digit() {
        &concept[..n - 3]
    } else {
        concept
    }
}

/// Lowercased, sense-stripped lemma of a concept label.
pub fn lemma_of(concept: &str) -> String {
    strip_sense_suffix(concept).to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Core,
    NonCore,
    Temporal,
    Spatial,
}

/// The event-related AMR relation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationCatalog {
    pub core: BTreeSet<String>,
    pub noncore: BTreeSet<String>,
    pub temporal: BTreeSet<String>,
    pub spatial: BTreeSet<String>,
    pub prep_prefix: String,
}

impl Default for RelationCatalog {
    fn default() -> Self {
        default_catalog()
    }
}

fn set(labels: &[&str]) -> BTreeSet<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

pub fn default_catalog() -> RelationCatalog {
    RelationCatalog {
        core: set(&["ARG0", "ARG1", "ARG2", "ARG3", "ARG4"]),
        noncore: set(&["mod", "location", "instrument", "poss", "manner", "topic", "medium"]),
        temporal: set(&["year", "duration", "decade", "weekday", "time"]),
        spatial: set(&["destination", "path", "location"]),
        prep_prefix: "prep-".to_string(),
    }
}

impl RelationCatalog {
    /// Category of a relation label, with or without the leading colon.
    /// `location` sits in both non-core and spatial; it resolves to non-core.
    pub fn category(&self, relation: &str) -> Option<Category> {
        let label = relation.strip_prefix(':').unwrap_or(relation);
        if self.core.contains(label) {
            Some(Category::Core)
        } else if self.noncore.contains(label)
            || (label.len() > self.prep_prefix.len() && label.starts_with(self.prep_prefix.as_str()))
        {
            Some(Category::NonCore)
        } else if self.temporal.contains(label) {
            Some(Category::Temporal)
        } else if self.spatial.contains(label) {
            Some(Category::Spatial)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTrigger {
    pub var: String,
    pub concept: String,
    pub sense_key: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateArgument {
    pub var: String,
    /// Normalized relation with leading colon; `-of` inverses are undone.
    pub relation: String,
    pub concept: String,
}

/// Instance nodes whose lemma is in the lexicon, in depth-first order.
pub fn identify_triggers(graph: &AmrGraph, lexicon: &SenseLexicon) -> Vec<CandidateTrigger> {
    graph
        .depth_first()
        .into_iter()
        .filter(|n| !n.is_constant() && lexicon.contains(&lemma_of(&n.concept)))
        .map(|n| CandidateTrigger { var: n.var.clone(), concept: n.concept.clone(), sense_key: n.concept.clone() })
        .collect()
}

/// Builds a trigger candidate for an arbitrary node, bypassing the lexicon.
pub fn trigger_at(graph: &AmrGraph, var: &str) -> Option<CandidateTrigger> {
    graph
        .node(var)
        .map(|n| CandidateTrigger { var: n.var.clone(), concept: n.concept.clone(), sense_key: n.concept.clone() })
}

/// Arguments reachable over one catalog edge incident to the trigger,
/// ordered by (category, relation label, var).
pub fn identify_arguments(graph: &AmrGraph, trigger: &CandidateTrigger, catalog: &RelationCatalog) -> Vec<CandidateArgument> {
    let mut found: BTreeSet<(Category, String, String)> = BTreeSet::new();
    for e in graph.outgoing(&trigger.var) {
        if e.target == trigger.var {
            continue;
        }
        if let Some(cat) = catalog.category(&e.relation) {
            found.insert((cat, e.relation.clone(), e.target.clone()));
        }
    }
    for e in graph.incoming(&trigger.var) {
        if e.source == trigger.var {
            continue;
        }
        let Some(base) = e.relation.strip_suffix("-of") else {
            continue;
        };
        if let Some(cat) = catalog.category(base) {
            found.insert((cat, format!(":{}", base.trim_start_matches(':')), e.source.clone()));
        }
    }
    found
        .into_iter()
        .map(|(_, relation, var)| {
            let concept = graph.node(&var).map(|n| n.concept.clone()).unwrap_or_default();
            CandidateArgument { var, relation, concept }
        })
        .collect()
}
