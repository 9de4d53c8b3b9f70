//! Zero-shot type ranking, role assignment, and the extraction pipeline.
//!
//! Seen and unseen types go through exactly the same scoring path; the
//! `seen` flag only matters for training.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::candidates::{identify_arguments, identify_triggers, RelationCatalog, SenseLexicon};
use crate::corpus::SentenceRecord;
use crate::embedding::EmbeddingTable;
use crate::linalg::cosine;
use crate::neural::{argument_score, encode_mention_side, encode_type_side, ModelParams, NeuralError};
use crate::structures::{
    build_argument_path, build_mention_structure, role_path_unchecked, type_structure_of, ArgumentPath, Caps,
    MentionStructure, Ontology, StructureError, OTHER,
};

/// All candidate types ordered by score, highest first; exact ties are
/// broken by label.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedPrediction {
    pub ranked: Vec<(String, f64)>,
}

impl TypedPrediction {
    pub fn from_scores(mut scores: Vec<(String, f64)>) -> Self {
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self { ranked: scores }
    }

    /// The `k`-th most probable type, 1-based.
    pub fn nth(&self, k: usize) -> Option<&str> {
        k.checked_sub(1).and_then(|i| self.ranked.get(i)).map(|(t, _)| t.as_str())
    }

    pub fn top(&self) -> Option<&(String, f64)> {
        self.ranked.first()
    }

    pub fn top_k(&self, k: usize) -> &[(String, f64)] {
        &self.ranked[..k.min(self.ranked.len())]
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|(t, _)| t.as_str())
    }

    /// 1-based rank of `label`.
    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.labels().position(|t| t == label).map(|i| i + 1)
    }
}

/// `[V_t; V_{S_t}]` for a mention.
pub fn mention_representation(
    mention: &MentionStructure,
    table: &EmbeddingTable,
    params: &ModelParams,
) -> Result<Vec<f64>, NeuralError> {
    Ok(encode_mention_side(&mention.trigger_key, &mention.tuples[..mention.real_count], table, params)?.representation())
}

/// `[V_y; V_{S_y}]` for every ontology type, or only for `only` when given.
pub fn type_representations(
    ontology: &Ontology,
    only: Option<&[String]>,
    table: &EmbeddingTable,
    params: &ModelParams,
    type_cap: usize,
) -> Result<Vec<(String, Vec<f64>)>, NeuralError> {
    ontology
        .types
        .iter()
        .filter(|t| only.is_none_or(|names| names.contains(&t.name)))
        .map(|t| {
            let s = type_structure_of(t, type_cap);
            let enc = encode_type_side(&s.type_key, &s.tuples, table, params)?;
            Ok((t.name.clone(), enc.representation()))
        })
        .collect()
}

pub fn rank_representation(mention_rep: &[f64], types: &[(String, Vec<f64>)]) -> TypedPrediction {
    TypedPrediction::from_scores(types.iter().map(|(name, rep)| (name.clone(), cosine(mention_rep, rep))).collect())
}

pub fn rank_types(
    mention: &MentionStructure,
    params: &ModelParams,
    table: &EmbeddingTable,
    ontology: &Ontology,
    type_cap: usize,
) -> Result<TypedPrediction, NeuralError> {
    let types = type_representations(ontology, None, table, params, type_cap)?;
    Ok(rank_representation(&mention_representation(mention, table, params)?, &types))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoleAssignment {
    pub var: String,
    pub role: String,
    pub score: f64,
}

/// Scores each path against the predicted type's roles plus `Other` and
/// keeps the arguments whose best role is not `Other`.
pub fn assign_roles(
    predicted_type: &str,
    paths: &[ArgumentPath],
    params: &ModelParams,
    table: &EmbeddingTable,
    ontology: &Ontology,
) -> Result<Vec<RoleAssignment>, NeuralError> {
    let mut roles: Vec<&str> = ontology
        .get(predicted_type)
        .map(|t| t.roles.iter().map(String::as_str).collect())
        .unwrap_or_default();
    if !roles.contains(&OTHER) {
        roles.push(OTHER);
    }
    let mut out = Vec::new();
    for path in paths {
        let scored = roles
            .iter()
            .map(|r| Ok((r.to_string(), argument_score(path, &role_path_unchecked(predicted_type, r), table, params)?)))
            .collect::<Result<Vec<_>, NeuralError>>()?;
        let ranking = TypedPrediction::from_scores(scored);
        if let Some((role, score)) = ranking.top() {
            if role != OTHER {
                out.push(RoleAssignment { var: path.argument_var.clone(), role: role.clone(), score: *score });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventMention {
    pub trigger_var: String,
    pub trigger: String,
    pub event_type: String,
    pub score: f64,
    pub top_k: Vec<(String, f64)>,
    pub arguments: Vec<RoleAssignment>,
}

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Loaded resources for end-to-end extraction, with type representations
/// computed once.
pub struct Extractor<'a> {
    pub lexicon: &'a SenseLexicon,
    pub catalog: &'a RelationCatalog,
    pub ontology: &'a Ontology,
    pub params: &'a ModelParams,
    pub table: &'a EmbeddingTable,
    pub caps: Caps,
    type_reps: Vec<(String, Vec<f64>)>,
}

impl<'a> Extractor<'a> {
    /// `only` restricts the ranked types (for pure zero-shot evaluation).
    pub fn new(
        lexicon: &'a SenseLexicon,
        catalog: &'a RelationCatalog,
        ontology: &'a Ontology,
        params: &'a ModelParams,
        table: &'a EmbeddingTable,
        caps: Caps,
        only: Option<&[String]>,
    ) -> Result<Self, NeuralError> {
        let type_reps = type_representations(ontology, only, table, params, caps.type_roles)?;
        Ok(Self { lexicon, catalog, ontology, params, table, caps, type_reps })
    }

    pub fn rank(&self, mention: &MentionStructure) -> Result<TypedPrediction, NeuralError> {
        Ok(rank_representation(&mention_representation(mention, self.table, self.params)?, &self.type_reps))
    }

    /// Candidate triggers, their structures, type ranking, and roles under
    /// the top-1 type. Mentions whose top type is `Other` are dropped.
    pub fn extract_events(&self, record: &SentenceRecord, k: usize) -> Result<Vec<EventMention>, InferenceError> {
        let graph = &record.graph;
        let mut events = Vec::new();
        for trigger in identify_triggers(graph, self.lexicon) {
            let args = identify_arguments(graph, &trigger, self.catalog);
            let mention = build_mention_structure(graph, &trigger, &args, self.caps.mention);
            let ranking = self.rank(&mention)?;
            let Some((event_type, score)) = ranking.top().cloned() else { continue };
            if event_type == OTHER {
                continue;
            }
            let paths = args
                .iter()
                .map(|a| build_argument_path(graph, &trigger, &a.var, self.caps.path))
                .collect::<Result<Vec<_>, _>>()?;
            let arguments = assign_roles(&event_type, &paths, self.params, self.table, self.ontology)?;
            events.push(EventMention {
                trigger_var: trigger.var,
                trigger: trigger.concept,
                event_type,
                score,
                top_k: ranking.top_k(k).to_vec(),
                arguments,
            });
        }
        Ok(events)
    }
}

pub fn extract_events(
    record: &SentenceRecord,
    lexicon: &SenseLexicon,
    catalog: &RelationCatalog,
    ontology: &Ontology,
    params: &ModelParams,
    table: &EmbeddingTable,
    caps: Caps,
    k: usize,
) -> Result<Vec<EventMention>, InferenceError> {
    Extractor::new(lexicon, catalog, ontology, params, table, caps, None)?.extract_events(record, k)
}
