//! Tuple-sequence structures fed to the encoder, and the event ontology.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::{AmrEdge, AmrGraph};
use crate::candidates::{CandidateArgument, CandidateTrigger};
use crate::embedding::EmbeddingTable;

/// Null label for mentions and arguments that match no type or role.
pub const OTHER: &str = "Other";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventType {
    pub name: String,
    #[serde(default)]
    pub roles: Vec<String>,
    #[serde(default)]
    pub seen: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    pub types: Vec<EventType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("duplicate event type {0}")]
    DuplicateType(String),
    #[error("unknown event type {0}")]
    UnknownType(String),
    #[error("role {role} is not declared for type {type_name}")]
    UndeclaredRole { type_name: String, role: String },
    #[error("argument {0} is not a node of the graph")]
    UnknownNode(String),
    #[error("no path from trigger {trigger} to argument {argument}")]
    Unreachable { trigger: String, argument: String },
    #[error("argument {0} is the trigger itself")]
    SelfPath(String),
}

impl Ontology {
    pub fn new(types: Vec<EventType>) -> Result<Self, StructureError> {
        let ont = Self { types };
        ont.validate()?;
        Ok(ont)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let mut names = BTreeSet::new();
        for t in &self.types {
            if !names.insert(t.name.as_str()) {
                return Err(StructureError::DuplicateType(t.name.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&EventType> {
        self.types.iter().find(|t| t.name == name)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(|t| t.name.as_str())
    }

    /// Seen types, excluding a declared `Other` type.
    pub fn seen_types(&self) -> impl Iterator<Item = &EventType> {
        self.types.iter().filter(|t| t.seen && t.name != OTHER)
    }

    /// `(type, role)` pairs over all seen types, sorted by role then type.
    pub fn seen_role_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = self
            .seen_types()
            .flat_map(|t| t.roles.iter().map(move |r| (t.name.clone(), r.clone())))
            .collect();
        pairs.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
        pairs.dedup();
        pairs
    }

    /// The training view: only the seen types.
    pub fn seen_only(&self) -> Self {
        Self { types: self.types.iter().filter(|t| t.seen).cloned().collect() }
    }

    /// Copy with every `seen` flag cleared.
    pub fn without_seen_flags(&self) -> Self {
        let types = self.types.iter().map(|t| EventType { seen: false, ..t.clone() }).collect();
        Self { types }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MentionTuple {
    pub left: String,
    pub relation: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeTuple {
    pub type_name: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentionStructure {
    pub trigger_key: String,
    pub tuples: Vec<MentionTuple>,
    pub real_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeStructure {
    pub type_key: String,
    pub tuples: Vec<TypeTuple>,
    pub real_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentPath {
    pub argument_var: String,
    pub argument_key: String,
    pub tuples: Vec<MentionTuple>,
    pub real_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolePath {
    pub role_key: String,
    pub tuple: TypeTuple,
}

/// Structure caps; defaults are the reference settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub mention: usize,
    pub path: usize,
    pub type_roles: usize,
    pub role: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self { mention: 10, path: 5, type_roles: 5, role: 1 }
    }
}

pub fn build_mention_structure(
    graph: &AmrGraph,
    trigger: &CandidateTrigger,
    args: &[CandidateArgument],
    cap: usize,
) -> MentionStructure {
    let tuples: Vec<MentionTuple> = args
        .iter()
        .take(cap)
        .map(|a| {
            let right = graph.node(&a.var).map_or_else(|| a.concept.clone(), |n| n.concept.clone());
            MentionTuple { left: trigger.concept.clone(), relation: a.relation.clone(), right }
        })
        .collect();
    MentionStructure { trigger_key: trigger.sense_key.clone(), real_count: tuples.len(), tuples }
}

pub fn build_type_structure(ontology: &Ontology, type_name: &str, cap: usize) -> Result<TypeStructure, StructureError> {
    let ty = ontology.get(type_name).ok_or_else(|| StructureError::UnknownType(type_name.to_string()))?;
    Ok(type_structure_of(ty, cap))
}

pub fn type_structure_of(ty: &EventType, cap: usize) -> TypeStructure {
    let tuples: Vec<TypeTuple> = ty
        .roles
        .iter()
        .take(cap)
        .map(|r| TypeTuple { type_name: ty.name.clone(), role: r.clone() })
        .collect();
    TypeStructure { type_key: ty.name.clone(), real_count: tuples.len(), tuples }
}

/// `Other` is a valid role for every type, and an undeclared `Other`
/// type accepts only the `Other` role.
pub fn build_role_path(ontology: &Ontology, type_name: &str, role: &str) -> Result<RolePath, StructureError> {
    if role != OTHER {
        let ty = ontology.get(type_name).ok_or_else(|| StructureError::UnknownType(type_name.to_string()))?;
        if !ty.roles.iter().any(|r| r == role) {
            return Err(StructureError::UndeclaredRole { type_name: type_name.to_string(), role: role.to_string() });
        }
    } else if type_name != OTHER && ontology.get(type_name).is_none() {
        return Err(StructureError::UnknownType(type_name.to_string()));
    }
    Ok(role_path_unchecked(type_name, role))
}

pub fn role_path_unchecked(type_name: &str, role: &str) -> RolePath {
    RolePath {
        role_key: role.to_string(),
        tuple: TypeTuple { type_name: type_name.to_string(), role: role.to_string() },
    }
}

/// Edge read in its canonical direction: `(s, :R-of, t)` is `(t, :R, s)`.
fn canonical(e: &AmrEdge) -> (&str, String, &str) {
    match e.relation.strip_suffix("-of") {
        Some(base) if base.len() > 1 => (e.target.as_str(), base.to_string(), e.source.as_str()),
        _ => (e.source.as_str(), e.relation.clone(), e.target.as_str()),
    }
}

/// Shortest undirected path from the trigger to `argument_var`.
///
/// Each hop `u -> v` becomes `<concept(u), rel, concept(v)>`, where `rel`
/// is the canonical relation when the hop follows the canonical edge
/// direction and `rel-of` otherwise, so the first tuple always starts at
/// the trigger.
pub fn build_argument_path(
    graph: &AmrGraph,
    trigger: &CandidateTrigger,
    argument_var: &str,
    cap: usize,
) -> Result<ArgumentPath, StructureError> {
    let arg_node = graph.node(argument_var).ok_or_else(|| StructureError::UnknownNode(argument_var.to_string()))?;
    if argument_var == trigger.var {
        return Err(StructureError::SelfPath(argument_var.to_string()));
    }
    // Neighbors in canonical edge order: outgoing by (relation, target), then
    // incoming by (relation, source).
    let neighbors = |v: &str| -> Vec<(String, String)> {
        let mut out = Vec::new();
        for e in graph.outgoing(v).into_iter().chain(graph.incoming(v)) {
            let (a, rel, b) = canonical(e);
            let other = if e.source == v { e.target.as_str() } else { e.source.as_str() };
            let hop_rel = if a == v && b == other { rel } else { format!("{rel}-of") };
            out.push((other.to_string(), hop_rel));
        }
        out
    };
    let mut parent: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut queue = VecDeque::from([trigger.var.clone()]);
    let mut visited = BTreeSet::from([trigger.var.clone()]);
    while let Some(v) = queue.pop_front() {
        if v == argument_var {
            break;
        }
        for (next, rel) in neighbors(&v) {
            if visited.insert(next.clone()) {
                parent.insert(next.clone(), (v.clone(), rel));
                queue.push_back(next);
            }
        }
    }
    if !visited.contains(argument_var) {
        return Err(StructureError::Unreachable { trigger: trigger.var.clone(), argument: argument_var.to_string() });
    }
    let concept = |v: &str| graph.node(v).map(|n| n.concept.clone()).unwrap_or_default();
    let mut hops = Vec::new();
    let mut cur = argument_var.to_string();
    while let Some((prev, rel)) = parent.get(&cur) {
        hops.push(MentionTuple { left: concept(prev), relation: rel.clone(), right: concept(&cur) });
        cur = prev.clone();
    }
    hops.reverse();
    hops.truncate(cap);
    Ok(ArgumentPath {
        argument_var: argument_var.to_string(),
        argument_key: arg_node.concept.clone(),
        real_count: hops.len(),
        tuples: hops,
    })
}

/// Embedding keys a mention structure reads.
pub fn mention_keys(m: &MentionStructure) -> Vec<&str> {
    let mut keys = alloc::vec![m.trigger_key.as_str()];
    for t in &m.tuples {
        keys.push(&t.left);
        keys.push(&t.right);
    }
    keys
}

/// Keys that would fall through to the out-of-vocabulary vector.
pub fn unresolved_keys<'a>(keys: impl IntoIterator<Item = &'a str>, table: &EmbeddingTable) -> Vec<String> {
    let mut missing: Vec<String> = keys
        .into_iter()
        .filter(|k| table.resolve(k).is_none())
        .map(ToString::to_string)
        .collect();
    missing.sort();
    missing.dedup();
    missing
}
