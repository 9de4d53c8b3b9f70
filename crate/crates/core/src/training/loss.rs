//! Hinge ranking losses over cosine scores.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingTable;
use crate::neural::{evaluate_loss, ModelParams, NeuralError};
use crate::structures::{type_structure_of, ArgumentPath, MentionStructure, MentionTuple, Ontology, TypeTuple, OTHER};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// Sum of hinge terms over all negative types.
    PlainL1,
    /// Largest hinge term, with a separate branch for `Other` mentions.
    #[default]
    Discriminative,
}

/// Form of the hinge used when the gold label is `Other`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtherBranch {
    /// `max{0, m − C(top) + C(j)}`, taken literally.
    #[default]
    AsPrinted,
    /// `max{0, m + C(top) − C(j)}`, which pushes the top type down.
    SuppressTop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerInstance {
    pub mention: MentionStructure,
    /// Type name or `Other`.
    pub gold_type: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentInstance {
    pub path: ArgumentPath,
    pub trigger_type: String,
    pub gold_role: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossInstance {
    Trigger(TriggerInstance),
    Argument(ArgumentInstance),
}

impl LossInstance {
    /// Relation labels read by the mention-side encoder.
    pub fn relations(&self) -> impl Iterator<Item = &str> {
        let tuples: &[MentionTuple] = match self {
            LossInstance::Trigger(t) => &t.mention.tuples,
            LossInstance::Argument(a) => &a.path.tuples,
        };
        tuples.iter().map(|t| t.relation.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossSettings {
    pub variant: LossVariant,
    pub other_branch: OtherBranch,
    pub type_cap: usize,
}

impl Default for LossSettings {
    fn default() -> Self {
        Self { variant: LossVariant::default(), other_branch: OtherBranch::default(), type_cap: 5 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LossContext<'a> {
    pub table: &'a EmbeddingTable,
    pub ontology: &'a Ontology,
    pub settings: LossSettings,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("the plain ranking loss has no Other branch")]
    OtherInPlainLoss,
    #[error("unknown event type {0}")]
    UnknownType(String),
    #[error("role {role} is not declared for type {type_name}")]
    UndeclaredRole { type_name: String, role: String },
    #[error("role set for {0} is empty")]
    EmptyRoleSet(String),
    #[error("no seen types for the Other branch")]
    NoSeenTypes,
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// How candidate scores combine into a hinge loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingRule {
    /// `Σ_{j≠p} max{0, m − C_p + C_j}`.
    Sum { positive: usize },
    /// `max_{j≠p} max{0, m − C_p + C_j}`.
    Max { positive: usize },
    /// The pivot is the top-scoring candidate (first on ties), then either
    /// `max_{j≠p} max{0, m − C_p + C_j}` or, suppressing, `m + C_p − C_j`.
    Pivot { branch: OtherBranch },
}

/// Loss and `∂L/∂C_j` for every candidate. Terms at exactly zero are
/// inactive (zero subgradient).
pub fn ranking_loss(rule: RankingRule, scores: &[f64], margin: f64) -> (f64, Vec<f64>) {
    let mut coeff = vec![0.0; scores.len()];
    let (p, sign) = match rule {
        RankingRule::Sum { positive } => {
            let mut loss = 0.0;
            for (j, s) in scores.iter().enumerate() {
                if j == positive {
                    continue;
                }
                let term = margin - scores[positive] + s;
                if term > 0.0 {
                    loss += term;
                    coeff[positive] -= 1.0;
                    coeff[j] += 1.0;
                }
            }
            return (loss, coeff);
        }
        RankingRule::Max { positive } => (positive, 1.0),
        RankingRule::Pivot { branch } => {
            let mut top = 0;
            for (j, s) in scores.iter().enumerate() {
                if *s > scores[top] {
                    top = j;
                }
            }
            (top, if branch == OtherBranch::SuppressTop { -1.0 } else { 1.0 })
        }
    };
    // term_j = m − sign·C_p + sign·C_j
    let mut best: Option<(usize, f64)> = None;
    for (j, s) in scores.iter().enumerate() {
        if j == p {
            continue;
        }
        let term = margin - sign * scores[p] + sign * s;
        if best.is_none_or(|(_, b)| term > b) {
            best = Some((j, term));
        }
    }
    match best {
        Some((j, term)) if term > 0.0 => {
            coeff[p] -= sign;
            coeff[j] += sign;
            (term, coeff)
        }
        _ => (0.0, coeff),
    }
}

/// A type-side candidate: head key plus tensor-composed tuples.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub(crate) head: String,
    pub(crate) tuples: Vec<TypeTuple>,
}

/// Everything needed to score one instance.
pub(crate) struct Objective<'a> {
    pub(crate) head: &'a str,
    pub(crate) tuples: &'a [MentionTuple],
    pub(crate) candidates: Vec<Candidate>,
    pub(crate) rule: RankingRule,
}

fn type_candidate(ty: &crate::structures::EventType, cap: usize) -> Candidate {
    let s = type_structure_of(ty, cap);
    Candidate { head: s.type_key, tuples: s.tuples }
}

fn role_candidate(type_name: &str, role: &str) -> Candidate {
    Candidate {
        head: role.to_string(),
        tuples: vec![TypeTuple { type_name: type_name.to_string(), role: role.to_string() }],
    }
}

pub(crate) fn objective<'a>(inst: &'a LossInstance, ctx: &LossContext<'_>) -> Result<Objective<'a>, LossError> {
    let settings = ctx.settings;
    let ontology = ctx.ontology;
    match inst {
        LossInstance::Trigger(t) => {
            let mention = &t.mention;
            let tuples = &mention.tuples[..mention.real_count];
            if t.gold_type == OTHER {
                if settings.variant == LossVariant::PlainL1 {
                    return Err(LossError::OtherInPlainLoss);
                }
                let mut seen: Vec<_> = ontology.seen_types().collect();
                if seen.is_empty() {
                    return Err(LossError::NoSeenTypes);
                }
                seen.sort_by(|a, b| a.name.cmp(&b.name));
                let candidates = seen.into_iter().map(|ty| type_candidate(ty, settings.type_cap)).collect();
                return Ok(Objective {
                    head: &mention.trigger_key,
                    tuples,
                    candidates,
                    rule: RankingRule::Pivot { branch: settings.other_branch },
                });
            }
            let mut all: Vec<_> = ontology.types.iter().collect();
            all.sort_by(|a, b| a.name.cmp(&b.name));
            let positive = all
                .iter()
                .position(|ty| ty.name == t.gold_type)
                .ok_or_else(|| LossError::UnknownType(t.gold_type.clone()))?;
            let rule = match settings.variant {
                LossVariant::PlainL1 => RankingRule::Sum { positive },
                LossVariant::Discriminative => RankingRule::Max { positive },
            };
            let candidates = all.into_iter().map(|ty| type_candidate(ty, settings.type_cap)).collect();
            Ok(Objective { head: &mention.trigger_key, tuples, candidates, rule })
        }
        LossInstance::Argument(a) => {
            let path = &a.path;
            let tuples = &path.tuples[..path.real_count];
            if a.gold_role != OTHER && a.trigger_type != OTHER {
                let ty = ontology.get(&a.trigger_type).ok_or_else(|| LossError::UnknownType(a.trigger_type.clone()))?;
                if ty.roles.is_empty() {
                    return Err(LossError::EmptyRoleSet(ty.name.clone()));
                }
                let mut roles: Vec<&String> = ty.roles.iter().collect();
                roles.sort();
                roles.dedup();
                let positive = roles.iter().position(|r| **r == a.gold_role).ok_or_else(|| LossError::UndeclaredRole {
                    type_name: ty.name.clone(),
                    role: a.gold_role.clone(),
                })?;
                let candidates = roles.into_iter().map(|r| role_candidate(&ty.name, r)).collect();
                return Ok(Objective { head: &path.argument_key, tuples, candidates, rule: RankingRule::Max { positive } });
            }
            let pairs = ontology.seen_role_pairs();
            if pairs.is_empty() {
                return Err(LossError::EmptyRoleSet("seen types".to_string()));
            }
            let candidates = pairs.iter().map(|(ty, r)| role_candidate(ty, r)).collect();
            Ok(Objective {
                head: &path.argument_key,
                tuples,
                candidates,
                rule: RankingRule::Pivot { branch: settings.other_branch },
            })
        }
    }
}

/// Trigger loss with the sum over all negative types.
pub fn loss_l1(instance: &TriggerInstance, params: &ModelParams, ctx: &LossContext<'_>) -> Result<f64, LossError> {
    if instance.gold_type == OTHER {
        return Err(LossError::OtherInPlainLoss);
    }
    let ctx = LossContext { settings: LossSettings { variant: LossVariant::PlainL1, ..ctx.settings }, ..*ctx };
    evaluate_loss(&LossInstance::Trigger(instance.clone()), params, &ctx)
}

/// Discriminative trigger loss (max over negatives, `Other` branch).
pub fn loss_l1d(instance: &TriggerInstance, params: &ModelParams, ctx: &LossContext<'_>) -> Result<f64, LossError> {
    let ctx = LossContext { settings: LossSettings { variant: LossVariant::Discriminative, ..ctx.settings }, ..*ctx };
    evaluate_loss(&LossInstance::Trigger(instance.clone()), params, &ctx)
}

/// Discriminative argument-role loss.
pub fn loss_l2d(instance: &ArgumentInstance, params: &ModelParams, ctx: &LossContext<'_>) -> Result<f64, LossError> {
    evaluate_loss(&LossInstance::Argument(instance.clone()), params, ctx)
}
