//! Hit@k and precision/recall/F1 scoring.
//!
//! Triggers and arguments match on token index when the record aligns the
//! node, otherwise on node var. Argument credit requires a correctly
//! identified trigger; classified argument credit also requires the
//! trigger's type to be correct.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentenceRecord;
use crate::inference::{EventMention, TypedPrediction};

pub const ARGUMENT_CREDIT_POLICY: &str =
    "arg_id requires a correctly identified trigger; arg_id_class additionally requires the correct trigger type";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{predictions} predictions but {golds} gold labels")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("no instances to score")]
    Empty,
    #[error("k must be at least 1")]
    ZeroK,
}

/// Fraction of instances whose gold label is within the top `k`.
pub fn hit_at_k<S: AsRef<str>>(predictions: &[TypedPrediction], golds: &[S], k: usize) -> Result<f64, EvalError> {
    if predictions.len() != golds.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), golds: golds.len() });
    }
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let hits = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p.top_k(k).iter().any(|(t, _)| t == g.as_ref()))
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrfMode {
    TriggerId,
    TriggerIdClass,
    ArgId,
    ArgIdClass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub num_gold: usize,
    pub num_pred: usize,
    pub num_correct: usize,
}

impl Prf {
    /// Zero denominators give 0.
    pub fn from_counts(num_gold: usize, num_pred: usize, num_correct: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(num_correct, num_pred);
        let recall = ratio(num_correct, num_gold);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1, num_gold, num_pred, num_correct }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordPrediction {
    pub id: String,
    pub events: Vec<EventMention>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Token(usize),
    Var(String),
}

fn key(record: Option<&SentenceRecord>, var: &str) -> Key {
    match record.and_then(|r| r.alignments.get(var)) {
        Some(&i) => Key::Token(i),
        None => Key::Var(String::from(var)),
    }
}

struct GoldTrigger {
    event_type: String,
    args: BTreeMap<Key, BTreeSet<String>>,
}

#[derive(Default)]
struct Counts {
    gold: usize,
    pred: usize,
    correct: usize,
}

fn score_record(record: Option<&SentenceRecord>, events: &[EventMention], mode: PrfMode, counts: &mut Counts) {
    let mut gold: BTreeMap<Key, GoldTrigger> = BTreeMap::new();
    for ev in record.map(|r| r.gold_events()).unwrap_or(&[]) {
        let k = key(record, &ev.trigger_var);
        if gold.contains_key(&k) {
            continue;
        }
        let mut args: BTreeMap<Key, BTreeSet<String>> = BTreeMap::new();
        for a in &ev.args {
            args.entry(key(record, &a.var)).or_default().insert(a.role.clone());
        }
        gold.insert(k, GoldTrigger { event_type: ev.event_type.clone(), args });
    }
    let arg_mode = matches!(mode, PrfMode::ArgId | PrfMode::ArgIdClass);
    counts.gold += if arg_mode { gold.values().map(|g| g.args.len()).sum() } else { gold.len() };

    let mut seen_triggers = BTreeSet::new();
    for ev in events {
        let tk = key(record, &ev.trigger_var);
        if !seen_triggers.insert(tk.clone()) {
            log::warn!("duplicate prediction for trigger {} ignored", ev.trigger_var);
            continue;
        }
        let matched = gold.get(&tk);
        let type_ok = matched.is_some_and(|g| g.event_type == ev.event_type);
        if !arg_mode {
            counts.pred += 1;
            let ok = match mode {
                PrfMode::TriggerId => matched.is_some(),
                _ => type_ok,
            };
            counts.correct += usize::from(ok);
            continue;
        }
        let mut seen_args = BTreeSet::new();
        for a in &ev.arguments {
            let ak = key(record, &a.var);
            if !seen_args.insert(ak.clone()) {
                log::warn!("duplicate argument {} for trigger {} ignored", a.var, ev.trigger_var);
                continue;
            }
            counts.pred += 1;
            let Some(g) = matched else { continue };
            let ok = match (mode, g.args.get(&ak)) {
                (PrfMode::ArgId, Some(_)) => true,
                (PrfMode::ArgIdClass, Some(roles)) => type_ok && roles.contains(&a.role),
                _ => false,
            };
            counts.correct += usize::from(ok);
        }
    }
}

/// Precision, recall, and F1 over records aligned by id. Predictions for
/// ids absent from `gold` count as spurious; gold records without a
/// prediction count as missed.
pub fn prf(predictions: &[RecordPrediction], gold: &[SentenceRecord], mode: PrfMode) -> Prf {
    let gold_by_id: BTreeMap<&str, &SentenceRecord> = gold.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut pred_by_id: BTreeMap<&str, &[EventMention]> = BTreeMap::new();
    for p in predictions {
        if pred_by_id.contains_key(p.id.as_str()) {
            log::warn!("duplicate prediction record {} ignored", p.id);
            continue;
        }
        pred_by_id.insert(&p.id, &p.events);
    }
    let ids: BTreeSet<&str> = gold_by_id.keys().chain(pred_by_id.keys()).copied().collect();
    let mut counts = Counts::default();
    for id in ids {
        let events = pred_by_id.get(id).copied().unwrap_or(&[]);
        score_record(gold_by_id.get(id).copied(), events, mode, &mut counts);
    }
    Prf::from_counts(counts.gold, counts.pred, counts.correct)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hit_at: BTreeMap<usize, f64>,
    pub trigger_id: Prf,
    pub trigger_id_class: Prf,
    pub arg_id: Prf,
    pub arg_id_class: Prf,
    pub argument_credit: String,
}

impl MetricsReport {
    pub fn new(hit_at: BTreeMap<usize, f64>, predictions: &[RecordPrediction], gold: &[SentenceRecord]) -> Self {
        Self {
            hit_at,
            trigger_id: prf(predictions, gold, PrfMode::TriggerId),
            trigger_id_class: prf(predictions, gold, PrfMode::TriggerIdClass),
            arg_id: prf(predictions, gold, PrfMode::ArgId),
            arg_id_class: prf(predictions, gold, PrfMode::ArgIdClass),
            argument_credit: String::from(ARGUMENT_CREDIT_POLICY),
        }
    }
}
