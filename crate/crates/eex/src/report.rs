//! Prediction lines and metric reports.

use std::fmt::Write as _;

use eex_core::eval::{MetricsReport, Prf, RecordPrediction};
use eex_core::inference::{EventMention, RoleAssignment};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredType {
    #[serde(rename = "type")]
    pub event_type: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentLine {
    pub var: String,
    pub role: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLine {
    pub trigger_var: String,
    pub trigger: String,
    #[serde(rename = "type")]
    pub event_type: String,
    pub score: f64,
    pub top_k: Vec<ScoredType>,
    pub args: Vec<ArgumentLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub id: String,
    pub events: Vec<EventLine>,
}

impl From<&EventMention> for EventLine {
    fn from(e: &EventMention) -> Self {
        Self {
            trigger_var: e.trigger_var.clone(),
            trigger: e.trigger.clone(),
            event_type: e.event_type.clone(),
            score: e.score,
            top_k: e.top_k.iter().map(|(t, s)| ScoredType { event_type: t.clone(), score: *s }).collect(),
            args: e.arguments.iter().map(|a| ArgumentLine { var: a.var.clone(), role: a.role.clone(), score: a.score }).collect(),
        }
    }
}

impl From<&RecordPrediction> for PredictionLine {
    fn from(p: &RecordPrediction) -> Self {
        Self { id: p.id.clone(), events: p.events.iter().map(EventLine::from).collect() }
    }
}

impl From<PredictionLine> for RecordPrediction {
    fn from(line: PredictionLine) -> Self {
        let events = line
            .events
            .into_iter()
            .map(|e| EventMention {
                trigger_var: e.trigger_var,
                trigger: e.trigger,
                event_type: e.event_type,
                score: e.score,
                top_k: e.top_k.into_iter().map(|t| (t.event_type, t.score)).collect(),
                arguments: e.args.into_iter().map(|a| RoleAssignment { var: a.var, role: a.role, score: a.score }).collect(),
            })
            .collect();
        Self { id: line.id, events }
    }
}

pub fn predictions_to_string(predictions: &[RecordPrediction]) -> String {
    let mut out = String::new();
    for p in predictions {
        out.push_str(&serde_json::to_string(&PredictionLine::from(p)).expect("predictions serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_predictions(text: &str) -> Result<Vec<RecordPrediction>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<PredictionLine>(l)
                .map(RecordPrediction::from)
                .map_err(|e| format!("line {}: {e}", i + 1))
        })
        .collect()
}

/// Aligned plain-text rendering of a metrics report.
pub fn metrics_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    writeln!(out, "# {}", report.argument_credit).unwrap();
    for (k, v) in &report.hit_at {
        writeln!(out, "{:<22}{:>8.4}", format!("hit@{k}"), v).unwrap();
    }
    writeln!(
        out,
        "{:<22}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}",
        "metric", "P", "R", "F1", "gold", "pred", "correct"
    )
    .unwrap();
    let rows: [(&str, &Prf); 4] = [
        ("trigger_id", &report.trigger_id),
        ("trigger_id_class", &report.trigger_id_class),
        ("arg_id", &report.arg_id),
        ("arg_id_class", &report.arg_id_class),
    ];
    for (name, p) in rows {
        writeln!(
            out,
            "{name:<22}{:>8.4}{:>8.4}{:>8.4}{:>8}{:>8}{:>8}",
            p.precision, p.recall, p.f1, p.num_gold, p.num_pred, p.num_correct
        )
        .unwrap();
    }
    out
}
