//! Whole-corpus helpers shared by the CLI and the tests.

use eex_core::candidates::{identify_arguments, trigger_at};
use eex_core::corpus::SentenceRecord;
use eex_core::eval::RecordPrediction;
use eex_core::inference::{Extractor, InferenceError, TypedPrediction};
use eex_core::neural::{argument_score, NeuralError};
use eex_core::structures::{build_mention_structure, role_path_unchecked, StructureError, OTHER};
use eex_core::training::ArgumentInstance;
use eex_core::{EmbeddingTable, ModelParams, Ontology};
use rayon::prelude::*;

/// Rankings for every gold trigger whose type is not `Other`, paired with
/// the gold types.
pub fn gold_rankings(
    records: &[SentenceRecord],
    extractor: &Extractor<'_>,
) -> Result<(Vec<TypedPrediction>, Vec<String>), InferenceError> {
    let mut rankings = Vec::new();
    let mut golds = Vec::new();
    for record in records {
        for event in record.gold_events().iter().filter(|e| e.event_type != OTHER) {
            let trigger = trigger_at(&record.graph, &event.trigger_var)
                .ok_or_else(|| StructureError::UnknownNode(event.trigger_var.clone()))?;
            let args = identify_arguments(&record.graph, &trigger, extractor.catalog);
            let mention = build_mention_structure(&record.graph, &trigger, &args, extractor.caps.mention);
            rankings.push(extractor.rank(&mention)?);
            golds.push(event.event_type.clone());
        }
    }
    Ok((rankings, golds))
}

/// Fraction of argument instances with a real role whose best-scoring
/// role among the trigger type's roles is the gold one. `None` when there
/// is nothing to score.
pub fn role_accuracy(
    instances: &[ArgumentInstance],
    params: &ModelParams,
    table: &EmbeddingTable,
    ontology: &Ontology,
) -> Result<Option<f64>, NeuralError> {
    let mut total = 0usize;
    let mut correct = 0usize;
    for inst in instances.iter().filter(|a| a.gold_role != OTHER && a.trigger_type != OTHER) {
        let Some(ty) = ontology.get(&inst.trigger_type) else { continue };
        let scored = ty
            .roles
            .iter()
            .map(|r| Ok((r.clone(), argument_score(&inst.path, &role_path_unchecked(&ty.name, r), table, params)?)))
            .collect::<Result<Vec<_>, NeuralError>>()?;
        let ranking = TypedPrediction::from_scores(scored);
        total += 1;
        correct += usize::from(ranking.nth(1) == Some(inst.gold_role.as_str()));
    }
    Ok((total > 0).then(|| correct as f64 / total as f64))
}

/// Runs extraction on every record, on `jobs` threads, keeping input order.
pub fn predict_all(
    records: &[SentenceRecord],
    extractor: &Extractor<'_>,
    k: usize,
    jobs: usize,
) -> Result<Vec<RecordPrediction>, InferenceError> {
    let run = |r: &SentenceRecord| -> Result<RecordPrediction, InferenceError> {
        Ok(RecordPrediction { id: r.id.clone(), events: extractor.extract_events(r, k)? })
    };
    if jobs <= 1 {
        return records.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    pool.install(|| records.par_iter().map(run).collect())
}

