use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::loss::{ArgumentInstance, TriggerInstance};
use crate::candidates::{identify_arguments, trigger_at, RelationCatalog};
use crate::corpus::SentenceRecord;
use crate::structures::{build_argument_path, build_mention_structure, Caps, StructureError, OTHER};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingData {
    pub triggers: Vec<TriggerInstance>,
    pub arguments: Vec<ArgumentInstance>,
}

/// Turns gold annotations into loss instances.
///
/// Every gold event yields one trigger instance. Its argument instances are
/// the gold arguments plus any candidate argument the annotation leaves out,
/// which is labeled `Other`.
pub fn prepare_instances(
    records: &[SentenceRecord],
    catalog: &RelationCatalog,
    caps: Caps,
) -> Result<TrainingData, StructureError> {
    let mut data = TrainingData::default();
    for record in records {
        let graph = &record.graph;
        for event in record.gold_events() {
            let trigger = trigger_at(graph, &event.trigger_var)
                .ok_or_else(|| StructureError::UnknownNode(event.trigger_var.clone()))?;
            let candidates = identify_arguments(graph, &trigger, catalog);
            let mention = build_mention_structure(graph, &trigger, &candidates, caps.mention);
            data.triggers.push(TriggerInstance { mention, gold_type: event.event_type.clone() });

            let mut labeled = BTreeSet::new();
            let mut push = |var: &str, role: String| -> Result<(), StructureError> {
                if var == trigger.var || !labeled.insert(String::from(var)) {
                    return Ok(());
                }
                let path = build_argument_path(graph, &trigger, var, caps.path)?;
                data.arguments.push(ArgumentInstance { path, trigger_type: event.event_type.clone(), gold_role: role });
                Ok(())
            };
            for arg in &event.args {
                push(&arg.var, arg.role.clone())?;
            }
            for c in &candidates {
                push(&c.var, String::from(OTHER))?;
            }
        }
    }
    Ok(data)
}
