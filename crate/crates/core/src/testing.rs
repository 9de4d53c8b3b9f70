//! Random fixtures for property tests: AMR graphs and micro-models.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::amr::{AmrEdge, AmrGraph, AmrNode};
use crate::embedding::EmbeddingTable;
use crate::neural::ModelParams;
use crate::structures::{ArgumentPath, EventType, MentionStructure, MentionTuple, Ontology};
use crate::training::{ArgumentInstance, LossInstance, TriggerInstance};

const CONCEPTS: &[&str] = &["dispatch-01", "attack-01", "China", "troop", "city", "person", "go-02", "thing"];
const RELATIONS: &[&str] = &[":ARG0", ":ARG1", ":ARG2", ":mod", ":location", ":ARG0-of", ":time", ":prep-on"];

/// A connected graph of up to `max_nodes` nodes with re-entrancies,
/// inverse relations, and quoted and numeric constants.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> AmrGraph {
    let total = rng.gen_range(1..=max_nodes.max(1));
    let constants = if total > 1 { rng.gen_range(0..=total / 3) } else { 0 };
    let instances = total - constants;
    let mut nodes: Vec<AmrNode> = (0..instances)
        .map(|i| AmrNode::instance(format!("n{i}"), *CONCEPTS.choose(rng).unwrap()))
        .collect();
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |edges: &mut Vec<AmrEdge>, s: String, r: &str, t: String| {
        if seen.insert((s.clone(), r.to_string(), t.clone())) {
            edges.push(AmrEdge::new(s, r, t));
        }
    };
    for i in 1..instances {
        let parent = rng.gen_range(0..i);
        push(&mut edges, format!("n{parent}"), RELATIONS.choose(rng).unwrap(), format!("n{i}"));
    }
    if instances > 1 {
        for _ in 0..rng.gen_range(0..=instances / 2) {
            let s = rng.gen_range(0..instances);
            let t = rng.gen_range(0..instances);
            push(&mut edges, format!("n{s}"), RELATIONS.choose(rng).unwrap(), format!("n{t}"));
        }
    }
    for c in 0..constants {
        let var = format!("_c{c}");
        let quoted = rng.gen_bool(0.5);
        let literal = if quoted { format!("Name {c}") } else { format!("{}", rng.gen_range(1..3000)) };
        nodes.push(AmrNode::constant(var.clone(), literal, quoted));
        let s = rng.gen_range(0..instances);
        push(&mut edges, format!("n{s}"), RELATIONS.choose(rng).unwrap(), var);
    }
    AmrGraph::new("n0", nodes, edges).expect("generated graph is valid")
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// A small model with an embedding table covering every key it uses.
pub struct MicroModel {
    pub params: ModelParams,
    pub table: EmbeddingTable,
    pub ontology: Ontology,
}

const MICRO_CONCEPTS: &[&str] = &["trig-01", "argA", "argB", "argC", "midX"];
const MICRO_RELATIONS: &[&str] = &[":ARG0", ":ARG1", ":mod"];

impl MicroModel {
    /// Three types over `d`-dimensional random embeddings: `Alpha` and
    /// `Beta` seen, `Gamma` unseen.
    pub fn random<R: Rng>(rng: &mut R, d: usize, filters: usize) -> Self {
        let seed = rng.gen();
        let mut params = ModelParams::init(d, filters, 2, 1.0, seed).expect("valid micro model");
        // Perturb the bias away from zero so every parameter block is live.
        for b in params.conv_b.iter_mut() {
            *b = rng.gen_range(-0.3..0.3);
        }
        for rel in MICRO_RELATIONS {
            params.ensure_relation(rel);
        }
        let mut table = EmbeddingTable::new(d).expect("d >= 1");
        let keys = MICRO_CONCEPTS.iter().chain(&["Alpha", "Beta", "Gamma", "R1", "R2", "R3", "Other"]);
        for key in keys {
            table.insert(*key, random_vector(rng, d)).expect("dim matches");
        }
        let ontology = Ontology::new(vec![
            EventType { name: "Alpha".into(), roles: vec!["R1".into(), "R2".into()], seen: true },
            EventType { name: "Beta".into(), roles: vec!["R2".into(), "R3".into()], seen: true },
            EventType { name: "Gamma".into(), roles: vec!["R1".into(), "R3".into()], seen: false },
        ])
        .expect("unique names");
        Self { params, table, ontology }
    }

    /// A mention of 1..=3 tuples headed by the trigger concept.
    pub fn mention<R: Rng>(&self, rng: &mut R) -> MentionStructure {
        let n = rng.gen_range(1..=3);
        let tuples: Vec<MentionTuple> = (0..n)
            .map(|_| MentionTuple {
                left: "trig-01".into(),
                relation: MICRO_RELATIONS.choose(rng).unwrap().to_string(),
                right: MICRO_CONCEPTS[1..].choose(rng).unwrap().to_string(),
            })
            .collect();
        MentionStructure { trigger_key: "trig-01".into(), real_count: tuples.len(), tuples }
    }

    /// A path of 1..=3 hops from the trigger.
    pub fn path<R: Rng>(&self, rng: &mut R) -> ArgumentPath {
        let n = rng.gen_range(1..=3);
        let mut left = String::from("trig-01");
        let mut tuples = Vec::new();
        for _ in 0..n {
            let right = MICRO_CONCEPTS[1..].choose(rng).unwrap().to_string();
            tuples.push(MentionTuple {
                left: left.clone(),
                relation: MICRO_RELATIONS.choose(rng).unwrap().to_string(),
                right: right.clone(),
            });
            left = right;
        }
        ArgumentPath { argument_var: "a".into(), argument_key: left, real_count: tuples.len(), tuples }
    }

    pub fn trigger_instance<R: Rng>(&self, rng: &mut R, gold_type: &str) -> LossInstance {
        LossInstance::Trigger(TriggerInstance { mention: self.mention(rng), gold_type: gold_type.into() })
    }

    pub fn argument_instance<R: Rng>(&self, rng: &mut R, trigger_type: &str, gold_role: &str) -> LossInstance {
        LossInstance::Argument(ArgumentInstance {
            path: self.path(rng),
            trigger_type: trigger_type.into(),
            gold_role: gold_role.into(),
        })
    }
}
