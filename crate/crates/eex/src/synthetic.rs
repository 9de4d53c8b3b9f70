//! Generated corpora with known answers, used by the acceptance suite and
//! the CLI tests.

use std::collections::BTreeMap;
use std::path::Path;

use eex_core::amr::{AmrEdge, AmrGraph, AmrNode};
use eex_core::candidates::{Pos, SenseLexicon};
use eex_core::corpus::{GoldArgument, GoldEvent, SentenceRecord};
use eex_core::structures::{EventType, OTHER};
use eex_core::{EmbeddingTable, Ontology, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{corpus_to_string, embeddings_to_string, write, LoadError};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub records: Vec<SentenceRecord>,
    pub ontology: Ontology,
    pub lexicon: SenseLexicon,
    pub table: EmbeddingTable,
}

#[derive(Debug, Clone)]
pub struct ZeroShotFixture {
    /// Training records (seen types only) and the full ontology.
    pub train: Fixture,
    /// Mentions of the unseen type.
    pub held_out: Vec<SentenceRecord>,
    pub unseen: String,
    /// The seen type whose roles the unseen type shares.
    pub twin: String,
}

/// One argument slot of a generated mention.
struct Slot {
    relation: String,
    concept: String,
    role: Option<String>,
}

struct Builder {
    rng: ChaCha8Rng,
    table: EmbeddingTable,
    lexicon: String,
    records: Vec<SentenceRecord>,
    scale: f64,
}

impl Builder {
    fn new(seed: u64, d: usize, scale: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            table: EmbeddingTable::new(d).expect("d >= 1"),
            lexicon: String::new(),
            records: Vec::new(),
            scale,
        }
    }

    fn rescale(&self, mut v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x *= self.scale / n;
        }
        v
    }

    /// A fresh random vector of norm `scale`.
    fn random(&mut self, key: &str) -> Vec<f64> {
        let d = self.table.dim();
        let v: Vec<f64> = (0..d).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        let v = self.rescale(v);
        self.table.insert(key, v.clone()).expect("fresh key");
        v
    }

    /// `base` plus relative noise `noise`, rescaled to norm `scale`.
    fn near(&mut self, key: &str, base: &[f64], noise: f64) -> Vec<f64> {
        let v: Vec<f64> = base.iter().map(|x| x + noise * self.scale * self.rng.gen_range(-1.0..1.0)).collect();
        let v = self.rescale(v);
        self.table.insert(key, v.clone()).expect("fresh key");
        v
    }

    fn verb(&mut self, lemma: &str) {
        self.lexicon.push_str(&format!("{lemma}\tverb\n"));
    }

    fn mention(&mut self, id: String, trigger: &str, event_type: &str, slots: &[Slot]) -> SentenceRecord {
        let mut nodes = vec![AmrNode::instance("e", trigger)];
        let mut edges = Vec::new();
        let mut tokens = vec![trigger.trim_end_matches("-01").to_string()];
        let mut alignments = BTreeMap::from([("e".to_string(), 0)]);
        let mut args = Vec::new();
        for (i, slot) in slots.iter().enumerate() {
            let var = format!("a{i}");
            nodes.push(AmrNode::instance(var.clone(), slot.concept.clone()));
            edges.push(AmrEdge::new("e", slot.relation.clone(), var.clone()));
            alignments.insert(var.clone(), tokens.len());
            tokens.push(slot.concept.clone());
            if let Some(role) = &slot.role {
                args.push(GoldArgument { var, role: role.clone() });
            }
        }
        let graph = AmrGraph::new("e", nodes, edges).expect("generated graph is valid");
        let gold = vec![GoldEvent { trigger_var: "e".into(), event_type: event_type.into(), args }];
        SentenceRecord { id, tokens, graph, alignments, gold: Some(gold) }
    }

    fn finish(self, types: Vec<EventType>) -> Fixture {
        Fixture {
            records: self.records,
            ontology: Ontology::new(types).expect("unique type names"),
            lexicon: SenseLexicon::parse_tsv(&self.lexicon).expect("generated lexicon parses"),
            table: self.table,
        }
    }
}

/// Number of argument slots a generated mention fills, cycling 2..=roles.
fn arity(m: usize, roles: usize) -> usize {
    2 + m % (roles - 1)
}

/// `types` seen types with `roles` roles each and `per_type` mentions per
/// type. Mentions of a type share their argument concepts, so types and
/// roles are separable by structure alone.
pub fn separable(types: usize, roles: usize, per_type: usize, d: usize, seed: u64) -> Fixture {
    let mut b = Builder::new(seed, d, 1.0);
    let mut ontology = Vec::new();
    for t in 0..types {
        let name = format!("Type{t}");
        b.random(&name);
        let role_names: Vec<String> = (0..roles).map(|r| format!("Role{t}{r}")).collect();
        for r in 0..roles {
            b.random(&role_names[r]);
            b.random(&format!("arg{t}x{r}"));
        }
        for m in 0..per_type {
            let lemma = format!("ev{t}x{m}");
            b.random(&lemma);
            b.verb(&lemma);
            let slots: Vec<Slot> = (0..arity(m, roles).min(roles))
                .map(|r| Slot {
                    relation: format!(":ARG{r}"),
                    concept: format!("arg{t}x{r}"),
                    role: Some(role_names[r].clone()),
                })
                .collect();
            let record = b.mention(format!("s{t}-{m}"), &format!("{lemma}-01"), &name, &slots);
            b.records.push(record);
        }
        ontology.push(EventType { name, roles: role_names, seen: true });
    }
    b.random(OTHER);
    b.finish(ontology)
}

/// Zero-shot transfer setup.
///
/// `seen` types are trained on. The extra type `Unseen` declares exactly
/// the roles of `Seen0`, its held-out mentions follow `Seen0`'s argument
/// pattern, and every trigger embedding sits close to its type's
/// embedding, as a synonym would.
pub fn zero_shot(seen: usize, roles: usize, per_type: usize, held_out: usize, d: usize, seed: u64) -> ZeroShotFixture {
    const NOISE: f64 = 0.15;
    let mut b = Builder::new(seed, d, 3.0);
    let mut ontology = Vec::new();
    let mut role_names = Vec::new();
    for t in 0..seen {
        let name = format!("Seen{t}");
        let proto = b.random(&name);
        let names: Vec<String> = (0..roles).map(|r| format!("Role{t}{r}")).collect();
        for r in 0..roles {
            b.random(&names[r]);
            b.random(&format!("arg{t}x{r}"));
        }
        for m in 0..per_type {
            let lemma = format!("ev{t}x{m}");
            b.near(&lemma, &proto, NOISE);
            b.verb(&lemma);
            let slots: Vec<Slot> = (0..arity(m, roles).min(roles))
                .map(|r| Slot { relation: format!(":ARG{r}"), concept: format!("arg{t}x{r}"), role: Some(names[r].clone()) })
                .collect();
            let record = b.mention(format!("s{t}-{m}"), &format!("{lemma}-01"), &name, &slots);
            b.records.push(record);
        }
        ontology.push(EventType { name, roles: names.clone(), seen: true });
        role_names.push(names);
    }
    let unseen = String::from("Unseen");
    let proto = b.random(&unseen);
    let mut held = Vec::new();
    for m in 0..held_out {
        let lemma = format!("new{m}");
        b.near(&lemma, &proto, NOISE);
        b.verb(&lemma);
        let slots: Vec<Slot> = (0..arity(m, roles).min(roles))
            .map(|r| Slot { relation: format!(":ARG{r}"), concept: format!("arg0x{r}"), role: Some(role_names[0][r].clone()) })
            .collect();
        held.push(b.mention(format!("u-{m}"), &format!("{lemma}-01"), &unseen, &slots));
    }
    ontology.push(EventType { name: unseen.clone(), roles: role_names[0].clone(), seen: false });
    b.random(OTHER);
    ZeroShotFixture { train: b.finish(ontology), held_out: held, unseen, twin: "Seen0".into() }
}

/// A small corpus for end-to-end runs: three types, a negative `Other`
/// mention, and an unannotated temporal argument.
pub fn cli_fixture(seed: u64, d: usize) -> Fixture {
    let mut f = separable(3, 3, 3, d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let when: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    f.table.insert("date-entity", when).expect("fresh key");
    let idle: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    f.table.insert("idle", idle).expect("fresh key");
    let mut lexicon = String::from("idle\tverb\n");
    for (lemma, _) in f.lexicon.ontonotes.iter() {
        lexicon.push_str(&format!("{lemma}\tverb\n"));
    }
    f.lexicon = SenseLexicon::parse_tsv(&lexicon).expect("generated lexicon parses");

    // Unannotated temporal argument on the first record.
    let first = &mut f.records[0];
    let mut nodes: Vec<AmrNode> = first.graph.nodes().cloned().collect();
    let mut edges = first.graph.edges().to_vec();
    nodes.push(AmrNode::instance("t", "date-entity"));
    edges.push(AmrEdge::new("e", ":time", "t"));
    first.graph = AmrGraph::new("e", nodes, edges).expect("valid graph");

    let graph = AmrGraph::new(
        "e",
        vec![AmrNode::instance("e", "idle-01"), AmrNode::instance("a0", "arg0x0")],
        vec![AmrEdge::new("e", ":ARG0", "a0")],
    )
    .expect("valid graph");
    f.records.push(SentenceRecord {
        id: "neg-0".into(),
        tokens: vec!["idle".into(), "arg0x0".into()],
        graph,
        alignments: BTreeMap::from([("e".into(), 0), ("a0".into(), 1)]),
        gold: Some(vec![GoldEvent { trigger_var: "e".into(), event_type: OTHER.into(), args: vec![] }]),
    });
    f
}

pub fn lexicon_to_string(lexicon: &SenseLexicon) -> String {
    let mut out = String::from("lemma\tpos\n");
    for (lemma, pos) in &lexicon.ontonotes {
        let pos = match pos {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
        };
        out.push_str(&format!("{lemma}\t{pos}\n"));
    }
    for lemma in &lexicon.framenet_lu {
        out.push_str(&format!("{lemma}\tlu\n"));
    }
    out
}

/// Writes `corpus.jsonl`, `ontology.json`, `lexicon.tsv`, `embeddings.txt`
/// and a `config.json` that references them by relative path.
pub fn write_fixture(dir: &Path, fixture: &Fixture, config: &TrainConfig) -> Result<(), LoadError> {
    write(&dir.join("corpus.jsonl"), corpus_to_string(&fixture.records))?;
    write(&dir.join("ontology.json"), serde_json::to_string_pretty(&fixture.ontology).expect("ontology serializes"))?;
    write(&dir.join("lexicon.tsv"), lexicon_to_string(&fixture.lexicon))?;
    write(&dir.join("embeddings.txt"), embeddings_to_string(&fixture.table))?;
    let mut cfg = serde_json::to_value(config).expect("config serializes");
    let paths = [
        ("corpus", "corpus.jsonl"),
        ("ontology", "ontology.json"),
        ("lexicon", "lexicon.tsv"),
        ("embeddings", "embeddings.txt"),
    ];
    for (k, v) in paths {
        cfg[k] = serde_json::Value::from(v);
    }
    write(&dir.join("config.json"), serde_json::to_string_pretty(&cfg).expect("config serializes"))
}
