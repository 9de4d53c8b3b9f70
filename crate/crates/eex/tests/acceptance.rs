//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use eex::pipeline::{gold_rankings, role_accuracy};
use eex::synthetic::{self, write_fixture};
use eex_core::amr::{parse_penman, serialize_penman, AmrEdge, AmrGraph, AmrNode, NodeKind};
use eex_core::candidates::RelationCatalog;
use eex_core::corpus::{GoldArgument, GoldEvent, SentenceRecord};
use eex_core::eval::{hit_at_k, prf, PrfMode, RecordPrediction};
use eex_core::inference::{
    mention_representation, rank_representation, rank_types, type_representations, EventMention, Extractor,
    RoleAssignment, TypedPrediction,
};
use eex_core::linalg::Tensor3;
use eex_core::neural::{
    argument_score, cnn_forward, compose_mention_tuple, compose_type_tuple, finite_diff_check, mention_score,
    smooth_within, DEFAULT_EPSILON,
};
use eex_core::structures::{build_role_path, build_type_structure};
use eex_core::testing::{random_graph, random_vector, MicroModel};
use eex_core::training::{
    loss_l1, loss_l1d, loss_l2d, prepare_instances, train_argument, train_trigger, ArgumentInstance, LossContext,
    LossSettings, LossVariant, OtherBranch, TriggerInstance,
};
use eex_core::{ModelParams, TrainConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1. Gradient correctness.
fn gradients() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let configs = [
        ("L1", LossVariant::PlainL1, OtherBranch::AsPrinted, 0),
        ("L1d", LossVariant::Discriminative, OtherBranch::AsPrinted, 0),
        ("L1d/Other/as_printed", LossVariant::Discriminative, OtherBranch::AsPrinted, 1),
        ("L1d/Other/suppress_top", LossVariant::Discriminative, OtherBranch::SuppressTop, 1),
        ("L2d", LossVariant::Discriminative, OtherBranch::AsPrinted, 2),
        ("L2d/Other/as_printed", LossVariant::Discriminative, OtherBranch::AsPrinted, 3),
        ("L2d/Other/suppress_top", LossVariant::Discriminative, OtherBranch::SuppressTop, 3),
    ];
    let mut worst = BTreeMap::new();
    let mut rejected = 0;
    for (name, variant, branch, kind) in configs {
        let mut accepted = 0;
        let mut attempt = 0usize;
        while accepted < 20 {
            ensure(attempt < 200, || format!("{name}: only {accepted} smooth models in 200 draws"))?;
            let d = 1 + attempt % 4;
            let f = 1 + (attempt / 4) % 4;
            attempt += 1;
            let model = MicroModel::random(&mut rng, d, f);
            let inst = match kind {
                0 => model.trigger_instance(&mut rng, ["Alpha", "Beta", "Gamma"][attempt % 3]),
                1 => model.trigger_instance(&mut rng, "Other"),
                2 => model.argument_instance(&mut rng, "Beta", ["R2", "R3"][attempt % 2]),
                _ => model.argument_instance(&mut rng, ["Alpha", "Other"][attempt % 2], "Other"),
            };
            let ctx = LossContext {
                table: &model.table,
                ontology: &model.ontology,
                settings: LossSettings { variant, other_branch: branch, type_cap: 5 },
            };
            if !smooth_within(&model.params, &inst, &ctx, DEFAULT_EPSILON).map_err(|e| e.to_string())? {
                rejected += 1;
                continue;
            }
            let err = finite_diff_check(&model.params, &inst, &ctx, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
            let w = worst.entry(name).or_insert(0.0f64);
            *w = w.max(err);
            accepted += 1;
        }
    }
    let max = worst.values().cloned().fold(0.0, f64::max);
    ensure(max < 1e-4, || format!("max relative error {max:.3e} per variant {worst:?}"))?;
    Ok(format!(
        "20 models per variant x {} variants, max relative error {max:.2e} ({rejected} draws with a kink inside the step resampled)",
        configs.len()
    ))
}

/// Isomorphism up to renaming of the synthetic constant vars.
fn isomorphic(a: &AmrGraph, b: &AmrGraph) -> bool {
    fn shape(g: &AmrGraph) -> (String, BTreeMap<String, String>, BTreeSet<(String, String, String)>, Vec<String>) {
        let inst = g.nodes().filter(|n| !n.is_constant()).map(|n| (n.var.clone(), n.concept.clone())).collect();
        let mut links = BTreeSet::new();
        let mut consts = Vec::new();
        for e in g.edges() {
            let t = g.node(&e.target).unwrap();
            match t.kind {
                NodeKind::Instance => {
                    links.insert((e.source.clone(), e.relation.clone(), e.target.clone()));
                }
                NodeKind::Constant { quoted } => {
                    consts.push(format!("{}|{}|{}|{}", e.source, e.relation, t.concept, quoted))
                }
            }
        }
        consts.sort();
        (g.root().to_string(), inst, links, consts)
    }
    a.node_count() == b.node_count() && a.edges().len() == b.edges().len() && shape(a) == shape(b)
}

// 2. PENMAN round-trip.
fn round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut reentrant, mut constants) = (0, 0);
    for i in 0..500 {
        let g = random_graph(&mut rng, 20);
        if g.nodes().any(|n| g.incoming(&n.var).len() > 1) {
            reentrant += 1;
        }
        if g.nodes().any(|n| n.is_constant()) {
            constants += 1;
        }
        let text = serialize_penman(&g);
        let back = parse_penman(&text).map_err(|e| format!("graph {i}: {e}: {text}"))?;
        ensure(isomorphic(&g, &back), || format!("graph {i} not preserved: {text}"))?;
    }
    ensure(reentrant > 50 && constants > 50, || format!("weak coverage: {reentrant} re-entrant, {constants} with constants"))?;
    Ok(format!("500 graphs ({reentrant} re-entrant, {constants} with constants)"))
}

// 3. Encoder invariances.
fn encoder() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    for case in 0..200 {
        let d = rng.gen_range(1..=8);
        let f = rng.gen_range(1..=16);
        let mut params = ModelParams::init(d, f, 2, 1.0, rng.gen()).unwrap();
        for b in params.conv_b.iter_mut() {
            *b = rng.gen_range(-0.5..0.5);
        }
        params.ensure_relation(":ARG0");
        let real = rng.gen_range(1..=10);
        let pad = rng.gen_range(1..=5);
        let mut tuples = Vec::new();
        for _ in 0..real {
            let v1 = random_vector(&mut rng, d);
            let v2 = random_vector(&mut rng, d);
            let out = if rng.gen_bool(0.5) {
                compose_mention_tuple(&v1, &v2, &params.relations[":ARG0"]).unwrap()
            } else {
                compose_type_tuple(&v1, &v2, &params.tensor).unwrap()
            };
            ensure(out.iter().all(|x| *x > -1.0 && *x < 1.0), || format!("case {case}: output outside (-1, 1)"))?;
            let sym = compose_type_tuple(&v1, &v2, &params.tensor.symmetrized()).unwrap();
            let plain = compose_type_tuple(&v1, &v2, &params.tensor).unwrap();
            let gap = plain.iter().zip(&sym).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(gap <= 1e-12, || format!("case {case}: symmetrization moved output by {gap:e}"))?;
            tuples.push(out);
        }
        let mut padded = tuples.clone();
        padded.extend(std::iter::repeat_n(vec![0.0; 2 * d], pad));
        let base = cnn_forward(&padded, real, &params).unwrap();
        let mut perm = tuples.clone();
        perm.shuffle(&mut rng);
        perm.extend(std::iter::repeat_n(vec![0.0; 2 * d], pad));
        ensure(bits(&cnn_forward(&perm, real, &params).unwrap()) == bits(&base), || format!("case {case}: permutation"))?;
        let mut doubled = padded.clone();
        doubled.extend(std::iter::repeat_n(vec![0.0; 2 * d], pad));
        ensure(bits(&cnn_forward(&doubled, real, &params).unwrap()) == bits(&base), || format!("case {case}: padding"))?;
    }
    // Slice symmetrization as an explicit oracle on a hand tensor.
    let u = Tensor3::from_vec(2, vec![0.0, 1.0, -1.0, 0.0, 2.0, 3.0, 5.0, 7.0]);
    let s = u.symmetrized();
    ensure(s.slice(0) == [0.0, 0.0, 0.0, 0.0] && s.slice(1) == [2.0, 4.0, 4.0, 7.0], || format!("{:?}", s.as_slice()))?;
    Ok("200 structures: permutation and padding bitwise, symmetrization within 1e-12, outputs in (-1, 1)".into())
}

// 4. Ranking invariance under scaling.
fn ranking_scale() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let model = MicroModel::random(&mut rng, 4, 6);
        let mention = model.mention(&mut rng);
        let rep = mention_representation(&mention, &model.table, &model.params).unwrap();
        let types = type_representations(&model.ontology, None, &model.table, &model.params, 5).unwrap();
        let base = rank_types(&mention, &model.params, &model.table, &model.ontology, 5).unwrap();
        let order: Vec<&str> = base.labels().collect();
        for alpha in [0.1, 3.0, 100.0] {
            let scaled: Vec<f64> = rep.iter().map(|x| alpha * x).collect();
            let ranked = rank_representation(&scaled, &types);
            let got: Vec<&str> = ranked.labels().collect();
            ensure(got == order, || format!("case {case}, alpha {alpha}: {got:?} vs {order:?}"))?;
        }
    }
    Ok("100 cases x alpha in {0.1, 3, 100}: ordering unchanged".into())
}

fn fixture_config(d: usize, filters: usize, epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig { d, filters, epochs, seed, learning_rate: 0.1, margin: 1.0, ..TrainConfig::default() }
}

// 5. Overfit fixture.
fn overfit() -> Check {
    let fx = synthetic::separable(5, 4, 4, 8, 5);
    let config = fixture_config(8, 16, 200, 5);
    let catalog = RelationCatalog::default();
    let data = prepare_instances(&fx.records, &catalog, config.caps()).map_err(|e| e.to_string())?;
    ensure(data.triggers.len() == 20, || format!("{} mentions", data.triggers.len()))?;
    let trig = train_trigger(&data.triggers, &config, &fx.ontology, &fx.table).map_err(|e| e.to_string())?;
    let ex = Extractor::new(&fx.lexicon, &catalog, &fx.ontology, &trig.params, &fx.table, config.caps(), None)
        .map_err(|e| e.to_string())?;
    let (rankings, golds) = gold_rankings(&fx.records, &ex).map_err(|e| e.to_string())?;
    let hit1 = hit_at_k(&rankings, &golds, 1).map_err(|e| e.to_string())?;
    let args = train_argument(&data.arguments, &config, &fx.ontology, &fx.table, trig.params.clone())
        .map_err(|e| e.to_string())?;
    let acc = role_accuracy(&data.arguments, &args.params, &fx.table, &fx.ontology)
        .map_err(|e| e.to_string())?
        .unwrap_or(0.0);
    ensure(hit1 == 1.0 && acc == 1.0, || format!("trigger hit@1 {hit1}, role accuracy {acc}"))?;
    Ok(format!(
        "trigger hit@1 {hit1}, role accuracy {acc} over {} arguments (final losses {:.4} / {:.4})",
        data.arguments.len(),
        trig.epoch_losses.last().unwrap(),
        args.epoch_losses.last().unwrap()
    ))
}

// 6. Zero-shot transfer.
fn zero_shot() -> Check {
    let fx = synthetic::zero_shot(4, 4, 5, 10, 8, 6);
    let config = fixture_config(8, 16, 100, 6);
    let catalog = RelationCatalog::default();
    let train = &fx.train;
    let data = prepare_instances(&train.records, &catalog, config.caps()).map_err(|e| e.to_string())?;
    let seen = train.ontology.seen_only();
    ensure(seen.get(&fx.unseen).is_none(), || "unseen type leaked into training".into())?;
    let trig = train_trigger(&data.triggers, &config, &seen, &train.table).map_err(|e| e.to_string())?;
    let ex = Extractor::new(&train.lexicon, &catalog, &train.ontology, &trig.params, &train.table, config.caps(), None)
        .map_err(|e| e.to_string())?;
    let (rankings, golds) = gold_rankings(&fx.held_out, &ex).map_err(|e| e.to_string())?;
    ensure(golds.iter().all(|g| *g == fx.unseen) && golds.len() == 10, || format!("{golds:?}"))?;
    let hits = rankings.iter().filter(|r| r.nth(1) == Some(fx.unseen.as_str())).count();
    let rate = hits as f64 / rankings.len() as f64;
    let twin_first = rankings.iter().filter(|r| r.nth(1) == Some(fx.twin.as_str())).count();
    // Same ranking from the untrained initialization, reported for context.
    let init = config.init_params().map_err(|e| e.to_string())?;
    let ex0 = Extractor::new(&train.lexicon, &catalog, &train.ontology, &init, &train.table, config.caps(), None)
        .map_err(|e| e.to_string())?;
    let (base, _) = gold_rankings(&fx.held_out, &ex0).map_err(|e| e.to_string())?;
    let base_hits = base.iter().filter(|r| r.nth(1) == Some(fx.unseen.as_str())).count();
    ensure(rate >= 0.9, || {
        format!("{hits}/10 held-out mentions rank {} first ({twin_first} rank {} first)", fx.unseen, fx.twin)
    })?;
    Ok(format!("{hits}/10 held-out mentions rank {} first (untrained initialization: {base_hits}/10)", fx.unseen))
}

fn eex(args: &[&str], dir: &Path) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_eex")).args(args).current_dir(dir).output().map_err(|e| e.to_string())
}

fn end_to_end(dir: &Path, jobs: &str) -> Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
    let fx = synthetic::cli_fixture(7, 8);
    let config = fixture_config(8, 8, 15, 7);
    write_fixture(dir, &fx, &config).map_err(|e| e.to_string())?;
    let steps: [&[&str]; 3] = [
        &["train-trigger", "--config", "config.json", "--out", "trigger.ckpt"],
        &["train-arg", "--config", "config.json", "--checkpoint", "trigger.ckpt", "--out", "model.ckpt"],
        &["predict", "--config", "config.json", "--checkpoint", "model.ckpt", "--k", "3", "--jobs", jobs, "--out", "pred.jsonl"],
    ];
    for args in steps {
        let out = eex(args, dir)?;
        ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    }
    let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| e.to_string());
    Ok((read("trigger.ckpt")?, read("model.ckpt")?, read("pred.jsonl")?))
}

// 7. Determinism.
fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = end_to_end(a.path(), "1")?;
    let second = end_to_end(b.path(), "4")?;
    ensure(first.0 == second.0, || "trigger checkpoints differ".into())?;
    ensure(first.1 == second.1, || "argument checkpoints differ".into())?;
    ensure(first.2 == second.2, || "prediction files differ".into())?;
    ensure(!first.2.is_empty(), || "empty predictions".into())?;
    Ok(format!("checkpoints ({} and {} bytes) and predictions ({} bytes) identical across runs", first.0.len(), first.1.len(), first.2.len()))
}

// Reference metrics, written independently of the library.
fn ref_key(record: Option<&SentenceRecord>, var: &str) -> String {
    match record.and_then(|r| r.alignments.get(var)) {
        Some(i) => format!("tok:{i}"),
        None => format!("var:{var}"),
    }
}

fn ref_hit(rankings: &[Vec<(String, f64)>], golds: &[String], k: usize) -> f64 {
    let mut hits = 0;
    for (scores, gold) in rankings.iter().zip(golds) {
        let g = scores.iter().find(|(t, _)| t == gold).map(|(_, s)| *s);
        if let Some(gs) = g {
            // Rank = number of labels strictly ahead of gold under (score desc, label asc), plus one.
            let ahead = scores.iter().filter(|(t, s)| *s > gs || (*s == gs && t < gold)).count();
            if ahead < k {
                hits += 1;
            }
        }
    }
    hits as f64 / rankings.len() as f64
}

fn ref_prf(preds: &[RecordPrediction], gold: &[SentenceRecord], mode: PrfMode) -> (usize, usize, usize) {
    let arg_mode = matches!(mode, PrfMode::ArgId | PrfMode::ArgIdClass);
    let mut ids: Vec<String> = gold.iter().map(|r| r.id.clone()).collect();
    for p in preds {
        if !ids.contains(&p.id) {
            ids.push(p.id.clone());
        }
    }
    let (mut ng, mut np, mut nc) = (0, 0, 0);
    for id in &ids {
        let rec = gold.iter().find(|r| &r.id == id);
        // gold triggers: first event per key
        let mut gtrig: Vec<(String, &GoldEvent)> = Vec::new();
        for ev in rec.and_then(|r| r.gold.as_ref()).map(|g| g.as_slice()).unwrap_or(&[]) {
            let k = ref_key(rec, &ev.trigger_var);
            if !gtrig.iter().any(|(x, _)| *x == k) {
                gtrig.push((k, ev));
            }
        }
        let gold_args = |ev: &GoldEvent| -> Vec<String> {
            let mut keys: Vec<String> = ev.args.iter().map(|a| ref_key(rec, &a.var)).collect();
            keys.sort();
            keys.dedup();
            keys
        };
        ng += if arg_mode { gtrig.iter().map(|(_, ev)| gold_args(ev).len()).sum() } else { gtrig.len() };
        let Some(p) = preds.iter().find(|p| &p.id == id) else { continue };
        let mut seen_t: Vec<String> = Vec::new();
        for ev in &p.events {
            let k = ref_key(rec, &ev.trigger_var);
            if seen_t.contains(&k) {
                continue;
            }
            seen_t.push(k.clone());
            let g = gtrig.iter().find(|(x, _)| *x == k).map(|(_, e)| *e);
            let type_ok = g.is_some_and(|g| g.event_type == ev.event_type);
            if !arg_mode {
                np += 1;
                if (mode == PrfMode::TriggerId && g.is_some()) || (mode == PrfMode::TriggerIdClass && type_ok) {
                    nc += 1;
                }
                continue;
            }
            let mut seen_a: Vec<String> = Vec::new();
            for a in &ev.arguments {
                let ak = ref_key(rec, &a.var);
                if seen_a.contains(&ak) {
                    continue;
                }
                seen_a.push(ak.clone());
                np += 1;
                if let Some(g) = g {
                    let matching: Vec<&GoldArgument> = g.args.iter().filter(|x| ref_key(rec, &x.var) == ak).collect();
                    let ok = match mode {
                        PrfMode::ArgId => !matching.is_empty(),
                        _ => type_ok && matching.iter().any(|x| x.role == a.role),
                    };
                    if ok {
                        nc += 1;
                    }
                }
            }
        }
    }
    (ng, np, nc)
}

fn random_case(rng: &mut ChaCha8Rng) -> (Vec<RecordPrediction>, Vec<SentenceRecord>) {
    let types = ["A", "B", "C"];
    let roles = ["r1", "r2", "r3"];
    let n_records = rng.gen_range(0..4);
    let mut gold = Vec::new();
    let mut preds = Vec::new();
    for r in 0..n_records {
        let n = rng.gen_range(1..6);
        let nodes: Vec<AmrNode> = (0..n).map(|i| AmrNode::instance(format!("v{i}"), "x")).collect();
        let edges: Vec<AmrEdge> = (1..n).map(|i| AmrEdge::new("v0", ":ARG0", format!("v{i}"))).collect();
        let graph = AmrGraph::new("v0", nodes, edges).unwrap();
        let var = |rng: &mut ChaCha8Rng| format!("v{}", rng.gen_range(0..n));
        let mut alignments = BTreeMap::new();
        for i in 0..n {
            if rng.gen_bool(0.4) {
                alignments.insert(format!("v{i}"), rng.gen_range(0..4));
            }
        }
        let mut events = Vec::new();
        for _ in 0..rng.gen_range(0..3) {
            let args = (0..rng.gen_range(0..3))
                .map(|_| GoldArgument { var: var(rng), role: roles.choose(rng).unwrap().to_string() })
                .collect();
            events.push(GoldEvent { trigger_var: var(rng), event_type: types.choose(rng).unwrap().to_string(), args });
        }
        let id = format!("r{r}");
        if rng.gen_bool(0.85) {
            let mut pe = Vec::new();
            for _ in 0..rng.gen_range(0..4) {
                let arguments = (0..rng.gen_range(0..3))
                    .map(|_| RoleAssignment { var: var(rng), role: roles.choose(rng).unwrap().to_string(), score: 0.5 })
                    .collect();
                pe.push(EventMention {
                    trigger_var: var(rng),
                    trigger: "x".into(),
                    event_type: types.choose(rng).unwrap().to_string(),
                    score: 0.5,
                    top_k: vec![],
                    arguments,
                });
            }
            preds.push(RecordPrediction { id: id.clone(), events: pe });
        }
        let gold_field = if rng.gen_bool(0.9) { Some(events) } else { None };
        gold.push(SentenceRecord { id, tokens: vec![], graph, alignments, gold: gold_field });
    }
    if rng.gen_bool(0.2) {
        preds.push(RecordPrediction {
            id: "stray".into(),
            events: vec![EventMention {
                trigger_var: "q".into(),
                trigger: "x".into(),
                event_type: "A".into(),
                score: 0.1,
                top_k: vec![],
                arguments: vec![RoleAssignment { var: "w".into(), role: "r1".into(), score: 0.1 }],
            }],
        });
    }
    (preds, gold)
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

// 8. Metric oracle.
fn metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut zero_cases = 0;
    for case in 0..100 {
        let n = rng.gen_range(1..8);
        let labels = ["A", "B", "C", "D"];
        let rankings: Vec<Vec<(String, f64)>> = (0..n)
            .map(|_| labels.iter().map(|l| (l.to_string(), (rng.gen_range(0..4) as f64) / 4.0)).collect())
            .collect();
        let golds: Vec<String> = (0..n).map(|_| labels.choose(&mut rng).unwrap().to_string()).collect();
        let typed: Vec<TypedPrediction> = rankings.iter().map(|r| TypedPrediction::from_scores(r.clone())).collect();
        for k in 1..=4 {
            let got = hit_at_k(&typed, &golds, k).unwrap();
            let want = ref_hit(&rankings, &golds, k);
            ensure(got == want, || format!("case {case}: hit@{k} {got} vs {want}"))?;
        }
        let (preds, gold) = random_case(&mut rng);
        for mode in [PrfMode::TriggerId, PrfMode::TriggerIdClass, PrfMode::ArgId, PrfMode::ArgIdClass] {
            let got = prf(&preds, &gold, mode);
            let (g, p, c) = ref_prf(&preds, &gold, mode);
            let (pr, rc) = (ratio(c, p), ratio(c, g));
            let f1 = if pr + rc > 0.0 { 2.0 * pr * rc / (pr + rc) } else { 0.0 };
            if g == 0 || p == 0 {
                zero_cases += 1;
            }
            ensure((got.num_gold, got.num_pred, got.num_correct) == (g, p, c), || {
                format!("case {case} {mode:?}: counts {:?} vs {:?}", (got.num_gold, got.num_pred, got.num_correct), (g, p, c))
            })?;
            ensure(
                (got.precision - pr).abs() < 1e-12 && (got.recall - rc).abs() < 1e-12 && (got.f1 - f1).abs() < 1e-12,
                || format!("case {case} {mode:?}: {got:?}"),
            )?;
        }
    }
    ensure(zero_cases > 0, || "no zero-denominator case generated".into())?;
    Ok(format!("100 randomized sets agree with the reference ({zero_cases} zero-denominator metric evaluations)"))
}

fn ctx_of(m: &MicroModel) -> LossContext<'_> {
    LossContext { table: &m.table, ontology: &m.ontology, settings: LossSettings::default() }
}

// 9. Loss relations.
fn loss_relations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let names = ["Alpha", "Beta", "Gamma"];
    let (mut zero_checked, mut positive_checked) = (0, 0);
    for case in 0..100 {
        let mut model = MicroModel::random(&mut rng, 3, 4);
        let gold = rng.gen_range(0..3);
        let mention = model.mention(&mut rng);
        let inst = TriggerInstance { mention: mention.clone(), gold_type: names[gold].into() };
        let l1 = loss_l1(&inst, &model.params, &ctx_of(&model)).unwrap();
        let l1d = loss_l1d(&inst, &model.params, &ctx_of(&model)).unwrap();
        ensure(l1 >= l1d && l1d >= 0.0, || format!("case {case}: l1 {l1} l1d {l1d}"))?;
        let other = TriggerInstance { mention: mention.clone(), gold_type: "Other".into() };
        for branch in [OtherBranch::AsPrinted, OtherBranch::SuppressTop] {
            let ctx = LossContext { settings: LossSettings { other_branch: branch, ..LossSettings::default() }, ..ctx_of(&model) };
            let l = loss_l1d(&other, &model.params, &ctx).unwrap();
            ensure(l >= 0.0, || format!("case {case}: Other loss {l}"))?;
        }
        let arg = ArgumentInstance { path: model.path(&mut rng), trigger_type: "Beta".into(), gold_role: "R2".into() };
        let l2 = loss_l2d(&arg, &model.params, &ctx_of(&model)).unwrap();
        ensure(l2 >= 0.0, || format!("case {case}: l2d {l2}"))?;

        // Satisfied and violated margins built from the actual scores.
        let scores: Vec<f64> = names
            .iter()
            .map(|t| {
                let s = build_type_structure(&model.ontology, t, 5).unwrap();
                mention_score(&mention, &s, &model.table, &model.params).unwrap()
            })
            .collect();
        let best = (0..3).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        let gap = (0..3).filter(|&j| j != best).map(|j| scores[best] - scores[j]).fold(f64::INFINITY, f64::min);
        let top = TriggerInstance { mention: mention.clone(), gold_type: names[best].into() };
        if gap > 1e-9 {
            model.params.margin = gap / 2.0;
            let ctx = ctx_of(&model);
            ensure(loss_l1(&top, &model.params, &ctx).unwrap() == 0.0, || format!("case {case}: satisfied l1 nonzero"))?;
            ensure(loss_l1d(&top, &model.params, &ctx).unwrap() == 0.0, || format!("case {case}: satisfied l1d nonzero"))?;
            zero_checked += 1;
        }
        model.params.margin = gap.abs() * 2.0 + 0.01;
        let ctx = ctx_of(&model);
        ensure(loss_l1(&top, &model.params, &ctx).unwrap() > 0.0, || format!("case {case}: violated l1 zero"))?;
        ensure(loss_l1d(&top, &model.params, &ctx).unwrap() > 0.0, || format!("case {case}: violated l1d zero"))?;

        let r2 = argument_score(&arg.path, &build_role_path(&model.ontology, "Beta", "R2").unwrap(), &model.table, &model.params).unwrap();
        let r3 = argument_score(&arg.path, &build_role_path(&model.ontology, "Beta", "R3").unwrap(), &model.table, &model.params).unwrap();
        let (win, diff) = if r2 >= r3 { ("R2", r2 - r3) } else { ("R3", r3 - r2) };
        let arg = ArgumentInstance { gold_role: win.into(), ..arg };
        if diff > 1e-9 {
            model.params.margin = diff / 2.0;
            ensure(loss_l2d(&arg, &model.params, &ctx_of(&model)).unwrap() == 0.0, || format!("case {case}: satisfied l2d nonzero"))?;
        }
        model.params.margin = diff * 2.0 + 0.01;
        ensure(loss_l2d(&arg, &model.params, &ctx_of(&model)).unwrap() > 0.0, || format!("case {case}: violated l2d zero"))?;
        positive_checked += 1;
    }
    Ok(format!("100 instances: l1 >= l1d >= 0, all losses >= 0, zero exactly on {zero_checked} satisfied and never on {positive_checked} violated fixtures"))
}

struct Criterion {
    number: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { number: 1, name: "gradient correctness", limit: Some(Duration::from_secs(30)), run: gradients },
        Criterion { number: 2, name: "PENMAN round-trip", limit: Some(Duration::from_secs(5)), run: round_trip },
        Criterion { number: 3, name: "encoder invariances", limit: Some(Duration::from_secs(10)), run: encoder },
        Criterion { number: 4, name: "ranking invariance", limit: None, run: ranking_scale },
        Criterion { number: 5, name: "overfit fixture", limit: Some(Duration::from_secs(60)), run: overfit },
        Criterion { number: 6, name: "zero-shot transfer", limit: Some(Duration::from_secs(60)), run: zero_shot },
        Criterion { number: 7, name: "determinism", limit: None, run: determinism },
        Criterion { number: 8, name: "metric oracle", limit: None, run: metrics },
        Criterion { number: 9, name: "loss relations", limit: None, run: loss_relations },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || c.number.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {}: {} ({elapsed:.2?}): {detail}", c.number, c.name);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
