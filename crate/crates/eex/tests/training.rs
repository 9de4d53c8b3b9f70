use eex::synthetic::separable;
use eex_core::candidates::RelationCatalog;
use eex_core::inference::Extractor;
use eex_core::training::{prepare_instances, train_argument, train_trigger, TrainConfig, TrainError};

fn config(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig { d: 8, filters: 8, epochs, seed, ..TrainConfig::default() }
}

#[test]
fn same_seed_same_model() {
    let fx = separable(3, 3, 3, 8, 4);
    let data = prepare_instances(&fx.records, &RelationCatalog::default(), config(1, 0).caps()).unwrap();
    let a = train_trigger(&data.triggers, &config(5, 11), &fx.ontology, &fx.table).unwrap();
    let b = train_trigger(&data.triggers, &config(5, 11), &fx.ontology, &fx.table).unwrap();
    assert_eq!(a, b);
    let c = train_trigger(&data.triggers, &config(5, 12), &fx.ontology, &fx.table).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn invalid_configs_are_rejected() {
    let fx = separable(2, 3, 2, 8, 1);
    let data = prepare_instances(&fx.records, &RelationCatalog::default(), config(1, 0).caps()).unwrap();
    let err = train_trigger(&data.triggers, &config(0, 0), &fx.ontology, &fx.table).unwrap_err();
    assert!(matches!(err, TrainError::Config(ref m) if m.contains("epochs")), "{err}");
    let err = train_trigger(&[], &config(3, 0), &fx.ontology, &fx.table).unwrap_err();
    assert!(matches!(err, TrainError::Config(ref m) if m.contains("empty")), "{err}");
    let wrong_d = TrainConfig { d: 5, ..config(3, 0) };
    assert!(train_trigger(&data.triggers, &wrong_d, &fx.ontology, &fx.table).is_err());
    let wide = TrainConfig { filter_width: 3, ..config(3, 0) };
    assert!(wide.validate().is_err());
}

// After the early epochs the mean loss may wobble by hinges flipping at
// the margin, but it must not climb.
#[test]
fn losses_settle() {
    let fx = separable(4, 3, 3, 8, 2);
    let cfg = TrainConfig { filters: 16, ..config(60, 2) };
    let data = prepare_instances(&fx.records, &RelationCatalog::default(), cfg.caps()).unwrap();
    let trig = train_trigger(&data.triggers, &cfg, &fx.ontology, &fx.table).unwrap();
    let args = train_argument(&data.arguments, &cfg, &fx.ontology, &fx.table, trig.params).unwrap();
    for losses in [&trig.epoch_losses, &args.epoch_losses] {
        assert_eq!(losses.len(), 60);
        for w in losses[5..].windows(2) {
            assert!(w[1] <= w[0] + 1e-2, "{losses:?}");
        }
        assert!(losses.last().unwrap() < &(losses[0] * 0.5), "{losses:?}");
    }
}

#[test]
fn seen_flags_do_not_affect_inference() {
    let fx = separable(3, 3, 3, 8, 6);
    let cfg = config(5, 6);
    let data = prepare_instances(&fx.records, &RelationCatalog::default(), cfg.caps()).unwrap();
    let params = train_trigger(&data.triggers, &cfg, &fx.ontology, &fx.table).unwrap().params;
    let mut flipped = fx.ontology.clone();
    for t in &mut flipped.types {
        t.seen = !t.seen;
    }
    let catalog = RelationCatalog::default();
    let a = Extractor::new(&fx.lexicon, &catalog, &fx.ontology, &params, &fx.table, cfg.caps(), None).unwrap();
    let b = Extractor::new(&fx.lexicon, &catalog, &flipped, &params, &fx.table, cfg.caps(), None).unwrap();
    for r in &fx.records {
        assert_eq!(a.extract_events(r, 3).unwrap(), b.extract_events(r, 3).unwrap());
    }
}
