//! The `eex` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eex_core::candidates::{identify_arguments, identify_triggers, RelationCatalog, SenseLexicon};
use eex_core::eval::{hit_at_k, MetricsReport};
use eex_core::inference::Extractor;
use eex_core::neural::{finite_diff_check, smooth_within, DEFAULT_EPSILON};
use eex_core::structures::{build_argument_path, build_mention_structure, OTHER};
use eex_core::testing::MicroModel;
use eex_core::training::{
    prepare_instances, train_argument, train_trigger, LossContext, LossSettings, LossVariant, OtherBranch,
};
use eex_core::{EmbeddingTable, ModelParams, Ontology, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::config::{ConfigFile, Overrides};
use crate::io::{self, load_corpus, load_embeddings, load_lexicon, load_ontology};
use crate::pipeline::{gold_rankings, predict_all, role_accuracy};
use crate::report::{metrics_table, parse_predictions, predictions_to_string};

#[derive(Debug, Parser)]
#[command(name = "eex", version, about = "Zero-shot event extraction over AMR graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the trigger typing model.
    TrainTrigger(Common),
    /// Train argument roles on top of a trigger checkpoint.
    TrainArg(Common),
    /// Extract events and write one JSON line per record.
    Predict(Common),
    /// Score Hit@k and precision/recall/F1 against gold annotations.
    Eval(EvalArgs),
    /// Compare analytic and numeric gradients on random micro-models.
    GradCheck(GradArgs),
    /// Show candidate triggers, arguments, and structures.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of ranked types to report.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    filters: Option<usize>,
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossVariant>,
    #[arg(long = "other-branch", value_parser = parse_other_branch)]
    other_branch: Option<OtherBranch>,
    /// Worker threads for prediction.
    #[arg(long)]
    jobs: Option<usize>,
    /// Desk-scale preset: d = 16, 32 filters.
    #[arg(long)]
    desk: bool,
    /// Rank only types not flagged as seen.
    #[arg(long)]
    only_unseen: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Score this prediction file instead of predicting.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 4)]
    filters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random micro-models per loss configuration.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    common: Common,
    /// Record id; all records when omitted.
    id: Option<String>,
}

fn parse_loss(s: &str) -> Result<LossVariant, String> {
    match s {
        "plain_l1" => Ok(LossVariant::PlainL1),
        "discriminative" => Ok(LossVariant::Discriminative),
        _ => Err(format!("expected plain_l1 or discriminative, got {s}")),
    }
}

fn parse_other_branch(s: &str) -> Result<OtherBranch, String> {
    match s {
        "as_printed" => Ok(OtherBranch::AsPrinted),
        "suppress_top" => Ok(OtherBranch::SuppressTop),
        _ => Err(format!("expected as_printed or suppress_top, got {s}")),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("EEX_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::TrainTrigger(c) => cmd_train_trigger(&Settings::resolve(&c)?),
        Command::TrainArg(c) => cmd_train_arg(&Settings::resolve(&c)?),
        Command::Predict(c) => cmd_predict(&Settings::resolve(&c)?),
        Command::Eval(e) => cmd_eval(&Settings::resolve(&e.common)?, e.predictions.as_deref()),
        Command::GradCheck(g) => cmd_grad_check(&g),
        Command::Inspect(i) => cmd_inspect(&Settings::resolve(&i.common)?, i.id.as_deref()),
    }
}

/// Config file merged with flags.
struct Settings {
    train: TrainConfig,
    corpus: Option<PathBuf>,
    ontology: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    out: Option<PathBuf>,
    k: usize,
    jobs: usize,
    only_unseen: bool,
}

impl Settings {
    fn resolve(c: &Common) -> Result<Self> {
        let file = match &c.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let mut train = file.train;
        Overrides {
            desk: c.desk,
            epochs: c.epochs,
            lr: c.lr,
            margin: c.margin,
            seed: c.seed,
            d: c.d,
            filters: c.filters,
            loss: c.loss,
            other_branch: c.other_branch,
        }
        .apply(&mut train);
        let k = c.k.or(file.k).unwrap_or(1);
        if k == 0 {
            bail!("--k must be at least 1");
        }
        Ok(Self {
            train,
            corpus: c.corpus.clone().or(file.corpus),
            ontology: c.ontology.clone().or(file.ontology),
            lexicon: c.lexicon.clone().or(file.lexicon),
            embeddings: c.embeddings.clone().or(file.embeddings),
            checkpoint: c.checkpoint.clone().or(file.checkpoint),
            out: c.out.clone(),
            k,
            jobs: c.jobs.or(file.jobs).unwrap_or(1).max(1),
            only_unseen: c.only_unseen,
        })
    }

    fn path<'a>(&self, p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        p.as_deref().ok_or_else(|| anyhow!("missing --{flag} (or `{flag}` in the config file)"))
    }

    fn ontology(&self) -> Result<Ontology> {
        Ok(load_ontology(self.path(&self.ontology, "ontology")?)?)
    }

    fn table(&self) -> Result<EmbeddingTable> {
        Ok(load_embeddings(self.path(&self.embeddings, "embeddings")?)?)
    }

    fn lexicon(&self) -> Result<SenseLexicon> {
        Ok(load_lexicon(self.path(&self.lexicon, "lexicon")?)?)
    }

    fn corpus(&self) -> Result<Vec<eex_core::corpus::SentenceRecord>> {
        Ok(load_corpus(self.path(&self.corpus, "corpus")?)?)
    }

    fn model(&self) -> Result<ModelParams> {
        let path = self.path(&self.checkpoint, "checkpoint")?;
        let (_, params) = checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
        Ok(params)
    }

    fn out(&self) -> Result<&Path> {
        self.path(&self.out, "out")
    }

    fn only(&self, ontology: &Ontology) -> Option<Vec<String>> {
        self.only_unseen.then(|| ontology.types.iter().filter(|t| !t.seen).map(|t| t.name.clone()).collect())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn training_hit_at_1(
    records: &[eex_core::corpus::SentenceRecord],
    s: &Settings,
    ontology: &Ontology,
    params: &ModelParams,
    table: &EmbeddingTable,
) -> Result<Option<f64>> {
    let lexicon = SenseLexicon::default();
    let catalog = RelationCatalog::default();
    let extractor = Extractor::new(&lexicon, &catalog, ontology, params, table, s.train.caps(), None)?;
    let (rankings, golds) = gold_rankings(records, &extractor)?;
    if rankings.is_empty() {
        return Ok(None);
    }
    Ok(Some(hit_at_k(&rankings, &golds, 1)?))
}

fn cmd_train_trigger(s: &Settings) -> Result<()> {
    let out = s.out()?;
    let records = s.corpus()?;
    let ontology = s.ontology()?;
    let table = s.table()?;
    let seen = ontology.seen_only();
    let data = prepare_instances(&records, &RelationCatalog::default(), s.train.caps())?;
    let total = data.triggers.len();
    let triggers: Vec<_> =
        data.triggers.into_iter().filter(|t| t.gold_type == OTHER || seen.get(&t.gold_type).is_some()).collect();
    if triggers.len() < total {
        log::warn!("skipping {} mentions of types not flagged as seen", total - triggers.len());
    }
    let outcome = train_trigger(&triggers, &s.train, &seen, &table)?;
    checkpoint::save(out, &outcome.params, s.train.epochs)?;
    let hit = training_hit_at_1(&records, s, &ontology, &outcome.params, &table)?;
    log::info!("training hit@1 {:?}", hit);
    println!(
        "trained {} trigger instances for {} epochs; final mean loss {:.6}; training hit@1 {}",
        triggers.len(),
        s.train.epochs,
        outcome.epoch_losses.last().copied().unwrap_or(0.0),
        hit.map_or("n/a".to_string(), |h| format!("{h:.4}"))
    );
    Ok(())
}

fn cmd_train_arg(s: &Settings) -> Result<()> {
    let out = s.out()?;
    let base = s.model()?;
    let records = s.corpus()?;
    let ontology = s.ontology()?;
    let table = s.table()?;
    let seen = ontology.seen_only();
    let data = prepare_instances(&records, &RelationCatalog::default(), s.train.caps())?;
    let total = data.arguments.len();
    let arguments: Vec<_> = data
        .arguments
        .into_iter()
        .filter(|a| a.trigger_type == OTHER || seen.get(&a.trigger_type).is_some())
        .collect();
    if arguments.len() < total {
        log::warn!("skipping {} arguments of types not flagged as seen", total - arguments.len());
    }
    let mut config = s.train.clone();
    config.d = base.d;
    config.filters = base.filters;
    let outcome = train_argument(&arguments, &config, &seen, &table, base)?;
    checkpoint::save(out, &outcome.params, config.epochs)?;
    let acc = role_accuracy(&arguments, &outcome.params, &table, &ontology)?;
    println!(
        "trained {} argument instances for {} epochs; final mean loss {:.6}; training role accuracy {}",
        arguments.len(),
        config.epochs,
        outcome.epoch_losses.last().copied().unwrap_or(0.0),
        acc.map_or("n/a".to_string(), |a| format!("{a:.4}"))
    );
    Ok(())
}

fn cmd_predict(s: &Settings) -> Result<()> {
    let records = s.corpus()?;
    let ontology = s.ontology()?;
    let lexicon = s.lexicon()?;
    let table = s.table()?;
    let params = s.model()?;
    let catalog = RelationCatalog::default();
    let only = s.only(&ontology);
    let extractor = Extractor::new(&lexicon, &catalog, &ontology, &params, &table, s.train.caps(), only.as_deref())?;
    let predictions = predict_all(&records, &extractor, s.k, s.jobs)?;
    emit(s.out.as_deref(), &predictions_to_string(&predictions))
}

fn cmd_eval(s: &Settings, predictions: Option<&Path>) -> Result<()> {
    let records = s.corpus()?;
    let ontology = s.ontology()?;
    let table = s.table()?;
    let params = s.model()?;
    let catalog = RelationCatalog::default();
    let lexicon = match (&s.lexicon, predictions) {
        (None, Some(_)) => SenseLexicon::default(),
        _ => s.lexicon()?,
    };
    let only = s.only(&ontology);
    let extractor = Extractor::new(&lexicon, &catalog, &ontology, &params, &table, s.train.caps(), only.as_deref())?;
    let (rankings, golds) = gold_rankings(&records, &extractor)?;
    let mut hit_at = BTreeMap::new();
    if !rankings.is_empty() {
        for k in 1..=s.k {
            hit_at.insert(k, hit_at_k(&rankings, &golds, k)?);
        }
    }
    let predicted = match predictions {
        Some(p) => parse_predictions(&io::read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))?,
        None => predict_all(&records, &extractor, s.k, s.jobs)?,
    };
    let report = MetricsReport::new(hit_at, &predicted, &records);
    let json = serde_json::to_string(&report)?;
    print!("{}", metrics_table(&report));
    println!("{json}");
    if let Some(out) = &s.out {
        io::write(out, format!("{json}\n"))?;
    }
    Ok(())
}

const MAX_DRAWS: usize = 50;

fn cmd_grad_check(g: &GradArgs) -> Result<()> {
    if g.d == 0 || g.filters == 0 || g.trials == 0 {
        bail!("--d, --filters, and --trials must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let configs = [
        ("l1", LossVariant::PlainL1, OtherBranch::AsPrinted),
        ("l1d", LossVariant::Discriminative, OtherBranch::AsPrinted),
        ("l1d-other-as_printed", LossVariant::Discriminative, OtherBranch::AsPrinted),
        ("l1d-other-suppress_top", LossVariant::Discriminative, OtherBranch::SuppressTop),
        ("l2d", LossVariant::Discriminative, OtherBranch::AsPrinted),
        ("l2d-other-as_printed", LossVariant::Discriminative, OtherBranch::AsPrinted),
        ("l2d-other-suppress_top", LossVariant::Discriminative, OtherBranch::SuppressTop),
    ];
    let mut worst = 0.0f64;
    let mut resampled = 0usize;
    let mut per_config = vec![0.0f64; configs.len()];
    for _ in 0..g.trials {
        for (i, (name, variant, branch)) in configs.iter().enumerate() {
            let settings = LossSettings { variant: *variant, other_branch: *branch, type_cap: 5 };
            // Draws with a pooling or hinge switch inside the finite-difference
            // step are redrawn; the screen never looks at the analytic gradient.
            let mut attempts = 0;
            let err = loop {
                attempts += 1;
                if attempts > MAX_DRAWS {
                    bail!("no smooth draw for {name} after {MAX_DRAWS} attempts");
                }
                let model = MicroModel::random(&mut rng, g.d, g.filters);
                let inst = match *name {
                    "l1" | "l1d" => model.trigger_instance(&mut rng, "Alpha"),
                    n if n.starts_with("l1d-other") => model.trigger_instance(&mut rng, OTHER),
                    "l2d" => model.argument_instance(&mut rng, "Beta", "R3"),
                    _ => model.argument_instance(&mut rng, "Alpha", OTHER),
                };
                let ctx = LossContext { table: &model.table, ontology: &model.ontology, settings };
                if !smooth_within(&model.params, &inst, &ctx, DEFAULT_EPSILON)? {
                    resampled += 1;
                    continue;
                }
                break finite_diff_check(&model.params, &inst, &ctx, DEFAULT_EPSILON)?;
            };
            per_config[i] = per_config[i].max(err);
            worst = worst.max(err);
        }
    }
    for ((name, _, _), err) in configs.iter().zip(&per_config) {
        println!("{name:<24}{err:.3e}");
    }
    println!("max relative error {worst:.3e} ({resampled} non-smooth draws resampled)");
    if worst >= 1e-4 {
        bail!("gradient check failed: {worst:.3e} >= 1e-4");
    }
    Ok(())
}

fn cmd_inspect(s: &Settings, id: Option<&str>) -> Result<()> {
    let records = s.corpus()?;
    let lexicon = s.lexicon()?;
    let catalog = RelationCatalog::default();
    let caps = s.train.caps();
    let selected: Vec<_> = records.iter().filter(|r| id.is_none_or(|id| r.id == id)).collect();
    if let (Some(id), true) = (id, selected.is_empty()) {
        bail!("no record with id {id}");
    }
    let mut out = String::new();
    for record in selected {
        out.push_str(&format!("record {}\n", record.id));
        for trigger in identify_triggers(&record.graph, &lexicon) {
            let args = identify_arguments(&record.graph, &trigger, &catalog);
            let mention = build_mention_structure(&record.graph, &trigger, &args, caps.mention);
            out.push_str(&format!("  trigger {} / {}\n", trigger.var, trigger.concept));
            for (i, t) in mention.tuples.iter().enumerate() {
                out.push_str(&format!("    tuple {i}: <{}, {}, {}>\n", t.left, t.relation, t.right));
            }
            for a in &args {
                let path = build_argument_path(&record.graph, &trigger, &a.var, caps.path)?;
                let hops: Vec<String> =
                    path.tuples.iter().map(|t| format!("<{}, {}, {}>", t.left, t.relation, t.right)).collect();
                out.push_str(&format!("    argument {} {} / {}: {}\n", a.relation, a.var, a.concept, hops.join(" ")));
            }
        }
    }
    emit(s.out.as_deref(), &out)
}
