//! Ranking losses and the deterministic SGD loop.

mod data;
pub mod loss;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingTable;
use crate::neural::{compute_gradients, ModelParams, NeuralError, TUPLE_WIDTH};
use crate::structures::{Caps, Ontology, OTHER};

pub use data::{prepare_instances, TrainingData};
pub use loss::{
    loss_l1, loss_l1d, loss_l2d, ranking_loss, ArgumentInstance, LossContext, LossError, LossInstance, LossSettings,
    LossVariant, OtherBranch, RankingRule, TriggerInstance,
};

/// Training hyper-parameters. Defaults are the reference settings
/// (d = 200, lr = 0.1, 500 filters, caps 10/5/5/1); margin and epochs
/// default to 1.0 and 10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub margin: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss_variant: LossVariant,
    pub other_branch: OtherBranch,
    pub d: usize,
    pub filters: usize,
    pub filter_width: usize,
    pub mention_cap: usize,
    pub path_cap: usize,
    pub type_cap: usize,
    pub role_cap: usize,
    /// Decay the learning rate linearly towards zero over the epochs.
    pub linear_decay: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            margin: 1.0,
            epochs: 10,
            seed: 0,
            loss_variant: LossVariant::default(),
            other_branch: OtherBranch::default(),
            d: 200,
            filters: 500,
            filter_width: TUPLE_WIDTH,
            mention_cap: 10,
            path_cap: 5,
            type_cap: 5,
            role_cap: 1,
            linear_decay: false,
        }
    }
}

impl TrainConfig {
    /// Small preset for desk-scale runs: d = 16, 32 filters.
    pub fn desk() -> Self {
        Self { d: 16, filters: 32, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::Config(String::from(msg)));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.d == 0 || self.filters == 0 {
            return bad("d and filters must be positive");
        }
        if self.filter_width != TUPLE_WIDTH {
            return bad("filter_width must be 2");
        }
        if self.role_cap != 1 {
            return bad("role_cap must be 1");
        }
        if self.mention_cap == 0 || self.path_cap == 0 || self.type_cap == 0 {
            return bad("structure caps must be positive");
        }
        Ok(())
    }

    pub fn caps(&self) -> Caps {
        Caps { mention: self.mention_cap, path: self.path_cap, type_roles: self.type_cap, role: self.role_cap }
    }

    pub fn loss_settings(&self) -> LossSettings {
        LossSettings { variant: self.loss_variant, other_branch: self.other_branch, type_cap: self.type_cap }
    }

    pub fn init_params(&self) -> Result<ModelParams, TrainError> {
        Ok(ModelParams::init(self.d, self.filters, self.filter_width, self.margin, self.seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("non-finite {what} at epoch {epoch}, instance {index}")]
    NonFinite { what: &'static str, epoch: usize, index: usize },
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean per-instance loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
}

fn sgd(
    instances: &[LossInstance],
    params: &mut ModelParams,
    config: &TrainConfig,
    ctx: &LossContext<'_>,
    stream: u64,
) -> Result<Vec<f64>, TrainError> {
    for inst in instances {
        for label in inst.relations() {
            params.ensure_relation(label);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut order: Vec<usize> = (0..instances.len()).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let lr = if config.linear_decay {
            config.learning_rate * (1.0 - epoch as f64 / config.epochs as f64)
        } else {
            config.learning_rate
        };
        let mut total = 0.0;
        for &index in &order {
            let (loss, grads) = compute_gradients(core::slice::from_ref(&instances[index]), params, ctx)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFinite { what: "loss", epoch, index });
            }
            if !grads.is_finite() {
                return Err(TrainError::NonFinite { what: "gradient", epoch, index });
            }
            total += loss;
            if loss > 0.0 {
                params.sgd_step(&grads, lr);
            }
        }
        let mean = total / instances.len() as f64;
        log::info!("epoch {}: mean loss {:.6}", epoch + 1, mean);
        losses.push(mean);
    }
    Ok(losses)
}

/// Trains the trigger model from freshly initialized parameters.
///
/// Under the plain loss, `Other` mentions have no defined loss and are
/// skipped.
pub fn train_trigger(
    corpus: &[TriggerInstance],
    config: &TrainConfig,
    ontology: &Ontology,
    table: &EmbeddingTable,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    check_dim(config, table)?;
    if corpus.is_empty() {
        return Err(TrainError::Config("empty trigger corpus".into()));
    }
    if !corpus.iter().any(|t| t.gold_type != OTHER) {
        return Err(TrainError::Config("no trigger instance with a gold type other than Other".into()));
    }
    if ontology.seen_types().next().is_none() {
        return Err(TrainError::Config("ontology has no seen types".into()));
    }
    let instances: Vec<LossInstance> = corpus
        .iter()
        .filter(|t| config.loss_variant != LossVariant::PlainL1 || t.gold_type != OTHER)
        .cloned()
        .map(LossInstance::Trigger)
        .collect();
    if instances.len() < corpus.len() {
        log::warn!("skipping {} Other mentions under the plain loss", corpus.len() - instances.len());
    }
    let mut params = config.init_params()?;
    let ctx = LossContext { table, ontology, settings: config.loss_settings() };
    let epoch_losses = sgd(&instances, &mut params, config, &ctx, 3)?;
    Ok(TrainOutcome { params, epoch_losses })
}

/// Trains argument-role ranking on top of `base`, sharing its convolution
/// and composition parameters.
pub fn train_argument(
    corpus: &[ArgumentInstance],
    config: &TrainConfig,
    ontology: &Ontology,
    table: &EmbeddingTable,
    base: ModelParams,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    check_dim(config, table)?;
    if corpus.is_empty() {
        return Err(TrainError::Config("empty argument corpus".into()));
    }
    if base.d != table.dim() {
        return Err(TrainError::Config(format!("model d = {} but embeddings have dim {}", base.d, table.dim())));
    }
    let mut params = base;
    params.margin = config.margin;
    let instances: Vec<LossInstance> = corpus.iter().cloned().map(LossInstance::Argument).collect();
    let ctx = LossContext { table, ontology, settings: config.loss_settings() };
    let epoch_losses = sgd(&instances, &mut params, config, &ctx, 4)?;
    Ok(TrainOutcome { params, epoch_losses })
}

fn check_dim(config: &TrainConfig, table: &EmbeddingTable) -> Result<(), TrainError> {
    if config.d != table.dim() {
        return Err(TrainError::Config(format!("config d = {} but embeddings have dim {}", config.d, table.dim())));
    }
    Ok(())
}
