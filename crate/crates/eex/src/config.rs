//! Config files and flag overrides.

use std::path::{Path, PathBuf};

use eex_core::training::{LossVariant, OtherBranch};
use eex_core::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::io::{read, LoadError};

/// A training config plus resource paths. Relative paths resolve against
/// the directory holding the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub train: TrainConfig,
    pub corpus: Option<PathBuf>,
    pub ontology: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub k: Option<usize>,
    pub jobs: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let mut cfg: ConfigFile = serde_json::from_str(&read(path)?).map_err(|e| LoadError::format(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus, &mut cfg.ontology, &mut cfg.lexicon, &mut cfg.embeddings, &mut cfg.checkpoint]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Hyper-parameter flags; every field left unset keeps the config value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub desk: bool,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub margin: Option<f64>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub filters: Option<usize>,
    pub loss: Option<LossVariant>,
    pub other_branch: Option<OtherBranch>,
}

impl Overrides {
    /// `--desk` replaces d and F first, so explicit `--d`/`--filters` still win.
    pub fn apply(&self, cfg: &mut TrainConfig) {
        if self.desk {
            let desk = TrainConfig::desk();
            cfg.d = desk.d;
            cfg.filters = desk.filters;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.margin {
            cfg.margin = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.d {
            cfg.d = v;
        }
        if let Some(v) = self.filters {
            cfg.filters = v;
        }
        if let Some(v) = self.loss {
            cfg.loss_variant = v;
        }
        if let Some(v) = self.other_branch {
            cfg.other_branch = v;
        }
    }
}
