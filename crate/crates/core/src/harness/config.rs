use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::gbt::GbtConfig;
use crate::recognizer::DEFAULT_THETA;
use crate::seq::SeqHyper;

/// Hyperparameters read from a TOML file. Every key is optional:
///
/// ```toml
/// theta = 0.1
/// seed = 0
///
/// [gbt]
/// n_rounds = 100
/// max_depth = 3
/// shrinkage = 0.3
/// l2_lambda = 1.0
///
/// [lstm]
/// d_embed = 32
/// d_hidden = 32
/// lr = 0.01
/// batch = 32
/// epochs = 10
/// clip = 5.0
/// optimizer = "adam"   # or "sgd"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperConfig {
    pub theta: f64,
    /// Seed for learned-model initialization and batching.
    pub seed: u64,
    pub gbt: GbtConfig,
    pub lstm: SeqHyper,
}

impl Default for HyperConfig {
    fn default() -> Self {
        HyperConfig {
            theta: DEFAULT_THETA,
            seed: 0,
            gbt: GbtConfig::default(),
            lstm: SeqHyper::default(),
        }
    }
}

impl HyperConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Format {
            file: "config".into(),
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
