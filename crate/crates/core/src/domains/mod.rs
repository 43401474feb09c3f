//! Procedural benchmark generators: Block-words, Logistics, Grid and Buy, each
//! in two settings.
//!
//! `set1` always has two hypotheses with priors 0.8 / 0.2; `set2` has several
//! goals with uniform priors. Every STRIPS generator returns a grounded
//! instance whose true goal is drawn from the priors, is not satisfied in the
//! initial state, and whose hypotheses are all relaxed-reachable.

mod blockwords;
mod buy;
mod grid;
mod logistics;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::RelaxedExplorer;
use crate::strips::{self, holds, DomainSchema, GroundTask, Problem, StripsError};

pub use blockwords::{gen_blockwords, BLOCKWORDS_DOMAIN};
pub use buy::{buy_vocab, gen_buy, BuyTraces};
pub use grid::{gen_grid, GRID_DOMAIN};
pub use logistics::{gen_logistics, LOGISTICS_DOMAIN};

/// Priors of the two `set1` hypotheses.
pub const SKEWED_PRIORS: [f64; 2] = [0.8, 0.2];

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("scale {scale} too small for {family}: {reason}")]
    ScaleTooSmall {
        family: Family,
        scale: f64,
        reason: &'static str,
    },
    #[error("no solvable layout after {0} attempts")]
    UnsolvableLayout(usize),
    #[error("{0} has no STRIPS model")]
    NotStrips(Family),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Blockwords,
    Logistics,
    Grid,
    Buy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Set1,
    Set2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Blockwords => "blockwords",
            Family::Logistics => "logistics",
            Family::Grid => "grid",
            Family::Buy => "buy",
        })
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Set1 => "set1",
            Setting::Set2 => "set2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for Family {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blockwords" => Ok(Family::Blockwords),
            "logistics" => Ok(Family::Logistics),
            "grid" => Ok(Family::Grid),
            "buy" => Ok(Family::Buy),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

impl FromStr for Setting {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set1" => Ok(Setting::Set1),
            "set2" => Ok(Setting::Set2),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub family: Family,
    pub setting: Setting,
    pub seed: u64,
    /// Size multiplier in (0, 1]; 1 is the full benchmark size.
    pub scale: f64,
    /// Number of candidate goal cells for Grid `set2`.
    pub grid_goal_pool: usize,
}

impl GeneratorConfig {
    pub fn new(family: Family, setting: Setting, seed: u64, scale: f64) -> Self {
        GeneratorConfig {
            family,
            setting,
            seed,
            scale,
            grid_goal_pool: 10,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorConfig { seed, ..*self }
    }
}

/// A generated problem together with its grounding.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: Problem,
    pub task: GroundTask,
}

/// Domain source text for a STRIPS family.
pub fn domain_source(family: Family) -> Option<&'static str> {
    match family {
        Family::Blockwords => Some(BLOCKWORDS_DOMAIN),
        Family::Logistics => Some(LOGISTICS_DOMAIN),
        Family::Grid => Some(GRID_DOMAIN),
        Family::Buy => None,
    }
}

pub fn domain_schema(family: Family) -> Result<DomainSchema, DomainError> {
    let src = domain_source(family).ok_or(DomainError::NotStrips(family))?;
    Ok(strips::parse_domain(src)?)
}

/// Generates one instance of a STRIPS family.
pub fn generate(cfg: &GeneratorConfig) -> Result<Instance, DomainError> {
    match cfg.family {
        Family::Blockwords => gen_blockwords(cfg),
        Family::Logistics => gen_logistics(cfg),
        Family::Grid => gen_grid(cfg),
        Family::Buy => Err(DomainError::NotStrips(Family::Buy)),
    }
}

/// Number of hypotheses and their priors for a family and setting.
pub fn hypothesis_priors(family: Family, setting: Setting) -> Vec<f64> {
    match setting {
        Setting::Set1 => SKEWED_PRIORS.to_vec(),
        Setting::Set2 => {
            let n = if family == Family::Blockwords { 5 } else { 10 };
            vec![1.0 / n as f64; n]
        }
    }
}

pub(crate) fn draw_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Grounds `problem` and accepts it when the true goal is open and every
/// hypothesis is relaxed-reachable.
pub(crate) fn accept(schema: &DomainSchema, problem: Problem) -> Result<Option<Instance>, DomainError> {
    let task = strips::ground(schema, &problem)?;
    let truth = task.true_goal().expect("generators set the true goal");
    if holds(task.init(), task.hypothesis(truth)) {
        return Ok(None);
    }
    let explorer = RelaxedExplorer::new(&task);
    if task
        .hypotheses()
        .iter()
        .any(|h| explorer.h_add(task.init(), &h.facts).is_none())
    {
        return Ok(None);
    }
    Ok(Some(Instance { problem, task }))
}
