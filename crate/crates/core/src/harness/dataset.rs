use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::domains::{self, Family, GeneratorConfig, Setting};
use crate::planner::{gbfs_plan, SearchConfig};
use crate::strips::{self, GroundTask, ObservationTrace, Problem};

/// Size of the held-out test set.
pub const HELDOUT: usize = 100;
/// Smallest dataset that leaves a usable train/validation pool.
pub const MIN_TRACES: usize = 130;
/// Planner noise used when generating traces.
pub const TRACE_NOISE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub heldout: Vec<usize>,
}

/// Seeded shuffle of `0..n` into 100 held-out traces and an 80/20
/// train/validation split of the rest.
pub fn split_indices(n: usize, seed: u64) -> Result<Split, HarnessError> {
    if n < MIN_TRACES {
        return Err(HarnessError::InsufficientTraces { n, min: MIN_TRACES });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    idx.shuffle(&mut rng);
    let heldout = idx.split_off(n - HELDOUT);
    let n_train = idx.len() * 4 / 5;
    let validation = idx.split_off(n_train);
    Ok(Split {
        train: idx,
        validation,
        heldout,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub family: Family,
    pub setting: Setting,
    pub scale: f64,
    pub seed: u64,
    pub priors: Vec<f64>,
}

/// Labeled traces over a shared action vocabulary, with the problem each
/// trace was planned in (STRIPS families only).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub vocab: Vec<String>,
    pub traces: Vec<ObservationTrace>,
    /// Problems without a true goal; empty for Buy.
    pub instances: Vec<Problem>,
    /// Instance of every trace; empty for Buy.
    pub instance_of: Vec<usize>,
    pub split: Split,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.meta.priors.len()
    }

    pub fn labeled(&self, indices: &[usize]) -> impl Iterator<Item = (&ObservationTrace, usize)> + '_ {
        let idx = indices.to_vec();
        idx.into_iter().map(move |i| {
            (
                &self.traces[i],
                self.traces[i].label.expect("dataset traces are labeled"),
            )
        })
    }

    pub fn is_strips(&self) -> bool {
        !self.instances.is_empty()
    }

    /// Grounds instance `k` and maps vocabulary ids to its action ids.
    pub fn ground_instance(&self, k: usize) -> Result<(GroundTask, Vec<Option<u32>>), HarnessError> {
        let schema = domains::domain_schema(self.meta.family)?;
        let task = strips::ground(&schema, &self.instances[k])?;
        let map = self.vocab.iter().map(|name| task.action_id(name)).collect();
        Ok((task, map))
    }
}

/// Generates `n` labeled plan traces. Trace `i` gets its own instance seed
/// and planner seed derived from `cfg.seed`.
pub fn build_dataset(cfg: &GeneratorConfig, n: usize) -> Result<Dataset, HarnessError> {
    let split = split_indices(n, cfg.seed)?;
    let meta = DatasetMeta {
        family: cfg.family,
        setting: cfg.setting,
        scale: cfg.scale,
        seed: cfg.seed,
        priors: domains::hypothesis_priors(cfg.family, cfg.setting),
    };
    if cfg.family == Family::Buy {
        let buy = domains::gen_buy(cfg, n);
        let traces = buy
            .traces
            .into_iter()
            .map(|(a, y)| ObservationTrace::new(a, Some(y)))
            .collect::<Result<_, _>>()?;
        return Ok(Dataset {
            meta: DatasetMeta {
                priors: buy.priors,
                ..meta
            },
            vocab: buy.vocab,
            traces,
            instances: Vec::new(),
            instance_of: Vec::new(),
            split,
        });
    }

    let planned: Vec<(Problem, Vec<String>, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let inst = domains::generate(&cfg.with_seed(rng.next_u64()))?;
            let truth = inst.task.true_goal().expect("generated with a true goal");
            let search = SearchConfig {
                seed: rng.next_u64(),
                noise: TRACE_NOISE,
                ..Default::default()
            };
            let plan = gbfs_plan(&inst.task, inst.task.hypothesis(truth), &search)
                .map_err(|source| HarnessError::Plan { trace: i, source })?;
            let names = plan.actions.iter().map(|&a| inst.task.action(a).to_string()).collect();
            let mut problem = inst.problem;
            problem.true_goal = None;
            Ok((problem, names, truth))
        })
        .collect::<Result<_, HarnessError>>()?;

    let vocab: Vec<String> = planned
        .iter()
        .flat_map(|(_, names, _)| names.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, a)| (a.as_str(), i as u32)).collect();
    let mut instances = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut instance_of = Vec::with_capacity(n);
    let mut traces = Vec::with_capacity(n);
    for (mut problem, names, truth) in planned {
        problem.name = String::new();
        let key = problem.to_string();
        let k = *seen.entry(key).or_insert_with(|| {
            problem.name = format!("{}-{}-{}", cfg.family, cfg.setting, instances.len());
            instances.push(problem);
            instances.len() - 1
        });
        instance_of.push(k);
        let ids = names.iter().map(|a| index[a.as_str()]).collect();
        traces.push(ObservationTrace::new(ids, Some(truth))?);
    }
    Ok(Dataset {
        meta,
        vocab,
        traces,
        instances,
        instance_of,
        split,
    })
}

/// First `⌈ratio · |O|⌉` actions of `trace`, never empty; the label is kept.
pub fn truncate(trace: &ObservationTrace, ratio: f64) -> ObservationTrace {
    let n = trace.len();
    // the epsilon keeps products like 0.3 * 10 from rounding up to 4
    let k = ((ratio * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    ObservationTrace {
        actions: trace.actions[..k].to_vec(),
        label: trace.label,
    }
}

const META: &str = "meta.toml";
const VOCAB: &str = "vocab.txt";
const TRACES: &str = "traces.txt";
const SPLIT: &str = "split.txt";
const INSTANCE_MAP: &str = "instances.txt";
const DOMAIN: &str = "domain.pddl";
const INSTANCE_DIR: &str = "instances";

fn format_err(file: &str, line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn join_ids<T: ToString>(ids: &[T]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn parse_ids<T: std::str::FromStr>(s: &str, file: &str, line: usize) -> Result<Vec<T>, HarnessError> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| format_err(file, line, format!("bad id `{t}`"))))
        .collect()
}

/// Writes one trace per line: label, a tab, then space-separated action ids.
/// Unlabeled traces use `-` as the label.
pub fn format_traces(traces: &[ObservationTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        let label = t.label.map_or_else(|| "-".to_string(), |l| l.to_string());
        let _ = writeln!(out, "{label}\t{}", join_ids(&t.actions));
    }
    out
}

pub fn parse_traces(text: &str) -> Result<Vec<ObservationTrace>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (label, ids) = line
                .split_once('\t')
                .ok_or_else(|| format_err(TRACES, i + 1, "missing tab"))?;
            let label = match label.trim() {
                "-" => None,
                l => Some(
                    l.parse()
                        .map_err(|_| format_err(TRACES, i + 1, format!("bad label `{l}`")))?,
                ),
            };
            Ok(ObservationTrace::new(parse_ids(ids, TRACES, i + 1)?, label)?)
        })
        .collect()
}

pub fn format_vocab(vocab: &[String]) -> String {
    vocab.iter().enumerate().map(|(i, a)| format!("{i}\t{a}\n")).collect()
}

pub fn parse_vocab(text: &str) -> Result<Vec<String>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| format_err(VOCAB, i + 1, "missing tab"))?;
            if id.trim().parse::<usize>().ok() != Some(i) {
                return Err(format_err(VOCAB, i + 1, format!("expected id {i}")));
            }
            Ok(name.trim().to_string())
        })
        .collect()
}

impl Dataset {
    pub fn save(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        let meta = toml::to_string(&self.meta).map_err(|e| format_err(META, 0, e.to_string()))?;
        fs::write(dir.join(META), meta)?;
        fs::write(dir.join(VOCAB), format_vocab(&self.vocab))?;
        fs::write(dir.join(TRACES), format_traces(&self.traces))?;
        let s = &self.split;
        fs::write(
            dir.join(SPLIT),
            format!(
                "train\t{}\nvalidation\t{}\nheldout\t{}\n",
                join_ids(&s.train),
                join_ids(&s.validation),
                join_ids(&s.heldout)
            ),
        )?;
        if let Some(src) = domains::domain_source(self.meta.family) {
            fs::write(dir.join(DOMAIN), src)?;
            let inst_dir = dir.join(INSTANCE_DIR);
            fs::create_dir_all(&inst_dir)?;
            for (k, p) in self.instances.iter().enumerate() {
                fs::write(inst_dir.join(format!("{k:05}.pddl")), format!("{p}\n"))?;
            }
            fs::write(dir.join(INSTANCE_MAP), join_ids(&self.instance_of) + "\n")?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let meta: DatasetMeta =
            toml::from_str(&fs::read_to_string(dir.join(META))?).map_err(|e| format_err(META, 0, e.to_string()))?;
        let vocab = parse_vocab(&fs::read_to_string(dir.join(VOCAB))?)?;
        let traces = parse_traces(&fs::read_to_string(dir.join(TRACES))?)?;
        for (i, t) in traces.iter().enumerate() {
            t.validate(vocab.len())
                .map_err(|e| format_err(TRACES, i + 1, e.to_string()))?;
            if t.label.is_some_and(|l| l >= meta.priors.len()) {
                return Err(format_err(TRACES, i + 1, "label outside hypothesis set"));
            }
        }
        let mut split = Split::default();
        for (i, line) in fs::read_to_string(dir.join(SPLIT))?.lines().enumerate() {
            let (part, ids) = line.split_once('\t').unwrap_or((line, ""));
            let ids: Vec<usize> = parse_ids(ids, SPLIT, i + 1)?;
            if ids.iter().any(|&t| t >= traces.len()) {
                return Err(format_err(SPLIT, i + 1, "trace index out of range"));
            }
            match part {
                "train" => split.train = ids,
                "validation" => split.validation = ids,
                "heldout" => split.heldout = ids,
                other => return Err(format_err(SPLIT, i + 1, format!("unknown part `{other}`"))),
            }
        }
        let (instances, instance_of) = match domains::domain_source(meta.family) {
            None => (Vec::new(), Vec::new()),
            Some(_) => {
                let schema = strips::parse_domain(&fs::read_to_string(dir.join(DOMAIN))?)?;
                let mut files: Vec<_> = fs::read_dir(dir.join(INSTANCE_DIR))?
                    .map(|e| e.map(|e| e.path()))
                    .collect::<Result<_, _>>()?;
                files.sort();
                let instances = files
                    .iter()
                    .map(|f| Ok(strips::parse_problem(&fs::read_to_string(f)?, &schema)?))
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                let instance_of: Vec<usize> = parse_ids(&fs::read_to_string(dir.join(INSTANCE_MAP))?, INSTANCE_MAP, 1)?;
                if instance_of.len() != traces.len() || instance_of.iter().any(|&k| k >= instances.len()) {
                    return Err(format_err(INSTANCE_MAP, 1, "instance map does not match traces"));
                }
                (instances, instance_of)
            }
        };
        Ok(Dataset {
            meta,
            vocab,
            traces,
            instances,
            instance_of,
            split,
        })
    }
}
