use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{truncate, Dataset, HarnessError};
use crate::gbt::{featurize, train_gbt, GbtConfig, GbtEnsemble};
use crate::landmarks::{LandmarkExtractor, LandmarkGraph};
use crate::recognizer::{recognize_trace, DomainModel, RecognitionResult};
use crate::seq::{train_seq, SeqHyper, SeqModel};
use crate::strips::{GroundTask, ObservationTrace};

/// Prefix ratios each training trace contributes to learned models.
pub const TRAIN_RATIOS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];

/// A goal recognizer the harness can evaluate.
pub trait Method: Send + Sync {
    fn name(&self) -> &str;

    fn supports(&self, ds: &Dataset) -> bool;

    /// Untimed setup over the traces about to be predicted: training,
    /// grounding, landmark extraction.
    /// `per_trace` is the number of prefixes of each trace to be predicted.
    fn prepare(&mut self, ds: &Dataset, traces: &[usize], per_trace: usize) -> Result<(), HarnessError>;

    /// Predicted hypothesis for `prefix` of dataset trace `trace`, and the
    /// time charged to this prediction.
    fn predict(&self, ds: &Dataset, trace: usize, prefix: &ObservationTrace)
        -> Result<(usize, Duration), HarnessError>;
}

/// Prefix-augmented training examples from `indices`.
pub fn training_examples(ds: &Dataset, indices: &[usize]) -> Vec<(Vec<u32>, usize)> {
    let mut out = Vec::with_capacity(indices.len() * TRAIN_RATIOS.len());
    for (t, y) in ds.labeled(indices) {
        for &r in &TRAIN_RATIOS {
            out.push((truncate(t, r).actions, y));
        }
    }
    out
}

struct Grounded {
    task: GroundTask,
    vocab_map: Vec<Option<u32>>,
    graphs: Vec<LandmarkGraph>,
    /// Extraction time divided over the predictions that use this instance.
    setup_share: Duration,
}

/// Landmark-based recognizer, optionally weighting scores by hypothesis priors.
/// Without priors, hypotheses tied at the top score are split by a draw seeded
/// from the trace index and prefix length, so hypothesis order carries no
/// preference.
pub struct Lgr {
    pub theta: f64,
    pub use_prior: bool,
    grounded: HashMap<usize, Grounded>,
}

impl Lgr {
    pub fn new(theta: f64, use_prior: bool) -> Self {
        Lgr {
            theta,
            use_prior,
            grounded: HashMap::new(),
        }
    }

    /// Full recognition output for one prefix.
    pub fn recognize(
        &self,
        ds: &Dataset,
        trace: usize,
        prefix: &ObservationTrace,
    ) -> Result<RecognitionResult, HarnessError> {
        let k = ds.instance_of[trace];
        let g = self.grounded.get(&k).ok_or(HarnessError::NotPrepared)?;
        let actions = prefix
            .actions
            .iter()
            .map(|&a| g.vocab_map[a as usize].ok_or_else(|| HarnessError::ForeignAction(ds.vocab[a as usize].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let local = ObservationTrace::new(actions, prefix.label)?;
        let priors = self.use_prior.then(|| g.task.priors());
        Ok(recognize_trace(
            DomainModel::Strips(&g.task),
            &g.graphs,
            &local,
            self.theta,
            priors.as_deref(),
        )?)
    }
}

impl Method for Lgr {
    fn name(&self) -> &str {
        if self.use_prior {
            "lgr+prior"
        } else {
            "lgr"
        }
    }

    fn supports(&self, ds: &Dataset) -> bool {
        ds.is_strips()
    }

    fn prepare(&mut self, ds: &Dataset, traces: &[usize], per_trace: usize) -> Result<(), HarnessError> {
        let mut uses: HashMap<usize, usize> = HashMap::new();
        for &t in traces {
            *uses.entry(ds.instance_of[t]).or_default() += per_trace.max(1);
        }
        let mut todo: Vec<(usize, usize)> = uses
            .into_iter()
            .filter(|(k, _)| !self.grounded.contains_key(k))
            .collect();
        todo.sort_unstable();
        let built = todo
            .par_iter()
            .map(|&(k, n)| {
                let start = Instant::now();
                let (task, vocab_map) = ds.ground_instance(k)?;
                let graphs = LandmarkExtractor::new(&task).extract_all()?;
                let setup_share = start.elapsed() / n as u32;
                Ok((
                    k,
                    Grounded {
                        task,
                        vocab_map,
                        graphs,
                        setup_share,
                    },
                ))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        self.grounded.extend(built);
        Ok(())
    }

    fn predict(
        &self,
        ds: &Dataset,
        trace: usize,
        prefix: &ObservationTrace,
    ) -> Result<(usize, Duration), HarnessError> {
        let mut r = self.recognize(ds, trace, prefix)?;
        if !self.use_prior {
            r.predicted = break_tie(&r.scores, trace, prefix.len());
        }
        let share = self.grounded[&ds.instance_of[trace]].setup_share;
        Ok((r.predicted, r.elapsed + share))
    }
}

fn break_tie(scores: &[f64], trace: usize, observed: usize) -> usize {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<usize> = (0..scores.len()).filter(|&h| scores[h] == max).collect();
    if top.len() == 1 {
        return top[0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trace as u64);
    rng.set_stream(observed as u64);
    top[rng.gen_range(0..top.len())]
}

/// Gradient-boosted trees over bag-of-actions counts.
pub struct Gbt {
    pub config: GbtConfig,
    pub model: Option<GbtEnsemble>,
    /// Training log-loss per round of the last fit.
    pub train_loss: Vec<f64>,
}

impl Gbt {
    pub fn new(config: GbtConfig) -> Self {
        Gbt {
            config,
            model: None,
            train_loss: Vec::new(),
        }
    }

    pub fn pretrained(model: GbtEnsemble) -> Self {
        Gbt {
            config: GbtConfig::default(),
            model: Some(model),
            train_loss: Vec::new(),
        }
    }

    pub fn fit(&mut self, ds: &Dataset, indices: &[usize]) -> Result<&GbtEnsemble, HarnessError> {
        let data = training_examples(ds, indices)
            .into_iter()
            .map(|(a, y)| Ok((featurize(&a, ds.vocab.len())?, y)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let t = train_gbt(&data, ds.n_classes(), &self.config)?;
        self.train_loss = t.train_loss;
        Ok(self.model.insert(t.model))
    }
}

impl Method for Gbt {
    fn name(&self) -> &str {
        "gbt"
    }

    fn supports(&self, _: &Dataset) -> bool {
        true
    }

    fn prepare(&mut self, ds: &Dataset, _: &[usize], _: usize) -> Result<(), HarnessError> {
        if self.model.is_none() {
            let train = ds.split.train.clone();
            self.fit(ds, &train)?;
        }
        Ok(())
    }

    fn predict(&self, ds: &Dataset, _: usize, prefix: &ObservationTrace) -> Result<(usize, Duration), HarnessError> {
        let m = self.model.as_ref().ok_or(HarnessError::NotPrepared)?;
        let start = Instant::now();
        let x = featurize(&prefix.actions, ds.vocab.len())?;
        let label = m.predict(&x)?.label;
        Ok((label, start.elapsed()))
    }
}

/// LSTM sequence classifier.
pub struct Lstm {
    pub hyper: SeqHyper,
    pub seed: u64,
    pub model: Option<SeqModel>,
    pub batch_loss: Vec<f64>,
}

impl Lstm {
    pub fn new(hyper: SeqHyper, seed: u64) -> Self {
        Lstm {
            hyper,
            seed,
            model: None,
            batch_loss: Vec::new(),
        }
    }

    pub fn pretrained(model: SeqModel) -> Self {
        Lstm {
            hyper: model.hyper,
            seed: 0,
            model: Some(model),
            batch_loss: Vec::new(),
        }
    }

    pub fn fit(&mut self, ds: &Dataset, indices: &[usize]) -> Result<&SeqModel, HarnessError> {
        let data = training_examples(ds, indices);
        let t = train_seq(&data, ds.vocab.len(), ds.n_classes(), &self.hyper, self.seed)?;
        self.batch_loss = t.batch_loss;
        Ok(self.model.insert(t.model))
    }
}

impl Method for Lstm {
    fn name(&self) -> &str {
        "lstm"
    }

    fn supports(&self, _: &Dataset) -> bool {
        true
    }

    fn prepare(&mut self, ds: &Dataset, _: &[usize], _: usize) -> Result<(), HarnessError> {
        if self.model.is_none() {
            let train = ds.split.train.clone();
            self.fit(ds, &train)?;
        }
        Ok(())
    }

    fn predict(&self, _: &Dataset, _: usize, prefix: &ObservationTrace) -> Result<(usize, Duration), HarnessError> {
        let m = self.model.as_ref().ok_or(HarnessError::NotPrepared)?;
        let start = Instant::now();
        let label = m.predict(&prefix.actions)?;
        Ok((label, start.elapsed()))
    }
}
