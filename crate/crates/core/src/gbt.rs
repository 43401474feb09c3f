//! Multiclass gradient-boosted regression trees over bag-of-actions counts.
//!
//! Each round fits one tree per class to the softmax gradients
//! `g = p - y` and Hessians `h = p (1 - p)`, using exact greedy split search
//! over the sorted distinct feature values. Leaf weights are the Newton step
//! `-G / (H + lambda)` scaled by the shrinkage factor.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const FORMAT: &str = "goalrec-gbt";
const VERSION: u32 = 1;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GbtError {
    #[error("action id {id} outside vocabulary of {vocab_size}")]
    IndexOutOfVocab { id: u32, vocab_size: usize },
    #[error("cannot featurize an empty prefix")]
    EmptyPrefix,
    #[error("training data must contain at least two classes")]
    SingleClassData,
    #[error("label {label} outside {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("feature vector has length {found}, model expects {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Occurrence count of every vocabulary action in a trace prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<u32>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn featurize(actions: &[u32], vocab_size: usize) -> Result<FeatureVector, GbtError> {
    if actions.is_empty() {
        return Err(GbtError::EmptyPrefix);
    }
    let mut counts = vec![0u32; vocab_size];
    for &a in actions {
        *counts
            .get_mut(a as usize)
            .ok_or(GbtError::IndexOutOfVocab { id: a, vocab_size })? += 1;
    }
    Ok(FeatureVector(counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub l2_lambda: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_rounds: 100,
            max_depth: 3,
            shrinkage: 0.3,
            l2_lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// Samples with `x[feature] < threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[u32]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if f64::from(x[feature as usize]) < threshold {
                        left as usize
                    } else {
                        right as usize
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(t, left as usize).max(go(t, right as usize)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    /// `rounds[r][k]` is the tree for class `k` in round `r`.
    pub rounds: Vec<Vec<RegressionTree>>,
    pub shrinkage: f64,
    pub l2_lambda: f64,
    pub max_depth: usize,
    pub n_classes: usize,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probabilities: Vec<f64>,
    pub label: usize,
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

impl GbtEnsemble {
    /// An ensemble with no trees; predicts the uniform distribution.
    pub fn empty(n_classes: usize, vocab_size: usize, cfg: &GbtConfig) -> Self {
        GbtEnsemble {
            rounds: Vec::new(),
            shrinkage: cfg.shrinkage,
            l2_lambda: cfg.l2_lambda,
            max_depth: cfg.max_depth,
            n_classes,
            vocab_size,
        }
    }

    fn margins(&self, x: &[u32]) -> Vec<f64> {
        let mut m = vec![0.0; self.n_classes];
        for round in &self.rounds {
            for (k, tree) in round.iter().enumerate() {
                m[k] += tree.predict(x);
            }
        }
        m
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<Prediction, GbtError> {
        if x.len() != self.vocab_size {
            return Err(GbtError::ShapeMismatch {
                expected: self.vocab_size,
                found: x.len(),
            });
        }
        let probabilities = softmax(&self.margins(&x.0));
        let label = argmax(&probabilities);
        Ok(Prediction { probabilities, label })
    }

    pub fn save(&self, mut w: impl Write) -> Result<(), GbtError> {
        let file = ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            model: self.clone(),
        };
        serde_json::to_writer(&mut w, &file).map_err(|e| GbtError::Format(e.to_string()))?;
        Ok(())
    }

    pub fn load(r: impl Read) -> Result<Self, GbtError> {
        let file: ModelFile = serde_json::from_reader(r).map_err(|e| GbtError::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(GbtError::Format(format!(
                "expected {FORMAT} v{VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        Ok(file.model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: GbtEnsemble,
}

pub fn predict_gbt(m: &GbtEnsemble, x: &FeatureVector) -> Result<Prediction, GbtError> {
    m.predict(x)
}

/// Column-major view of the nonzero counts, each column sorted by value.
struct Columns {
    cols: Vec<Vec<(u32, u32)>>,
}

impl Columns {
    fn new(data: &[(FeatureVector, usize)], vocab: usize) -> Self {
        let mut cols = vec![Vec::new(); vocab];
        for (i, (x, _)) in data.iter().enumerate() {
            for (f, &c) in x.0.iter().enumerate() {
                if c > 0 {
                    cols[f].push((c, i as u32));
                }
            }
        }
        for c in &mut cols {
            c.sort_unstable();
        }
        Columns { cols }
    }
}

#[derive(Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    n: usize,
}

impl Stats {
    fn add(&mut self, g: f64, h: f64) {
        self.g += g;
        self.h += h;
        self.n += 1;
    }

    fn score(&self, lambda: f64) -> f64 {
        self.g * self.g / (self.h + lambda)
    }
}

struct SplitChoice {
    gain: f64,
    feature: u32,
    threshold: f64,
}

/// Grows one tree level by level. `node_of[i]` tracks the open node of every
/// sample (`usize::MAX` once it sits in a finished leaf).
fn fit_tree(
    cols: &Columns,
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
    lambda: f64,
    shrinkage: f64,
) -> RegressionTree {
    let n = grad.len();
    let mut nodes: Vec<Node> = vec![Node::Leaf(0.0)];
    let mut node_of = vec![0usize; n];
    let mut open: Vec<usize> = vec![0];
    let leaf = |s: &Stats| Node::Leaf(-s.g / (s.h + lambda) * shrinkage);

    for depth in 0..=max_depth {
        if open.is_empty() {
            break;
        }
        let slot: std::collections::HashMap<usize, usize> =
            open.iter().enumerate().map(|(j, &node)| (node, j)).collect();
        let mut totals = vec![Stats::default(); open.len()];
        for i in 0..n {
            if let Some(&j) = slot.get(&node_of[i]) {
                totals[j].add(grad[i], hess[i]);
            }
        }
        if depth == max_depth {
            for (j, &node) in open.iter().enumerate() {
                nodes[node] = leaf(&totals[j]);
            }
            break;
        }
        let mut best: Vec<Option<SplitChoice>> = (0..open.len()).map(|_| None).collect();
        let mut nonzero = vec![Stats::default(); open.len()];
        let mut cum = vec![Stats::default(); open.len()];
        let mut last_val = vec![0u32; open.len()];
        for (f, col) in cols.cols.iter().enumerate() {
            for s in nonzero.iter_mut() {
                *s = Stats::default();
            }
            for &(_, i) in col {
                if let Some(&j) = slot.get(&node_of[i as usize]) {
                    nonzero[j].add(grad[i as usize], hess[i as usize]);
                }
            }
            // left side starts with every zero-count sample of the node
            for j in 0..open.len() {
                let t = &totals[j];
                let nz = &nonzero[j];
                cum[j] = Stats {
                    g: t.g - nz.g,
                    h: t.h - nz.h,
                    n: t.n - nz.n,
                };
                last_val[j] = 0;
            }
            for &(v, i) in col {
                let Some(&j) = slot.get(&node_of[i as usize]) else {
                    continue;
                };
                if v != last_val[j] && cum[j].n > 0 && cum[j].n < totals[j].n {
                    let t = &totals[j];
                    let left = cum[j];
                    let right = Stats {
                        g: t.g - left.g,
                        h: t.h - left.h,
                        n: t.n - left.n,
                    };
                    let gain = left.score(lambda) + right.score(lambda) - t.score(lambda);
                    if gain > MIN_GAIN && best[j].as_ref().is_none_or(|b| gain > b.gain) {
                        best[j] = Some(SplitChoice {
                            gain,
                            feature: f as u32,
                            threshold: (f64::from(last_val[j]) + f64::from(v)) / 2.0,
                        });
                    }
                }
                cum[j].add(grad[i as usize], hess[i as usize]);
                last_val[j] = v;
            }
        }
        let mut next_open = Vec::new();
        let mut children = vec![None; open.len()];
        for (j, &node) in open.iter().enumerate() {
            match &best[j] {
                None => nodes[node] = leaf(&totals[j]),
                Some(sc) => {
                    let l = nodes.len();
                    nodes.push(Node::Leaf(0.0));
                    nodes.push(Node::Leaf(0.0));
                    nodes[node] = Node::Split {
                        feature: sc.feature,
                        threshold: sc.threshold,
                        left: l as u32,
                        right: (l + 1) as u32,
                    };
                    next_open.push(l);
                    next_open.push(l + 1);
                    children[j] = Some((sc.feature, sc.threshold, l));
                }
            }
        }
        // route samples: dense lookup of the split feature per sample
        let mut routed = vec![false; n];
        for (j, child) in children.iter().enumerate() {
            let Some((f, thr, l)) = *child else { continue };
            let node = open[j];
            for &(v, i) in &cols.cols[f as usize] {
                let i = i as usize;
                if node_of[i] == node {
                    node_of[i] = if f64::from(v) < thr { l } else { l + 1 };
                    routed[i] = true;
                }
            }
        }
        for i in 0..n {
            if routed[i] {
                continue;
            }
            if let Some(&j) = slot.get(&node_of[i]) {
                node_of[i] = match children[j] {
                    // zero count: 0 < thr always holds for midpoints above zero
                    Some((_, thr, l)) => {
                        if 0.0 < thr {
                            l
                        } else {
                            l + 1
                        }
                    }
                    None => usize::MAX,
                };
            }
        }
        open = next_open;
    }
    RegressionTree { nodes }
}

/// Mean multiclass log-loss of margins against labels.
fn log_loss(margins: &[Vec<f64>], labels: &[usize]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(m, &y)| {
            let p = softmax(m);
            -p[y].max(f64::MIN_POSITIVE).ln()
        })
        .sum();
    total / labels.len() as f64
}

/// Trained ensemble plus the training log-loss before the first round and
/// after every round.
pub struct GbtTraining {
    pub model: GbtEnsemble,
    pub train_loss: Vec<f64>,
}

pub fn train_gbt(data: &[(FeatureVector, usize)], n_classes: usize, cfg: &GbtConfig) -> Result<GbtTraining, GbtError> {
    let vocab = data.first().map_or(0, |(x, _)| x.len());
    let mut seen = vec![false; n_classes];
    for (x, y) in data {
        if x.len() != vocab {
            return Err(GbtError::ShapeMismatch {
                expected: vocab,
                found: x.len(),
            });
        }
        if *y >= n_classes {
            return Err(GbtError::LabelOutOfRange { label: *y, n_classes });
        }
        seen[*y] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(GbtError::SingleClassData);
    }
    let labels: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
    let cols = Columns::new(data, vocab);
    let mut model = GbtEnsemble::empty(n_classes, vocab, cfg);
    let mut margins = vec![vec![0.0; n_classes]; data.len()];
    let mut train_loss = vec![log_loss(&margins, &labels)];
    let mut grad = vec![0.0; data.len()];
    let mut hess = vec![0.0; data.len()];

    for _ in 0..cfg.n_rounds {
        let probs: Vec<Vec<f64>> = margins.iter().map(|m| softmax(m)).collect();
        let mut round = Vec::with_capacity(n_classes);
        for k in 0..n_classes {
            for i in 0..data.len() {
                let p = probs[i][k];
                grad[i] = p - f64::from(u8::from(labels[i] == k));
                hess[i] = p * (1.0 - p);
            }
            round.push(fit_tree(
                &cols,
                &grad,
                &hess,
                cfg.max_depth,
                cfg.l2_lambda,
                cfg.shrinkage,
            ));
        }
        for (i, (x, _)) in data.iter().enumerate() {
            for (k, tree) in round.iter().enumerate() {
                margins[i][k] += tree.predict(&x.0);
            }
        }
        model.rounds.push(round);
        train_loss.push(log_loss(&margins, &labels));
    }
    Ok(GbtTraining { model, train_loss })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Feature 0 count > 0 exactly for class 1; other features are noise.
    pub(crate) fn separable(n: usize, seed: u64) -> Vec<(FeatureVector, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let y = i % 2;
                let mut x = vec![0u32; 5];
                for v in x.iter_mut().skip(1) {
                    *v = rng.gen_range(0..4);
                }
                if y == 1 {
                    x[0] = rng.gen_range(1..4);
                }
                (FeatureVector(x), y)
            })
            .collect()
    }

    fn accuracy(m: &GbtEnsemble, data: &[(FeatureVector, usize)]) -> f64 {
        let ok = data.iter().filter(|(x, y)| m.predict(x).unwrap().label == *y).count();
        ok as f64 / data.len() as f64
    }

    #[test]
    fn featurize_counts() {
        assert_eq!(featurize(&[2, 2, 0], 4).unwrap(), FeatureVector(vec![1, 0, 2, 0]));
        assert!(matches!(featurize(&[], 4), Err(GbtError::EmptyPrefix)));
        assert!(matches!(
            featurize(&[4], 4),
            Err(GbtError::IndexOutOfVocab { id: 4, .. })
        ));
    }

    #[test]
    fn separable_reaches_full_train_accuracy() {
        let data = separable(200, 1);
        let cfg = GbtConfig {
            n_rounds: 20,
            ..Default::default()
        };
        let t = train_gbt(&data, 2, &cfg).unwrap();
        assert_eq!(accuracy(&t.model, &data), 1.0);
        let x = FeatureVector(vec![3, 0, 0, 0, 0]);
        assert_eq!(t.model.predict(&x).unwrap().label, 1);
        for w in t.train_loss.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for round in &t.model.rounds {
            for tree in round {
                assert!(tree.depth() <= 3);
            }
        }
    }

    #[test]
    fn prior_only_data_predicts_majority() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut gen = |n: usize| -> Vec<(FeatureVector, usize)> {
            (0..n)
                .map(|_| {
                    let y = usize::from(rng.gen::<f64>() >= 0.8);
                    (FeatureVector(vec![1, 1, 1]), y)
                })
                .collect()
        };
        let train = gen(500);
        let test = gen(500);
        let t = train_gbt(&train, 2, &GbtConfig::default()).unwrap();
        let acc = accuracy(&t.model, &test);
        assert!((0.75..=0.85).contains(&acc), "{acc}");
        assert!(test.iter().all(|(x, _)| t.model.predict(x).unwrap().label == 0));
    }

    #[test]
    fn depth_zero_leaf_is_newton_step() {
        let data = separable(30, 2);
        let cfg = GbtConfig {
            n_rounds: 1,
            max_depth: 0,
            shrinkage: 1.0,
            l2_lambda: 1.0,
        };
        let t = train_gbt(&data, 2, &cfg).unwrap();
        // at zero margins p = 1/2 for both classes
        for k in 0..2 {
            let (mut g, mut h) = (0.0, 0.0);
            for (_, y) in &data {
                g += 0.5 - if *y == k { 1.0 } else { 0.0 };
                h += 0.25;
            }
            let expect = -g / (h + 1.0);
            match t.model.rounds[0][k].nodes[..] {
                [Node::Leaf(v)] => assert!((v - expect).abs() < 1e-12),
                ref other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zero_round_model_is_uniform() {
        let m = GbtEnsemble::empty(4, 3, &GbtConfig::default());
        let p = m.predict(&FeatureVector(vec![1, 2, 3])).unwrap();
        assert_eq!(p.probabilities, vec![0.25; 4]);
        assert_eq!(p.label, 0);
        assert!(matches!(
            m.predict(&FeatureVector(vec![1])),
            Err(GbtError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn single_class_rejected() {
        let data = vec![(FeatureVector(vec![1]), 0), (FeatureVector(vec![2]), 0)];
        assert!(matches!(
            train_gbt(&data, 2, &GbtConfig::default()),
            Err(GbtError::SingleClassData)
        ));
    }

    #[test]
    fn save_load_round_trip_and_determinism() {
        let data = separable(100, 5);
        let cfg = GbtConfig {
            n_rounds: 10,
            ..Default::default()
        };
        let a = train_gbt(&data, 2, &cfg).unwrap().model;
        let b = train_gbt(&data, 2, &cfg).unwrap().model;
        assert_eq!(a, b);
        let mut buf = Vec::new();
        a.save(&mut buf).unwrap();
        let back = GbtEnsemble::load(&buf[..]).unwrap();
        assert_eq!(a, back);
        assert!(GbtEnsemble::load(&b"{\"format\":\"x\",\"version\":1,\"model\":null}"[..]).is_err());
    }

    proptest! {
        #[test]
        fn featurize_is_order_invariant(mut trace in proptest::collection::vec(0u32..6, 1..30), seed in any::<u64>()) {
            let a = featurize(&trace, 6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::seq::SliceRandom;
            trace.shuffle(&mut rng);
            let b = featurize(&trace, 6).unwrap();
            prop_assert_eq!(a.0.iter().sum::<u32>() as usize, trace.len());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn probabilities_sum_to_one(x in proptest::collection::vec(0u32..5, 5)) {
            let t = train_gbt(&separable(60, 9), 2, &GbtConfig { n_rounds: 5, ..Default::default() }).unwrap();
            let p = t.model.predict(&FeatureVector(x)).unwrap();
            prop_assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.probabilities.iter().all(|&q| q > 0.0));
        }
    }
}
