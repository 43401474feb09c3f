//! LSTM sequence classifier trained with backpropagation through time.
//!
//! Actions are embedded through a learned lookup table, fed through a single
//! LSTM cell, and the final hidden state is mapped to class logits.

use std::io::{Read, Write};

use ndarray::{s, Array1, Array2, ArrayView1, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbt::{argmax, softmax};

const FORMAT: &str = "goalrec-lstm";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("action id {id} outside vocabulary of {vocab_size}")]
    IndexOutOfVocab { id: u32, vocab_size: usize },
    #[error("empty action sequence")]
    EmptySequence,
    #[error("training data must contain at least two classes")]
    SingleClassData,
    #[error("label {label} outside {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("learning-curve sizes must be strictly increasing and at most {available}")]
    BadCurveSizes { available: usize },
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeqHyper {
    pub d_embed: usize,
    pub d_hidden: usize,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    /// Global gradient-norm clip applied to every minibatch update.
    pub clip: f64,
    pub optimizer: Optimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl Default for SeqHyper {
    fn default() -> Self {
        SeqHyper {
            d_embed: 32,
            d_hidden: 32,
            lr: 0.01,
            batch: 32,
            epochs: 10,
            clip: 5.0,
            optimizer: Optimizer::Adam,
        }
    }
}

/// Parameters of the classifier. Gate weights are stored side by side in
/// `gates`, columns `[input | forget | cell | output]`, each block
/// `d_hidden` wide; rows are `[embedding ; previous hidden]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqModel {
    pub embed: Array2<f64>,
    pub gates: Array2<f64>,
    pub gates_bias: Array1<f64>,
    pub out: Array2<f64>,
    pub out_bias: Array1<f64>,
    pub hyper: SeqHyper,
}

/// Gradient record with the same shapes as [`SeqModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeqGrads {
    pub embed: Array2<f64>,
    pub gates: Array2<f64>,
    pub gates_bias: Array1<f64>,
    pub out: Array2<f64>,
    pub out_bias: Array1<f64>,
}

impl SeqGrads {
    fn zeros(m: &SeqModel) -> Self {
        SeqGrads {
            embed: Array2::zeros(m.embed.raw_dim()),
            gates: Array2::zeros(m.gates.raw_dim()),
            gates_bias: Array1::zeros(m.gates_bias.raw_dim()),
            out: Array2::zeros(m.out.raw_dim()),
            out_bias: Array1::zeros(m.out_bias.raw_dim()),
        }
    }

    fn add_assign(&mut self, o: &SeqGrads) {
        self.embed += &o.embed;
        self.gates += &o.gates;
        self.gates_bias += &o.gates_bias;
        self.out += &o.out;
        self.out_bias += &o.out_bias;
    }

    fn params_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.embed.as_slice_mut().expect("contiguous"),
            self.gates.as_slice_mut().expect("contiguous"),
            self.gates_bias.as_slice_mut().expect("contiguous"),
            self.out.as_slice_mut().expect("contiguous"),
            self.out_bias.as_slice_mut().expect("contiguous"),
        ]
    }

    fn scale(&mut self, k: f64) {
        self.embed *= k;
        self.gates *= k;
        self.gates_bias *= k;
        self.out *= k;
        self.out_bias *= k;
    }

    pub fn norm(&self) -> f64 {
        let sq = |a: f64, x: &f64| a + x * x;
        (self.embed.iter().fold(0.0, sq)
            + self.gates.iter().fold(0.0, sq)
            + self.gates_bias.iter().fold(0.0, sq)
            + self.out.iter().fold(0.0, sq)
            + self.out_bias.iter().fold(0.0, sq))
        .sqrt()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step values kept for the backward pass.
struct Step {
    xh: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    c_prev: Array1<f64>,
    tanh_c: Array1<f64>,
}

impl SeqModel {
    pub fn new(vocab_size: usize, n_classes: usize, hyper: SeqHyper, seed: u64) -> Self {
        let (e, h) = (hyper.d_embed, hyper.d_hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (h as f64).sqrt();
        let mut uniform = |r: usize, c: usize| Array2::from_shape_simple_fn((r, c), || rng.gen_range(-bound..bound));
        let embed = uniform(vocab_size, e);
        let gates = uniform(e + h, 4 * h);
        let out = uniform(h, n_classes);
        let mut gates_bias = Array1::zeros(4 * h);
        gates_bias.slice_mut(s![h..2 * h]).fill(1.0);
        SeqModel {
            embed,
            gates,
            gates_bias,
            out,
            out_bias: Array1::zeros(n_classes),
            hyper,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embed.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.out.ncols()
    }

    fn check(&self, seq: &[u32]) -> Result<(), SeqError> {
        if seq.is_empty() {
            return Err(SeqError::EmptySequence);
        }
        let vocab_size = self.vocab_size();
        match seq.iter().find(|&&a| a as usize >= vocab_size) {
            Some(&id) => Err(SeqError::IndexOutOfVocab { id, vocab_size }),
            None => Ok(()),
        }
    }

    fn run(&self, seq: &[u32], keep: bool) -> (Vec<Step>, Array1<f64>) {
        let (e, hd) = (self.hyper.d_embed, self.hyper.d_hidden);
        let mut h = Array1::<f64>::zeros(hd);
        let mut c = Array1::<f64>::zeros(hd);
        let mut steps = Vec::with_capacity(if keep { seq.len() } else { 0 });
        for &a in seq {
            let mut xh = Array1::zeros(e + hd);
            xh.slice_mut(s![..e]).assign(&self.embed.row(a as usize));
            xh.slice_mut(s![e..]).assign(&h);
            let z = xh.dot(&self.gates) + &self.gates_bias;
            let i = z.slice(s![..hd]).mapv(sigmoid);
            let f = z.slice(s![hd..2 * hd]).mapv(sigmoid);
            let g = z.slice(s![2 * hd..3 * hd]).mapv(f64::tanh);
            let o = z.slice(s![3 * hd..]).mapv(sigmoid);
            let c_new = &f * &c + &i * &g;
            let tanh_c = c_new.mapv(f64::tanh);
            h = &o * &tanh_c;
            let c_prev = std::mem::replace(&mut c, c_new);
            if keep {
                steps.push(Step {
                    xh,
                    i,
                    f,
                    g,
                    o,
                    c_prev,
                    tanh_c,
                });
            }
        }
        (steps, h)
    }

    fn logits(&self, h: ArrayView1<f64>) -> Vec<f64> {
        (h.dot(&self.out) + &self.out_bias).to_vec()
    }

    /// Class probabilities after reading the whole sequence.
    pub fn forward(&self, seq: &[u32]) -> Result<Vec<f64>, SeqError> {
        self.check(seq)?;
        let (_, h) = self.run(seq, false);
        Ok(softmax(&self.logits(h.view())))
    }

    pub fn predict(&self, seq: &[u32]) -> Result<usize, SeqError> {
        Ok(argmax(&self.forward(seq)?))
    }

    /// Cross-entropy loss and its exact gradient for one labeled sequence.
    pub fn backward(&self, seq: &[u32], label: usize) -> Result<(SeqGrads, f64), SeqError> {
        self.check(seq)?;
        if label >= self.n_classes() {
            return Err(SeqError::LabelOutOfRange {
                label,
                n_classes: self.n_classes(),
            });
        }
        let (e, hd) = (self.hyper.d_embed, self.hyper.d_hidden);
        let (steps, h_last) = self.run(seq, true);
        let p = softmax(&self.logits(h_last.view()));
        let loss = -p[label].max(f64::MIN_POSITIVE).ln();

        let mut grads = SeqGrads::zeros(self);
        let mut dlogits = Array1::from(p);
        dlogits[label] -= 1.0;
        grads.out = outer(&h_last, &dlogits);
        grads.out_bias.assign(&dlogits);
        let mut dh = self.out.dot(&dlogits);
        let mut dc = Array1::<f64>::zeros(hd);
        let mut dz = Array1::<f64>::zeros(4 * hd);
        for (t, st) in steps.iter().enumerate().rev() {
            let d_o = &dh * &st.tanh_c;
            dc = dc + &dh * &st.o * &st.tanh_c.mapv(|x| 1.0 - x * x);
            let di = &dc * &st.g;
            let dg = &dc * &st.i;
            let df = &dc * &st.c_prev;
            dc = &dc * &st.f;
            Zip::from(dz.slice_mut(s![..hd]))
                .and(&di)
                .and(&st.i)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));
            Zip::from(dz.slice_mut(s![hd..2 * hd]))
                .and(&df)
                .and(&st.f)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));
            Zip::from(dz.slice_mut(s![2 * hd..3 * hd]))
                .and(&dg)
                .and(&st.g)
                .for_each(|z, &d, &v| *z = d * (1.0 - v * v));
            Zip::from(dz.slice_mut(s![3 * hd..]))
                .and(&d_o)
                .and(&st.o)
                .for_each(|z, &d, &v| *z = d * v * (1.0 - v));
            grads.gates += &outer(&st.xh, &dz);
            grads.gates_bias += &dz;
            let dxh = self.gates.dot(&dz);
            let mut row = grads.embed.row_mut(seq[t] as usize);
            row += &dxh.slice(s![..e]);
            dh = dxh.slice(s![e..]).to_owned();
        }
        Ok((grads, loss))
    }

    fn params_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.embed.as_slice_mut().expect("contiguous"),
            self.gates.as_slice_mut().expect("contiguous"),
            self.gates_bias.as_slice_mut().expect("contiguous"),
            self.out.as_slice_mut().expect("contiguous"),
            self.out_bias.as_slice_mut().expect("contiguous"),
        ]
    }

    fn apply(&mut self, g: &SeqGrads, lr: f64) {
        self.embed.scaled_add(-lr, &g.embed);
        self.gates.scaled_add(-lr, &g.gates);
        self.gates_bias.scaled_add(-lr, &g.gates_bias);
        self.out.scaled_add(-lr, &g.out);
        self.out_bias.scaled_add(-lr, &g.out_bias);
    }

    pub fn save(&self, mut w: impl Write) -> Result<(), SeqError> {
        let file = ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            model: self.clone(),
        };
        serde_json::to_writer(&mut w, &file).map_err(|e| SeqError::Format(e.to_string()))?;
        Ok(())
    }

    pub fn load(r: impl Read) -> Result<Self, SeqError> {
        let file: ModelFile = serde_json::from_reader(r).map_err(|e| SeqError::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(SeqError::Format(format!(
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
    model: SeqModel,
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)))
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct Adam {
    m: SeqGrads,
    v: SeqGrads,
    t: i32,
}

impl Adam {
    fn new(model: &SeqModel) -> Self {
        Adam {
            m: SeqGrads::zeros(model),
            v: SeqGrads::zeros(model),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut SeqModel, g: &mut SeqGrads, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        let params = model.params_mut();
        let grads = g.params_mut();
        let ms = self.m.params_mut();
        let vs = self.v.params_mut();
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(ms).zip(vs) {
            for j in 0..p.len() {
                m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * g[j];
                v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * g[j] * g[j];
                p[j] -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

pub struct SeqTraining {
    pub model: SeqModel,
    /// Mean loss of every minibatch, in update order.
    pub batch_loss: Vec<f64>,
}

/// Minibatch training over labeled sequences. Sequences are processed
/// one by one (no padding) and their gradients averaged per batch.
pub fn train_seq(
    data: &[(Vec<u32>, usize)],
    vocab_size: usize,
    n_classes: usize,
    hyper: &SeqHyper,
    seed: u64,
) -> Result<SeqTraining, SeqError> {
    let mut seen = vec![false; n_classes];
    for (seq, y) in data {
        if *y >= n_classes {
            return Err(SeqError::LabelOutOfRange { label: *y, n_classes });
        }
        if seq.is_empty() {
            return Err(SeqError::EmptySequence);
        }
        if let Some(&id) = seq.iter().find(|&&a| a as usize >= vocab_size) {
            return Err(SeqError::IndexOutOfVocab { id, vocab_size });
        }
        seen[*y] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(SeqError::SingleClassData);
    }
    let mut model = SeqModel::new(vocab_size, n_classes, *hyper, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch_loss = Vec::new();
    let mut adam = Adam::new(&model);
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(hyper.batch.max(1)) {
            let parts: Vec<(SeqGrads, f64)> = batch
                .par_iter()
                .map(|&i| model.backward(&data[i].0, data[i].1).expect("validated"))
                .collect();
            let mut total = SeqGrads::zeros(&model);
            let mut loss = 0.0;
            for (g, l) in &parts {
                total.add_assign(g);
                loss += l;
            }
            let k = 1.0 / batch.len() as f64;
            total.scale(k);
            let norm = total.norm();
            if norm > hyper.clip {
                total.scale(hyper.clip / norm);
            }
            match hyper.optimizer {
                Optimizer::Sgd => model.apply(&total, hyper.lr),
                Optimizer::Adam => adam.step(&mut model, &mut total, hyper.lr),
            }
            batch_loss.push(loss * k);
        }
    }
    Ok(SeqTraining { model, batch_loss })
}

pub fn accuracy(model: &SeqModel, data: &[(Vec<u32>, usize)]) -> Result<f64, SeqError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut ok = 0usize;
    for (seq, y) in data {
        ok += usize::from(model.predict(seq)? == *y);
    }
    Ok(ok as f64 / data.len() as f64)
}

/// Trains one model on each leading slice `train[..n]` and scores it on `eval`.
pub fn learning_curve(
    train: &[(Vec<u32>, usize)],
    sizes: &[usize],
    vocab_size: usize,
    n_classes: usize,
    hyper: &SeqHyper,
    seed: u64,
    eval: &[(Vec<u32>, usize)],
) -> Result<Vec<(usize, f64)>, SeqError> {
    let increasing = sizes.windows(2).all(|w| w[0] < w[1]);
    if !increasing || sizes.first() == Some(&0) || sizes.last().is_some_and(|&n| n > train.len()) {
        return Err(SeqError::BadCurveSizes { available: train.len() });
    }
    sizes
        .iter()
        .map(|&n| {
            let m = train_seq(&train[..n], vocab_size, n_classes, hyper, seed)?.model;
            Ok((n, accuracy(&m, eval)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use rand::Rng;

    fn tiny(seed: u64) -> SeqModel {
        let hyper = SeqHyper {
            d_embed: 2,
            d_hidden: 2,
            ..Default::default()
        };
        SeqModel::new(3, 2, hyper, seed)
    }

    /// Class is the last action's parity; earlier actions are noise.
    pub(crate) fn suffix_signal(n: usize, seed: u64) -> Vec<(Vec<u32>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let len = rng.gen_range(1..8);
                let mut seq: Vec<u32> = (0..len).map(|_| rng.gen_range(2..6)).collect();
                let y = rng.gen_range(0..2usize);
                *seq.last_mut().unwrap() = y as u32;
                (seq, y)
            })
            .collect()
    }

    #[test]
    fn zero_model_outputs_softmax_of_bias() {
        let mut m = tiny(0);
        m.embed.fill(0.0);
        m.gates.fill(0.0);
        m.gates_bias.fill(0.0);
        m.out.fill(0.0);
        m.out_bias = Array1::from(vec![1.0, 2.0]);
        let expect = softmax(&[1.0, 2.0]);
        assert_eq!(m.forward(&[0]).unwrap(), expect);
        assert_eq!(m.forward(&[2, 1]).unwrap(), expect);
    }

    #[test]
    fn hand_evaluated_cell() {
        let mut m = tiny(0);
        m.embed = Array2::from_shape_vec((3, 2), vec![0.5, -0.5, 1.0, 0.0, 0.0, 1.0]).unwrap();
        m.gates = Array2::from_shape_fn((4, 8), |(r, c)| 0.1 * (r as f64 + 1.0) - 0.05 * c as f64);
        m.gates_bias = Array1::from_shape_fn(8, |c| if (2..4).contains(&c) { 1.0 } else { 0.0 });
        m.out = Array2::from_shape_vec((2, 2), vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        m.out_bias = Array1::from(vec![0.1, -0.1]);

        // scalar re-evaluation of the cell equations
        let w = |r: usize, c: usize| m.gates[[r, c]];
        let b = |c: usize| m.gates_bias[c];
        let (mut h, mut c) = ([0.0f64; 2], [0.0f64; 2]);
        for &a in &[1usize, 2] {
            let x = [m.embed[[a, 0]], m.embed[[a, 1]]];
            let xh = [x[0], x[1], h[0], h[1]];
            let z = |col: usize| (0..4).map(|r| xh[r] * w(r, col)).sum::<f64>() + b(col);
            let mut nh = [0.0; 2];
            for j in 0..2 {
                let i = sigmoid(z(j));
                let f = sigmoid(z(2 + j));
                let g = z(4 + j).tanh();
                let o = sigmoid(z(6 + j));
                c[j] = f * c[j] + i * g;
                nh[j] = o * c[j].tanh();
            }
            h = nh;
        }
        let logits: Vec<f64> = (0..2)
            .map(|k| h[0] * m.out[[0, k]] + h[1] * m.out[[1, k]] + m.out_bias[k])
            .collect();
        let expect = softmax(&logits);
        let got = m.forward(&[1, 2]).unwrap();
        for k in 0..2 {
            assert!((got[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn input_errors() {
        let m = tiny(0);
        assert!(matches!(m.forward(&[]), Err(SeqError::EmptySequence)));
        assert!(matches!(m.forward(&[3]), Err(SeqError::IndexOutOfVocab { id: 3, .. })));
        assert!(matches!(m.backward(&[0], 2), Err(SeqError::LabelOutOfRange { .. })));
    }

    #[test]
    fn output_bias_gradient_is_residual() {
        let m = tiny(4);
        let p = m.forward(&[0, 1, 2]).unwrap();
        let (g, loss) = m.backward(&[0, 1, 2], 1).unwrap();
        assert!((g.out_bias[0] - p[0]).abs() < 1e-12);
        assert!((g.out_bias[1] - (p[1] - 1.0)).abs() < 1e-12);
        assert!((loss + p[1].ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_prediction_has_small_gradient() {
        let mut m = tiny(1);
        m.out_bias = Array1::from(vec![0.0, 30.0]);
        let (g, loss) = m.backward(&[2, 0], 1).unwrap();
        assert!(loss < 1e-9);
        assert!(g.norm() < 1e-9);
    }

    fn loss_of(m: &SeqModel, seq: &[u32], y: usize) -> f64 {
        -m.forward(seq).unwrap()[y].ln()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let seq = [0u32, 2, 1, 1];
        let y = 0;
        for seed in 0..3 {
            let m = tiny(seed);
            let (g, _) = m.backward(&seq, y).unwrap();
            let eps = 1e-4;
            let mut worst = 0.0f64;
            let mut check = |analytic: f64, get: &dyn Fn(&mut SeqModel) -> &mut f64| {
                let mut plus = m.clone();
                *get(&mut plus) += eps;
                let mut minus = m.clone();
                *get(&mut minus) -= eps;
                let fd = (loss_of(&plus, &seq, y) - loss_of(&minus, &seq, y)) / (2.0 * eps);
                worst = worst.max((analytic - fd).abs() / analytic.abs().max(1.0));
            };
            for ((r, c), &a) in g.embed.indexed_iter() {
                check(a, &|p| &mut p.embed[[r, c]]);
            }
            for ((r, c), &a) in g.gates.indexed_iter() {
                check(a, &|p| &mut p.gates[[r, c]]);
            }
            for (i, &a) in g.gates_bias.indexed_iter() {
                check(a, &|p| &mut p.gates_bias[i]);
            }
            for ((r, c), &a) in g.out.indexed_iter() {
                check(a, &|p| &mut p.out[[r, c]]);
            }
            for (i, &a) in g.out_bias.indexed_iter() {
                check(a, &|p| &mut p.out_bias[i]);
            }
            assert!(worst < 1e-4, "seed {seed}: {worst}");
        }
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let m = SeqModel::new(5, 3, SeqHyper::default(), 0);
        let h = m.hyper.d_hidden;
        assert!(m.gates_bias.slice(s![h..2 * h]).iter().all(|&b| b == 1.0));
        assert!(m.gates_bias.slice(s![..h]).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn suffix_signal_is_learned() {
        let train = suffix_signal(1000, 1);
        let test = suffix_signal(300, 2);
        let t = train_seq(&train, 6, 2, &SeqHyper::default(), 7).unwrap();
        let acc = accuracy(&t.model, &test).unwrap();
        assert!(acc >= 0.99, "{acc}");
    }

    #[test]
    fn prior_only_data_tracks_majority() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut gen = |n: usize| -> Vec<(Vec<u32>, usize)> {
            (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..6);
                    let seq = (0..len).map(|_| rng.gen_range(0..4)).collect();
                    (seq, usize::from(rng.gen::<f64>() >= 0.8))
                })
                .collect()
        };
        let train = gen(600);
        let test = gen(400);
        let t = train_seq(&train, 4, 2, &SeqHyper::default(), 3).unwrap();
        let acc = accuracy(&t.model, &test).unwrap();
        assert!((0.72..=0.88).contains(&acc), "{acc}");
    }

    #[test]
    fn loss_drops_over_first_steps() {
        let data = suffix_signal(64, 11);
        let batch: Vec<_> = data[..32].to_vec();
        let hyper = SeqHyper {
            epochs: 1,
            batch: 32,
            ..Default::default()
        };
        let ok = (0..3).any(|seed| {
            let mut m = SeqModel::new(6, 2, hyper, seed);
            let mean_loss = |m: &SeqModel| batch.iter().map(|(s, y)| loss_of(m, s, *y)).sum::<f64>() / 32.0;
            let start = mean_loss(&m);
            for _ in 0..5 {
                let mut total = SeqGrads::zeros(&m);
                for (s, y) in &batch {
                    total.add_assign(&m.backward(s, *y).unwrap().0);
                }
                total.scale(1.0 / 32.0);
                m.apply(&total, hyper.lr);
            }
            mean_loss(&m) < start
        });
        assert!(ok);
    }

    #[test]
    fn deterministic_and_round_trips() {
        let data = suffix_signal(80, 3);
        let hyper = SeqHyper {
            epochs: 2,
            ..Default::default()
        };
        let a = train_seq(&data, 6, 2, &hyper, 9).unwrap();
        let b = train_seq(&data, 6, 2, &hyper, 9).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.batch_loss, b.batch_loss);
        let mut buf = Vec::new();
        a.model.save(&mut buf).unwrap();
        assert_eq!(SeqModel::load(&buf[..]).unwrap(), a.model);
    }

    #[test]
    fn curve_points_and_size_checks() {
        let train = suffix_signal(1000, 4);
        let eval = suffix_signal(200, 5);
        let hyper = SeqHyper::default();
        let curve = learning_curve(&train, &[10, 100, 1000], 6, 2, &hyper, 1, &eval).unwrap();
        assert_eq!(curve.iter().map(|p| p.0).collect::<Vec<_>>(), vec![10, 100, 1000]);
        for w in curve.windows(2) {
            assert!(w[1].1 >= w[0].1 - 0.05, "{curve:?}");
        }
        assert_eq!(learning_curve(&train, &[50], 6, 2, &hyper, 1, &eval).unwrap().len(), 1);
        assert!(learning_curve(&train, &[100, 10], 6, 2, &hyper, 1, &eval).is_err());
        assert!(train_seq(&[(vec![0], 1), (vec![1], 1)], 2, 2, &hyper, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn softmax_output_sums_to_one(seq in proptest::collection::vec(0u32..3, 1..20), seed in 0u64..100) {
            let p = tiny(seed).forward(&seq).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
