//! Experiment harness: trace datasets, observation-ratio truncation,
//! method evaluation, and learning curves.

mod config;
mod dataset;
mod methods;
mod report;

use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

pub use config::HyperConfig;
pub use dataset::{
    build_dataset, format_traces, format_vocab, parse_traces, parse_vocab, split_indices, truncate, Dataset,
    DatasetMeta, Split, HELDOUT, MIN_TRACES, TRACE_NOISE,
};
pub use methods::{training_examples, Gbt, Lgr, Lstm, Method, TRAIN_RATIOS};
pub use report::{curve_csv, EvalReport, ReportRow, CSV_HEADER};

use crate::domains::{DomainError, GeneratorConfig};
use crate::gbt::GbtError;
use crate::landmarks::LandmarkError;
use crate::planner::PlanError;
use crate::recognizer::RecognizeError;
use crate::seq::SeqError;
use crate::strips::StripsError;

/// Observation ratios reported for every method.
pub const RATIOS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{n} traces requested, at least {min} needed")]
    InsufficientTraces { n: usize, min: usize },
    #[error("planning trace {trace}: {source}")]
    Plan { trace: usize, source: PlanError },
    #[error("method used before prepare")]
    NotPrepared,
    #[error("action `{0}` does not exist in the trace's instance")]
    ForeignAction(String),
    #[error("curve sizes must be strictly increasing and positive")]
    BadCurveSizes,
    #[error("{file}:{line}: {msg}")]
    Format { file: String, line: usize, msg: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Strips(#[from] StripsError),
    #[error(transparent)]
    Landmark(#[from] LandmarkError),
    #[error(transparent)]
    Recognize(#[from] RecognizeError),
    #[error(transparent)]
    Gbt(#[from] GbtError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Scores every method on the held-out traces at each ratio. Methods that do
/// not support the dataset produce rows without accuracy or timing.
pub fn evaluate(methods: &mut [Box<dyn Method>], ds: &Dataset, ratios: &[f64]) -> Result<EvalReport, HarnessError> {
    let heldout = &ds.split.heldout;
    let mut report = EvalReport::default();
    for m in methods.iter_mut() {
        let supported = m.supports(ds);
        if supported {
            m.prepare(ds, heldout, ratios.len())?;
        }
        for &ratio in ratios {
            let (accuracy, seconds) = if supported {
                let m: &dyn Method = m.as_ref();
                let results = heldout
                    .par_iter()
                    .map(|&i| {
                        let prefix = truncate(&ds.traces[i], ratio);
                        let (pred, t) = m.predict(ds, i, &prefix)?;
                        Ok((Some(pred) == ds.traces[i].label, t))
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                let correct = results.iter().filter(|r| r.0).count();
                let total: Duration = results.iter().map(|r| r.1).sum();
                let n = results.len().max(1) as f64;
                (Some(100.0 * correct as f64 / n), Some(total.as_secs_f64() / n))
            } else {
                (None, None)
            };
            report.rows.push(ReportRow {
                method: m.name().to_string(),
                domain: ds.meta.family,
                setting: ds.meta.setting,
                ratio,
                accuracy,
                seconds,
            });
        }
    }
    report.sort();
    Ok(report)
}

/// Learned model used for learning curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMethod {
    Gbt,
    Lstm,
}

impl FromStr for CurveMethod {
    type Err = crate::domains::UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gbt" => Ok(CurveMethod::Gbt),
            "lstm" => Ok(CurveMethod::Lstm),
            _ => Err(crate::domains::UnknownName(s.to_string())),
        }
    }
}

/// Mean held-out accuracy over [`RATIOS`] of a model trained on the first
/// `n` non-held-out traces, for each `n` in `sizes`.
pub fn learning_curve_eval(
    cfg: &GeneratorConfig,
    sizes: &[usize],
    method: CurveMethod,
    hyper: &HyperConfig,
) -> Result<Vec<(usize, f64)>, HarnessError> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::BadCurveSizes);
    }
    let largest = *sizes.last().expect("nonempty");
    let ds = build_dataset(cfg, (largest + HELDOUT).max(MIN_TRACES))?;
    curve_on_dataset(&ds, sizes, method, hyper)
}

/// Learning curve over an existing dataset's train and validation traces.
pub fn curve_on_dataset(
    ds: &Dataset,
    sizes: &[usize],
    method: CurveMethod,
    hyper: &HyperConfig,
) -> Result<Vec<(usize, f64)>, HarnessError> {
    let pool: Vec<usize> = ds.split.train.iter().chain(&ds.split.validation).copied().collect();
    if sizes.is_empty()
        || sizes[0] == 0
        || sizes.windows(2).any(|w| w[0] >= w[1])
        || sizes[sizes.len() - 1] > pool.len()
    {
        return Err(HarnessError::BadCurveSizes);
    }
    sizes
        .iter()
        .map(|&n| {
            let mut m: Box<dyn Method> = match method {
                CurveMethod::Gbt => {
                    let mut g = Gbt::new(hyper.gbt);
                    g.fit(ds, &pool[..n])?;
                    Box::new(g)
                }
                CurveMethod::Lstm => {
                    let mut l = Lstm::new(hyper.lstm, hyper.seed);
                    l.fit(ds, &pool[..n])?;
                    Box::new(l)
                }
            };
            let r = evaluate(std::slice::from_mut(&mut m), ds, &RATIOS)?;
            let mean = r.rows.iter().filter_map(|r| r.accuracy).sum::<f64>() / RATIOS.len() as f64;
            Ok((n, mean))
        })
        .collect()
}
