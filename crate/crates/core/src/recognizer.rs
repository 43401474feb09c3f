//! Landmark-based goal recognition with an optional prior-weighted decision.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::landmarks::{visited_facts, LandmarkError, LandmarkGraph};
use crate::strips::{GroundTask, ObservationTrace};

/// Threshold used for the landmark recognizer in every reported experiment.
pub const DEFAULT_THETA: f64 = 0.1;

// absorbs rounding in `max - theta` comparisons
const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognizeError {
    #[error("no hypothesis scores given")]
    EmptyScores,
    #[error("scores, priors, and graphs disagree on the number of hypotheses")]
    LengthMismatch,
    #[error("landmark recognition unsupported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Landmark(#[from] LandmarkError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    pub scores: Vec<f64>,
    /// Present only when priors were factored in.
    pub posterior: Option<Vec<f64>>,
    pub predicted: usize,
    pub candidate_set: Vec<usize>,
    pub elapsed: Duration,
}

/// What a model-based recognizer gets to see about the observed agent's domain.
#[derive(Debug, Clone, Copy)]
pub enum DomainModel<'a> {
    Strips(&'a GroundTask),
    /// Domains with numeric state (no propositional model available).
    Numeric,
}

/// Completion score of every hypothesis: the mean over its goal facts of the
/// fraction of that subgoal's non-trivial landmarks the prefix achieved.
/// Goal facts without non-trivial landmarks count 1 if they hold after the
/// prefix and 0 otherwise.
pub fn goal_completion(
    task: &GroundTask,
    graphs: &[LandmarkGraph],
    trace: &ObservationTrace,
) -> Result<Vec<f64>, RecognizeError> {
    if graphs.len() != task.hypotheses().len() {
        return Err(RecognizeError::LengthMismatch);
    }
    let (seen, last) = visited_facts(task, &trace.actions)?;
    Ok(graphs
        .iter()
        .map(|lg| {
            let goal = &task.hypothesis(lg.goal_index).facts;
            let total: f64 = goal
                .iter()
                .map(|&g| {
                    let (mut n, mut hit) = (0usize, 0usize);
                    for f in lg.subgoal_landmarks(g) {
                        n += 1;
                        hit += usize::from(seen.contains(f));
                    }
                    if n == 0 {
                        f64::from(u8::from(last.contains(g)))
                    } else {
                        hit as f64 / n as f64
                    }
                })
                .sum();
            total / goal.len() as f64
        })
        .collect())
}

/// Applies the threshold rule and, when `priors` is given, the prior-weighted
/// choice among the candidates.
pub fn recognize(scores: &[f64], theta: f64, priors: Option<&[f64]>) -> Result<RecognitionResult, RecognizeError> {
    if scores.is_empty() {
        return Err(RecognizeError::EmptyScores);
    }
    if priors.is_some_and(|p| p.len() != scores.len()) {
        return Err(RecognizeError::LengthMismatch);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let candidate_set: Vec<usize> = (0..scores.len())
        .filter(|&h| scores[h] >= max - theta - SCORE_EPS)
        .collect();
    let argmax = |v: &dyn Fn(usize) -> f64| {
        candidate_set
            .iter()
            .copied()
            .fold(None::<usize>, |best, h| match best {
                Some(b) if v(b) >= v(h) => Some(b),
                _ => Some(h),
            })
            .expect("candidate set is nonempty")
    };
    let (predicted, posterior) = match priors {
        None => (argmax(&|h| scores[h]), None),
        Some(priors) => {
            let all_zero = candidate_set.iter().all(|&h| scores[h] == 0.0);
            let weight = |h: usize| if all_zero { priors[h] } else { scores[h] * priors[h] };
            let mut posterior = vec![0.0; scores.len()];
            let z: f64 = candidate_set.iter().map(|&h| weight(h)).sum();
            for &h in &candidate_set {
                posterior[h] = if z > 0.0 {
                    weight(h) / z
                } else {
                    1.0 / candidate_set.len() as f64
                };
            }
            let p = posterior.clone();
            (argmax(&|h| p[h]), Some(posterior))
        }
    };
    Ok(RecognitionResult {
        scores: scores.to_vec(),
        posterior,
        predicted,
        candidate_set,
        elapsed: Duration::ZERO,
    })
}

/// Scores and decides one observation prefix. `elapsed` covers scoring and the
/// decision only; graphs are expected to be extracted beforehand.
pub fn recognize_trace(
    model: DomainModel<'_>,
    graphs: &[LandmarkGraph],
    trace: &ObservationTrace,
    theta: f64,
    priors: Option<&[f64]>,
) -> Result<RecognitionResult, RecognizeError> {
    let DomainModel::Strips(task) = model else {
        return Err(RecognizeError::Unsupported("cannot handle numeric variables"));
    };
    let start = Instant::now();
    let scores = goal_completion(task, graphs, trace)?;
    let mut result = recognize(&scores, theta, priors)?;
    result.elapsed = start.elapsed();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::landmarks::LandmarkExtractor;
    use crate::planner::{gbfs_plan, SearchConfig};
    use crate::strips::GoalHypothesis;
    use crate::testutil::three_blocks;

    #[test]
    fn threshold_without_priors() {
        let r = recognize(&[1.0, 0.2], 0.1, None).unwrap();
        assert_eq!(r.predicted, 0);
        assert_eq!(r.candidate_set, vec![0]);
        assert!(r.posterior.is_none());
    }

    #[test]
    fn prior_decides_symmetric_scores() {
        let r = recognize(&[0.5, 0.5], 0.1, Some(&[0.8, 0.2])).unwrap();
        let p = r.posterior.unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12 && (p[1] - 0.2).abs() < 1e-12);
        assert_eq!(r.predicted, 0);
    }

    #[test]
    fn prior_overturns_raw_argmax() {
        let r = recognize(&[0.55, 0.50], 0.1, Some(&[0.2, 0.8])).unwrap();
        assert_eq!(r.candidate_set, vec![0, 1]);
        let p = r.posterior.unwrap();
        // proportional to (0.11, 0.40)
        assert!((p[0] - 0.11 / 0.51).abs() < 1e-12);
        assert!((p[1] - 0.40 / 0.51).abs() < 1e-12);
        assert_eq!(r.predicted, 1);
        assert_eq!(recognize(&[0.55, 0.50], 0.1, None).unwrap().predicted, 0);
    }

    #[test]
    fn all_zero_candidates_fall_back_to_priors() {
        let r = recognize(&[0.0, 0.0], 0.1, Some(&[0.2, 0.8])).unwrap();
        assert_eq!(r.predicted, 1);
        let r = recognize(&[0.0, 0.0], 0.1, None).unwrap();
        assert_eq!(r.predicted, 0);
        assert_eq!(recognize(&[], 0.1, None), Err(RecognizeError::EmptyScores));
    }

    #[test]
    fn completion_on_three_blocks() {
        let t = three_blocks();
        let graphs = LandmarkExtractor::new(&t).extract_all().unwrap();
        let pick_a = t.action_id("(pick-up a)").unwrap();
        let o = ObservationTrace::new(vec![pick_a], None).unwrap();
        let s = goal_completion(&t, &graphs, &o).unwrap();
        assert!(s[0] > s[1], "{s:?}");
        assert_eq!(s[0], 0.5);
        assert_eq!(s[1], 0.0);
        // full plan completes its goal
        let plan = gbfs_plan(&t, t.hypothesis(1), &SearchConfig::default()).unwrap();
        let o = ObservationTrace::new(plan.actions, None).unwrap();
        assert_eq!(goal_completion(&t, &graphs, &o).unwrap()[1], 1.0);
    }

    #[test]
    fn single_hypothesis_and_numeric_domain() {
        let t = three_blocks();
        let t1 = GroundTask::new(
            t.facts().to_vec(),
            t.actions().to_vec(),
            t.init().facts().collect(),
            vec![GoalHypothesis {
                facts: t.hypothesis(0).facts.clone(),
                prior: 1.0,
            }],
            None,
        )
        .unwrap();
        let graphs = LandmarkExtractor::new(&t1).extract_all().unwrap();
        let o = ObservationTrace::new(vec![t.action_id("(pick-up c)").unwrap()], None).unwrap();
        let r = recognize_trace(DomainModel::Strips(&t1), &graphs, &o, DEFAULT_THETA, None).unwrap();
        assert_eq!(r.predicted, 0);
        let err = recognize_trace(DomainModel::Numeric, &[], &o, DEFAULT_THETA, None).unwrap_err();
        assert!(matches!(err, RecognizeError::Unsupported(_)));
    }

    fn normalize(v: &[f64]) -> Vec<f64> {
        let z: f64 = v.iter().sum();
        v.iter().map(|x| x / z).collect()
    }

    proptest! {
        #[test]
        fn uniform_priors_match_plain(scores in proptest::collection::vec(0.0f64..=1.0, 1..8), theta in 0.0f64..0.5) {
            let n = scores.len();
            let uniform = vec![1.0 / n as f64; n];
            let plain = recognize(&scores, theta, None).unwrap();
            let with = recognize(&scores, theta, Some(&uniform)).unwrap();
            prop_assert_eq!(plain.predicted, with.predicted);
            prop_assert!(plain.candidate_set.contains(&plain.predicted));
            let total: f64 = with.posterior.unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn prior_scaling_keeps_prediction(scores in proptest::collection::vec(0.0f64..=1.0, 2..6),
                                          raw in proptest::collection::vec(0.01f64..1.0, 6),
                                          c in 0.1f64..10.0) {
            let n = scores.len();
            let p1 = normalize(&raw[..n]);
            let scaled: Vec<f64> = raw[..n].iter().map(|x| x * c).collect();
            let p2 = normalize(&scaled);
            let a = recognize(&scores, 0.1, Some(&p1)).unwrap();
            let b = recognize(&scores, 0.1, Some(&p2)).unwrap();
            prop_assert_eq!(a.predicted, b.predicted);
        }

        #[test]
        fn zero_theta_gives_argmax_set(scores in proptest::collection::vec(0u8..4, 1..8)) {
            let scores: Vec<f64> = scores.into_iter().map(|s| f64::from(s) / 3.0).collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let r = recognize(&scores, 0.0, None).unwrap();
            let expect: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == max).collect();
            prop_assert_eq!(r.candidate_set, expect);
        }
    }
}
