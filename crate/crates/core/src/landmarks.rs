//! Fact landmarks by back-chaining over first achievers in the relaxed
//! planning graph.
//!
//! Starting from each goal fact, the shared preconditions of all achievers
//! that can fire before the landmark is first reached become candidates. A
//! candidate is kept only if it is in the initial state (a trivial landmark)
//! or if blocking every action that adds it makes the goal fact relaxed
//! unreachable, which makes every kept landmark sound.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::planner::RelaxedExplorer;
use crate::strips::{FactId, GroundTask, ObservationTrace, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LandmarkError {
    #[error("hypothesis {0} is not relaxed-reachable from the initial state")]
    UnreachableGoal(usize),
    #[error("hypothesis index {0} out of range")]
    NoSuchHypothesis(usize),
    #[error("observation {step} cannot be applied")]
    BrokenPrefix { step: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkGraph {
    pub goal_index: usize,
    /// All landmarks, trivial ones included.
    pub landmarks: BTreeSet<FactId>,
    /// Landmarks already true in the initial state.
    pub trivial: BTreeSet<FactId>,
    /// Greedy-necessary orderings `(before, after)`.
    pub orderings: BTreeSet<(FactId, FactId)>,
    /// Landmarks found while back-chaining from each goal fact (the goal fact included).
    pub per_subgoal: BTreeMap<FactId, BTreeSet<FactId>>,
}

impl LandmarkGraph {
    pub fn is_trivial(&self, f: FactId) -> bool {
        self.trivial.contains(&f)
    }

    pub fn non_trivial(&self) -> impl Iterator<Item = FactId> + '_ {
        self.landmarks.iter().copied().filter(|f| !self.trivial.contains(f))
    }

    /// Non-trivial landmarks supporting goal fact `g`.
    pub fn subgoal_landmarks(&self, g: FactId) -> impl Iterator<Item = FactId> + '_ {
        self.per_subgoal
            .get(&g)
            .into_iter()
            .flatten()
            .copied()
            .filter(|f| !self.trivial.contains(f))
    }

    /// Line-oriented dump: one landmark, ordering, or subgoal set per line.
    pub fn dump(&self, task: &GroundTask) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "goal {}", self.goal_index);
        for &f in &self.landmarks {
            let tag = if self.is_trivial(f) { " trivial" } else { "" };
            let _ = writeln!(out, "landmark {f} {}{tag}", task.fact(f));
        }
        for &(a, b) in &self.orderings {
            let _ = writeln!(out, "order {a} {b}");
        }
        for (g, set) in &self.per_subgoal {
            let ids: Vec<String> = set.iter().map(|f| f.to_string()).collect();
            let _ = writeln!(out, "subgoal {g} {}", ids.join(" "));
        }
        out
    }
}

/// Extracts landmarks for the hypotheses of one task, caching relaxed
/// reachability results shared between hypotheses.
pub struct LandmarkExtractor<'t> {
    explorer: RelaxedExplorer<'t>,
    /// Facts reachable from init when no action adds the keyed fact.
    without: HashMap<FactId, FixedBitSet>,
    reachable: FixedBitSet,
}

impl<'t> LandmarkExtractor<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        let explorer = RelaxedExplorer::new(task);
        let reachable = explorer.reachable(task.init(), |_| false);
        LandmarkExtractor {
            explorer,
            without: HashMap::new(),
            reachable,
        }
    }

    fn reach_without(&mut self, f: FactId) -> &FixedBitSet {
        let explorer = &self.explorer;
        self.without.entry(f).or_insert_with(|| {
            let task = explorer.task();
            explorer.reachable(task.init(), |a| task.action(a).add.contains(&f))
        })
    }

    pub fn extract(&mut self, h: usize) -> Result<LandmarkGraph, LandmarkError> {
        let task = self.explorer.task();
        let hyp = task.hypotheses().get(h).ok_or(LandmarkError::NoSuchHypothesis(h))?;
        if hyp.facts.iter().any(|&g| !self.reachable.contains(g as usize)) {
            return Err(LandmarkError::UnreachableGoal(h));
        }
        let init = task.init();
        let mut graph = LandmarkGraph {
            goal_index: h,
            landmarks: BTreeSet::new(),
            trivial: BTreeSet::new(),
            orderings: BTreeSet::new(),
            per_subgoal: BTreeMap::new(),
        };
        for &g in &hyp.facts {
            let found = self.chain_from(g, init, &mut graph.orderings);
            for &f in &found {
                if init.contains(f) {
                    graph.trivial.insert(f);
                }
            }
            graph.landmarks.extend(found.iter().copied());
            graph.per_subgoal.insert(g, found);
        }
        Ok(graph)
    }

    fn chain_from(
        &mut self,
        goal: FactId,
        init: &State,
        orderings: &mut BTreeSet<(FactId, FactId)>,
    ) -> BTreeSet<FactId> {
        let task = self.explorer.task();
        let mut found = BTreeSet::from([goal]);
        let mut queue = VecDeque::from([goal]);
        while let Some(lm) = queue.pop_front() {
            if init.contains(lm) {
                continue;
            }
            let before = self.reach_without(lm).clone();
            let first: Vec<_> = self
                .explorer
                .achievers(lm)
                .iter()
                .map(|&a| task.action(a))
                .filter(|a| a.pre.iter().all(|&p| before.contains(p as usize)))
                .collect();
            let Some((head, rest)) = first.split_first() else {
                continue;
            };
            let shared: Vec<FactId> = head
                .pre
                .iter()
                .copied()
                .filter(|p| rest.iter().all(|a| a.pre.contains(p)))
                .collect();
            for c in shared {
                if c == lm {
                    continue;
                }
                let sound = init.contains(c) || !self.reach_without(c).contains(goal as usize);
                if !sound {
                    continue;
                }
                if !creates_cycle(orderings, c, lm) {
                    orderings.insert((c, lm));
                }
                if found.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        found
    }

    pub fn extract_all(&mut self) -> Result<Vec<LandmarkGraph>, LandmarkError> {
        (0..self.explorer.task().hypotheses().len())
            .map(|h| self.extract(h))
            .collect()
    }
}

/// Would adding `from -> to` close a cycle, i.e. does `to` already reach `from`?
fn creates_cycle(edges: &BTreeSet<(FactId, FactId)>, from: FactId, to: FactId) -> bool {
    let mut stack = vec![to];
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if n == from {
            return true;
        }
        if seen.insert(n) {
            stack.extend(edges.range((n, 0)..=(n, FactId::MAX)).map(|&(_, b)| b));
        }
    }
    false
}

pub fn extract_landmarks(task: &GroundTask, h: usize) -> Result<LandmarkGraph, LandmarkError> {
    LandmarkExtractor::new(task).extract(h)
}

/// Union of all facts true at some point while replaying `trace` from the
/// initial state, plus the final state.
pub fn visited_facts(task: &GroundTask, actions: &[u32]) -> Result<(State, State), LandmarkError> {
    let mut state = task.init().clone();
    let mut seen = state.clone();
    for (step, &a) in actions.iter().enumerate() {
        state = task
            .apply(&state, a)
            .map_err(|_| LandmarkError::BrokenPrefix { step })?;
        seen.union_with(&state);
    }
    Ok((seen, state))
}

/// Non-trivial landmarks of `lg` made true by the observed prefix.
pub fn achieved_landmarks(
    task: &GroundTask,
    lg: &LandmarkGraph,
    trace: &ObservationTrace,
) -> Result<BTreeSet<FactId>, LandmarkError> {
    let (seen, _) = visited_facts(task, &trace.actions)?;
    Ok(lg.non_trivial().filter(|&f| seen.contains(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{gbfs_plan, SearchConfig};
    use crate::strips::GoalHypothesis;
    use crate::testutil::three_blocks;

    #[test]
    fn holding_a_is_landmark_of_on_a_b() {
        let t = three_blocks();
        let lg = extract_landmarks(&t, 0).unwrap();
        let on_ab = t.fact_id("(on a b)").unwrap();
        let holding = t.fact_id("(holding a)").unwrap();
        assert!(lg.landmarks.contains(&on_ab));
        assert!(lg.landmarks.contains(&holding));
        assert!(!lg.is_trivial(holding));
        assert!(lg.orderings.contains(&(holding, on_ab)));
        let nontrivial: Vec<_> = lg.non_trivial().collect();
        assert_eq!(nontrivial, {
            let mut v = vec![on_ab, holding];
            v.sort();
            v
        });
        // clear b and handempty are trivial
        assert!(lg.is_trivial(t.fact_id("(clear b)").unwrap()));
        assert!(lg.is_trivial(t.fact_id("(handempty)").unwrap()));
    }

    #[test]
    fn goal_in_init_gives_only_trivial_goal_landmarks() {
        let t = three_blocks();
        let t = crate::strips::GroundTask::new(
            t.facts().to_vec(),
            t.actions().to_vec(),
            t.init().facts().collect(),
            vec![GoalHypothesis {
                facts: vec![t.fact_id("(clear a)").unwrap(), t.fact_id("(handempty)").unwrap()],
                prior: 1.0,
            }],
            None,
        )
        .unwrap();
        let lg = extract_landmarks(&t, 0).unwrap();
        assert_eq!(lg.landmarks.len(), 2);
        assert_eq!(lg.trivial, lg.landmarks);
        assert_eq!(lg.non_trivial().count(), 0);
    }

    #[test]
    fn unreachable_hypothesis_is_error() {
        let t = crate::testutil::chain();
        let t = crate::strips::GroundTask::new(
            t.facts().to_vec(),
            vec![],
            vec![],
            vec![GoalHypothesis {
                facts: vec![1],
                prior: 1.0,
            }],
            None,
        )
        .unwrap();
        assert_eq!(extract_landmarks(&t, 0), Err(LandmarkError::UnreachableGoal(0)));
    }

    #[test]
    fn pick_up_achieves_holding() {
        let t = three_blocks();
        let lg = extract_landmarks(&t, 0).unwrap();
        let o = ObservationTrace::new(vec![t.action_id("(pick-up a)").unwrap()], None).unwrap();
        let got = achieved_landmarks(&t, &lg, &o).unwrap();
        assert_eq!(got, BTreeSet::from([t.fact_id("(holding a)").unwrap()]));
        // touching nothing relevant
        let o = ObservationTrace::new(vec![t.action_id("(pick-up c)").unwrap()], None).unwrap();
        assert!(achieved_landmarks(&t, &lg, &o).unwrap().is_empty());
    }

    #[test]
    fn full_plan_achieves_all_and_prefixes_are_monotone() {
        let t = three_blocks();
        for h in 0..2 {
            let lg = extract_landmarks(&t, h).unwrap();
            let plan = gbfs_plan(&t, t.hypothesis(h), &SearchConfig::default()).unwrap();
            let mut prev = BTreeSet::new();
            for k in 1..=plan.actions.len() {
                let o = ObservationTrace::new(plan.actions[..k].to_vec(), None).unwrap();
                let got = achieved_landmarks(&t, &lg, &o).unwrap();
                assert!(got.is_superset(&prev));
                prev = got;
            }
            assert_eq!(prev, lg.non_trivial().collect());
        }
    }

    #[test]
    fn broken_prefix_is_reported() {
        let t = three_blocks();
        let lg = extract_landmarks(&t, 0).unwrap();
        let o = ObservationTrace::new(vec![t.action_id("(stack a b)").unwrap()], None).unwrap();
        assert_eq!(
            achieved_landmarks(&t, &lg, &o),
            Err(LandmarkError::BrokenPrefix { step: 0 })
        );
    }

    #[test]
    fn extraction_is_deterministic_and_acyclic() {
        let t = three_blocks();
        let a = LandmarkExtractor::new(&t).extract_all().unwrap();
        let b = LandmarkExtractor::new(&t).extract_all().unwrap();
        assert_eq!(a, b);
        for lg in &a {
            for &(x, y) in &lg.orderings {
                let mut rest = lg.orderings.clone();
                rest.remove(&(x, y));
                assert!(!creates_cycle(&rest, x, y));
            }
        }
        let dump = a[0].dump(&t);
        assert!(dump
            .lines()
            .any(|l| l.starts_with("landmark") && l.contains("(holding a)")));
        assert!(dump.lines().any(|l| l.starts_with("order")));
    }
}
