//! Satisficing plan generation: greedy best-first search guided by the
//! additive delete-relaxation heuristic, with seeded noisy tie-breaking so that
//! repeated runs yield diverse sub-optimal plans.

mod relaxed;

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::strips::{holds, ActionId, GoalHypothesis, GroundTask, State};

pub use relaxed::{build_rpg, h_add, h_max, RelaxedExplorer, RelaxedPlanningGraph, UNREACHABLE};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("goal is unreachable from the initial state")]
    Unsolvable,
    #[error("search expanded {0} nodes without reaching the goal")]
    NodeBudgetExceeded(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    pub actions: Vec<ActionId>,
}

impl Plan {
    /// Unit-cost plan length.
    pub fn cost(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Random seed for tie-breaking and noise.
    pub seed: u64,
    /// Scale of uniform noise added to heuristic values; 0 breaks ties only.
    pub noise: f64,
    pub node_budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            noise: 0.0,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

struct OpenEntry {
    key: f64,
    tie: u64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // min-heap on (key, tie, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Greedy best-first search from the task's initial state to `goal`.
pub fn gbfs_plan(task: &GroundTask, goal: &GoalHypothesis, cfg: &SearchConfig) -> Result<Plan, PlanError> {
    gbfs_from(task, task.init(), goal, cfg)
}

pub fn gbfs_from(
    task: &GroundTask,
    start: &State,
    goal: &GoalHypothesis,
    cfg: &SearchConfig,
) -> Result<Plan, PlanError> {
    if holds(start, goal) {
        return Ok(Plan { actions: vec![] });
    }
    let explorer = RelaxedExplorer::new(task);
    let h0 = explorer.h_add(start, &goal.facts).ok_or(PlanError::Unsolvable)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // node = (state, parent, action)
    let mut nodes: Vec<(State, usize, ActionId)> = vec![(start.clone(), usize::MAX, 0)];
    let mut seen: HashMap<State, usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut open = BinaryHeap::new();
    let key = |h: u32, rng: &mut ChaCha8Rng| f64::from(h) + cfg.noise * rng.gen::<f64>();
    open.push(OpenEntry {
        key: key(h0, &mut rng),
        tie: rng.gen(),
        node: 0,
    });

    let mut expansions = 0usize;
    while let Some(OpenEntry { node, .. }) = open.pop() {
        if expansions >= cfg.node_budget {
            return Err(PlanError::NodeBudgetExceeded(expansions));
        }
        expansions += 1;
        let state = nodes[node].0.clone();
        for a in task.applicable(&state) {
            let next = task.apply(&state, a).expect("applicable");
            let id = match seen.entry(next) {
                Entry::Occupied(_) => continue,
                Entry::Vacant(v) => {
                    let id = nodes.len();
                    nodes.push((v.key().clone(), node, a));
                    v.insert(id);
                    id
                }
            };
            let succ = &nodes[id].0;
            if holds(succ, goal) {
                return Ok(Plan {
                    actions: extract(&nodes, id),
                });
            }
            if let Some(h) = explorer.h_add(succ, &goal.facts) {
                open.push(OpenEntry {
                    key: key(h, &mut rng),
                    tie: rng.gen(),
                    node: id,
                });
            }
        }
    }
    Err(PlanError::Unsolvable)
}

fn extract(nodes: &[(State, usize, ActionId)], mut id: usize) -> Vec<ActionId> {
    let mut out = Vec::new();
    while nodes[id].1 != usize::MAX {
        out.push(nodes[id].2);
        id = nodes[id].1;
    }
    out.reverse();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InvalidPlan {
    #[error("step {0} is not applicable")]
    NotApplicable(usize),
    /// Index equals the plan length.
    #[error("plan ends at step {0} without satisfying the goal")]
    GoalNotReached(usize),
}

impl InvalidPlan {
    pub fn step(&self) -> usize {
        match *self {
            InvalidPlan::NotApplicable(i) | InvalidPlan::GoalNotReached(i) => i,
        }
    }
}

/// Replays `plan` from the initial state and checks that it ends in a goal state.
pub fn validate(task: &GroundTask, plan: &Plan, goal: &GoalHypothesis) -> Result<(), InvalidPlan> {
    let mut s = task.init().clone();
    for (i, &a) in plan.actions.iter().enumerate() {
        if (a as usize) >= task.num_actions() {
            return Err(InvalidPlan::NotApplicable(i));
        }
        s = task.apply(&s, a).map_err(|_| InvalidPlan::NotApplicable(i))?;
    }
    if holds(&s, goal) {
        Ok(())
    } else {
        Err(InvalidPlan::GoalNotReached(plan.actions.len()))
    }
}
