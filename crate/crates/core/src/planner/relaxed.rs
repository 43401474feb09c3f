use std::cmp::Reverse;
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;

use crate::strips::{ActionId, FactId, GroundTask, State};

/// Level or cost of a fact that is unreachable under delete relaxation.
pub const UNREACHABLE: u32 = u32::MAX;

/// First-reached levels of facts and actions under delete relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedPlanningGraph {
    /// Level at which each fact first appears, [`UNREACHABLE`] otherwise.
    pub fact_levels: Vec<u32>,
    /// Level at which each action first becomes applicable.
    pub action_levels: Vec<u32>,
    /// An action reaching each fact at its first level (lowest id among ties).
    pub best_supporter: Vec<Option<ActionId>>,
    /// Additive cost of each fact: 0 in the seed, otherwise one plus the summed
    /// costs of the preconditions of its cheapest achiever.
    pub add_costs: Vec<u32>,
}

impl RelaxedPlanningGraph {
    pub fn is_reachable(&self, f: FactId) -> bool {
        self.fact_levels[f as usize] != UNREACHABLE
    }

    /// Number of layers until the fixpoint (highest finite fact level).
    pub fn depth(&self) -> u32 {
        self.fact_levels
            .iter()
            .copied()
            .filter(|&l| l != UNREACHABLE)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Combine {
    Sum,
    Max,
}

/// Precomputed precondition index shared by every relaxed computation on a task.
#[derive(Debug, Clone)]
pub struct RelaxedExplorer<'t> {
    task: &'t GroundTask,
    /// Actions having each fact as a precondition.
    consumers: Vec<Vec<ActionId>>,
    /// Actions adding each fact.
    achievers: Vec<Vec<ActionId>>,
}

impl<'t> RelaxedExplorer<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        let mut consumers = vec![Vec::new(); task.num_facts()];
        let mut achievers = vec![Vec::new(); task.num_facts()];
        for a in task.actions() {
            for &f in &a.pre {
                consumers[f as usize].push(a.id);
            }
            for &f in &a.add {
                achievers[f as usize].push(a.id);
            }
        }
        RelaxedExplorer {
            task,
            consumers,
            achievers,
        }
    }

    pub fn task(&self) -> &'t GroundTask {
        self.task
    }

    pub fn achievers(&self, f: FactId) -> &[ActionId] {
        &self.achievers[f as usize]
    }

    /// Generalized Dijkstra over the relaxed task. Returns per-fact costs and
    /// per-action costs (cost of making the action applicable).
    fn costs(
        &self,
        seed: &State,
        combine: Combine,
        stop_at: Option<&[FactId]>,
    ) -> (Vec<u32>, Vec<u32>, Vec<Option<ActionId>>) {
        let nf = self.task.num_facts();
        let na = self.task.num_actions();
        let mut fact_cost = vec![UNREACHABLE; nf];
        let mut supporter = vec![None; nf];
        let mut action_cost = vec![UNREACHABLE; na];
        let mut remaining: Vec<usize> = self.task.actions().iter().map(|a| a.pre.len()).collect();
        let mut acc = vec![0u32; na];
        let mut done = FixedBitSet::with_capacity(nf);
        let mut heap = BinaryHeap::new();
        for f in seed.facts() {
            fact_cost[f as usize] = 0;
            heap.push(Reverse((0u32, f)));
        }
        let mut fire = |a: ActionId,
                        cost: u32,
                        fact_cost: &mut Vec<u32>,
                        supporter: &mut Vec<Option<ActionId>>,
                        heap: &mut BinaryHeap<Reverse<(u32, FactId)>>| {
            action_cost[a as usize] = cost;
            for &g in &self.task.action(a).add {
                let c = cost + 1;
                let slot = &mut fact_cost[g as usize];
                if c < *slot || (c == *slot && supporter[g as usize].is_some_and(|s| a < s)) {
                    *slot = c;
                    supporter[g as usize] = Some(a);
                    heap.push(Reverse((c, g)));
                }
            }
        };
        for a in self.task.actions() {
            if a.pre.is_empty() {
                fire(a.id, 0, &mut fact_cost, &mut supporter, &mut heap);
            }
        }
        let mut goals_left = stop_at.map(|g| g.len());
        while let Some(Reverse((c, f))) = heap.pop() {
            if done.contains(f as usize) || c > fact_cost[f as usize] {
                continue;
            }
            done.insert(f as usize);
            if let (Some(left), Some(goal)) = (goals_left.as_mut(), stop_at) {
                if goal.contains(&f) {
                    *left -= 1;
                    if *left == 0 {
                        break;
                    }
                }
            }
            for &a in &self.consumers[f as usize] {
                let ai = a as usize;
                acc[ai] = match combine {
                    Combine::Sum => acc[ai].saturating_add(c),
                    Combine::Max => acc[ai].max(c),
                };
                remaining[ai] -= 1;
                if remaining[ai] == 0 {
                    fire(a, acc[ai], &mut fact_cost, &mut supporter, &mut heap);
                }
            }
        }
        (fact_cost, action_cost, supporter)
    }

    /// Builds the relaxed planning graph from `seed` to its fixpoint.
    pub fn build(&self, seed: &State) -> RelaxedPlanningGraph {
        let (fact_levels, action_levels, best_supporter) = self.costs(seed, Combine::Max, None);
        let (add_costs, _, _) = self.costs(seed, Combine::Sum, None);
        RelaxedPlanningGraph {
            fact_levels,
            action_levels,
            best_supporter,
            add_costs,
        }
    }

    /// Additive heuristic of `goal` from `state`; `None` when some goal fact is
    /// relaxed-unreachable.
    pub fn h_add(&self, state: &State, goal: &[FactId]) -> Option<u32> {
        if state.contains_all(goal) {
            return Some(0);
        }
        let (costs, _, _) = self.costs(state, Combine::Sum, Some(goal));
        goal.iter().try_fold(0u32, |sum, &g| {
            let c = costs[g as usize];
            (c != UNREACHABLE).then(|| sum.saturating_add(c))
        })
    }

    /// Max heuristic (relaxed critical path length).
    pub fn h_max(&self, state: &State, goal: &[FactId]) -> Option<u32> {
        let (costs, _, _) = self.costs(state, Combine::Max, Some(goal));
        goal.iter().try_fold(0u32, |m, &g| {
            let c = costs[g as usize];
            (c != UNREACHABLE).then(|| m.max(c))
        })
    }

    /// Facts reachable from `seed` under delete relaxation while never applying
    /// an action for which `blocked` returns true.
    pub fn reachable(&self, seed: &State, blocked: impl Fn(ActionId) -> bool) -> FixedBitSet {
        let nf = self.task.num_facts();
        let mut reached = seed.bits().clone();
        reached.grow(nf);
        let mut remaining: Vec<usize> = self.task.actions().iter().map(|a| a.pre.len()).collect();
        let mut stack: Vec<FactId> = seed.facts().collect();
        let fire = |a: ActionId, reached: &mut FixedBitSet, stack: &mut Vec<FactId>| {
            for &g in &self.task.action(a).add {
                if !reached.put(g as usize) {
                    stack.push(g);
                }
            }
        };
        for a in self.task.actions() {
            if a.pre.is_empty() && !blocked(a.id) {
                fire(a.id, &mut reached, &mut stack);
            }
        }
        while let Some(f) = stack.pop() {
            for &a in &self.consumers[f as usize] {
                remaining[a as usize] -= 1;
                if remaining[a as usize] == 0 && !blocked(a) {
                    fire(a, &mut reached, &mut stack);
                }
            }
        }
        reached
    }
}

/// Builds the relaxed planning graph of `task` from `seed`.
pub fn build_rpg(task: &GroundTask, seed: &State) -> RelaxedPlanningGraph {
    RelaxedExplorer::new(task).build(seed)
}

/// Additive cost of `goal` in a built graph; `f64::INFINITY` if unreachable.
pub fn h_add(rpg: &RelaxedPlanningGraph, goal: &[FactId]) -> f64 {
    goal.iter()
        .map(|&g| match rpg.add_costs[g as usize] {
            UNREACHABLE => f64::INFINITY,
            c => f64::from(c),
        })
        .sum()
}

/// Max cost of `goal` in a built graph; `f64::INFINITY` if unreachable.
pub fn h_max(rpg: &RelaxedPlanningGraph, goal: &[FactId]) -> f64 {
    goal.iter()
        .map(|&g| match rpg.fact_levels[g as usize] {
            UNREACHABLE => f64::INFINITY,
            c => f64::from(c),
        })
        .fold(0.0, f64::max)
}
