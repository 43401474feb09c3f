//! Propositional STRIPS tasks: the model language, grounding, and state
//! transition semantics.

mod ground;
mod parser;
mod syntax;

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use ground::{ground, ground_with, Pruning};
pub use parser::{parse_domain, parse_problem};
pub use syntax::{
    ActionSchema, Atom, DomainSchema, GroundAtom, Hypothesis, PredicateSchema, Problem, Term, TypeDecl, TypedName,
    OBJECT_TYPE,
};

pub type FactId = u32;
pub type ActionId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StripsError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("unknown type '{name}' at {line}:{col}")]
    UnknownType { name: String, line: usize, col: usize },
    #[error("unknown predicate '{name}' at {line}:{col}")]
    UnknownPredicate { name: String, line: usize, col: usize },
    #[error("predicate '{predicate}' takes {expected} arguments, found {found} at {line}:{col}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("undeclared constant '{name}' at {line}:{col}")]
    UndeclaredConstant { name: String, line: usize, col: usize },
    #[error("object '{object}' is not of type '{expected}' at {line}:{col}")]
    TypeMismatch {
        object: String,
        expected: String,
        line: usize,
        col: usize,
    },
    #[error("problem declares domain '{found}' but schema is '{expected}'")]
    DomainMismatch { expected: String, found: String },
    #[error("problem has no goal hypotheses")]
    EmptyHypothesisSet,
    #[error("goal hypothesis {0} is empty")]
    EmptyHypothesis(usize),
    #[error("hypothesis priors must be non-negative with a positive sum")]
    InvalidPriors,
    #[error("true goal index {index} out of range for {count} hypotheses")]
    TrueGoalOutOfRange { index: usize, count: usize },
    #[error("{kind} id {id} out of range ({len})")]
    IdOutOfRange { kind: &'static str, id: u32, len: usize },
    #[error("action {action} is not applicable: missing facts {missing:?}")]
    NotApplicable { action: ActionId, missing: Vec<FactId> },
    #[error("observation trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fact {
    pub id: FactId,
    pub predicate: String,
    pub args: Vec<String>,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    pub name: String,
    pub args: Vec<String>,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A set of facts over a task's fact universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(FixedBitSet);

impl State {
    pub fn empty(n_facts: usize) -> Self {
        State(FixedBitSet::with_capacity(n_facts))
    }

    pub fn from_facts(n_facts: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = Self::empty(n_facts);
        for f in facts {
            s.0.insert(f as usize);
        }
        s
    }

    pub fn contains(&self, f: FactId) -> bool {
        self.0.contains(f as usize)
    }

    pub fn insert(&mut self, f: FactId) {
        self.0.insert(f as usize);
    }

    pub fn remove(&mut self, f: FactId) {
        self.0.set(f as usize, false);
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.0.ones().map(|f| f as FactId)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    pub(crate) fn union_with(&mut self, other: &State) {
        self.0.union_with(&other.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalHypothesis {
    pub facts: Vec<FactId>,
    pub prior: f64,
}

/// An immutable grounded recognition environment: fact and action universes,
/// the initial state, and the goal hypotheses with normalized priors.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTask {
    facts: Vec<Fact>,
    actions: Vec<GroundAction>,
    init: State,
    hypotheses: Vec<GoalHypothesis>,
    true_goal: Option<usize>,
    action_index: HashMap<String, ActionId>,
    fact_index: HashMap<String, FactId>,
}

impl GroundTask {
    /// Builds a task from already numbered parts. Fact and action ids must
    /// equal their positions; priors are renormalized to sum to one.
    pub fn new(
        facts: Vec<Fact>,
        actions: Vec<GroundAction>,
        init: Vec<FactId>,
        mut hypotheses: Vec<GoalHypothesis>,
        true_goal: Option<usize>,
    ) -> Result<Self, StripsError> {
        let nf = facts.len();
        let check = |kind, id: u32, len: usize| {
            if (id as usize) < len {
                Ok(())
            } else {
                Err(StripsError::IdOutOfRange { kind, id, len })
            }
        };
        for (i, f) in facts.iter().enumerate() {
            if f.id as usize != i {
                return Err(StripsError::IdOutOfRange {
                    kind: "fact",
                    id: f.id,
                    len: nf,
                });
            }
        }
        let mut actions = actions;
        for (i, a) in actions.iter_mut().enumerate() {
            if a.id as usize != i {
                return Err(StripsError::IdOutOfRange {
                    kind: "action",
                    id: a.id,
                    len: i,
                });
            }
            for &f in a.pre.iter().chain(&a.add).chain(&a.del) {
                check("fact", f, nf)?;
            }
            a.pre.sort_unstable();
            a.pre.dedup();
            a.add.sort_unstable();
            a.add.dedup();
            let add = a.add.clone();
            a.del.retain(|f| !add.contains(f));
            a.del.sort_unstable();
            a.del.dedup();
        }
        for &f in &init {
            check("fact", f, nf)?;
        }
        if hypotheses.is_empty() {
            return Err(StripsError::EmptyHypothesisSet);
        }
        for (i, h) in hypotheses.iter_mut().enumerate() {
            if h.facts.is_empty() {
                return Err(StripsError::EmptyHypothesis(i));
            }
            for &f in &h.facts {
                check("fact", f, nf)?;
            }
            h.facts.sort_unstable();
            h.facts.dedup();
        }
        let total: f64 = hypotheses.iter().map(|h| h.prior).sum();
        if hypotheses.iter().any(|h| !(h.prior >= 0.0) || !h.prior.is_finite()) || !(total > 0.0) {
            return Err(StripsError::InvalidPriors);
        }
        for h in &mut hypotheses {
            h.prior /= total;
        }
        if let Some(t) = true_goal {
            if t >= hypotheses.len() {
                return Err(StripsError::TrueGoalOutOfRange {
                    index: t,
                    count: hypotheses.len(),
                });
            }
        }
        let action_index = actions.iter().map(|a| (a.to_string(), a.id)).collect();
        let fact_index = facts.iter().map(|f| (f.to_string(), f.id)).collect();
        Ok(GroundTask {
            init: State::from_facts(nf, init),
            facts,
            actions,
            hypotheses,
            true_goal,
            action_index,
            fact_index,
        })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id as usize]
    }

    pub fn fact(&self, id: FactId) -> &Fact {
        &self.facts[id as usize]
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn hypotheses(&self) -> &[GoalHypothesis] {
        &self.hypotheses
    }

    pub fn hypothesis(&self, h: usize) -> &GoalHypothesis {
        &self.hypotheses[h]
    }

    pub fn priors(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.prior).collect()
    }

    pub fn true_goal(&self) -> Option<usize> {
        self.true_goal
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// Looks up an action by its printed form, e.g. `(stack a b)`.
    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    /// Looks up a fact by its printed form, e.g. `(on a b)`.
    pub fn fact_id(&self, name: &str) -> Option<FactId> {
        self.fact_index.get(name).copied()
    }

    /// Same task with a different designated true goal.
    pub fn with_true_goal(&self, true_goal: Option<usize>) -> Result<Self, StripsError> {
        if let Some(t) = true_goal {
            if t >= self.hypotheses.len() {
                return Err(StripsError::TrueGoalOutOfRange {
                    index: t,
                    count: self.hypotheses.len(),
                });
            }
        }
        let mut out = self.clone();
        out.true_goal = true_goal;
        Ok(out)
    }

    pub fn is_applicable(&self, s: &State, a: ActionId) -> bool {
        s.contains_all(&self.actions[a as usize].pre)
    }

    pub fn applicable(&self, s: &State) -> impl Iterator<Item = ActionId> + '_ {
        let s = s.clone();
        self.actions
            .iter()
            .filter(move |a| s.contains_all(&a.pre))
            .map(|a| a.id)
    }

    /// Successor state `(s \ del(a)) ∪ add(a)`.
    pub fn apply(&self, s: &State, a: ActionId) -> Result<State, StripsError> {
        let action = self.actions.get(a as usize).ok_or(StripsError::IdOutOfRange {
            kind: "action",
            id: a,
            len: self.actions.len(),
        })?;
        let missing: Vec<FactId> = action.pre.iter().copied().filter(|&f| !s.contains(f)).collect();
        if !missing.is_empty() {
            return Err(StripsError::NotApplicable { action: a, missing });
        }
        let mut next = s.clone();
        for &f in &action.del {
            next.remove(f);
        }
        for &f in &action.add {
            next.insert(f);
        }
        Ok(next)
    }

    /// Replays `actions` from the initial state, returning every visited state
    /// (initial state included).
    pub fn replay(&self, actions: &[ActionId]) -> Result<Vec<State>, (usize, StripsError)> {
        let mut states = Vec::with_capacity(actions.len() + 1);
        states.push(self.init.clone());
        for (i, &a) in actions.iter().enumerate() {
            let next = self.apply(states.last().expect("nonempty"), a).map_err(|e| (i, e))?;
            states.push(next);
        }
        Ok(states)
    }
}

/// True iff every goal fact of `g` is in `s`.
pub fn holds(s: &State, g: &GoalHypothesis) -> bool {
    s.contains_all(&g.facts)
}

/// An ordered sequence of observed ground actions, optionally labelled with
/// the hypothesis that generated it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationTrace {
    pub actions: Vec<ActionId>,
    pub label: Option<usize>,
}

impl ObservationTrace {
    pub fn new(actions: Vec<ActionId>, label: Option<usize>) -> Result<Self, StripsError> {
        if actions.is_empty() {
            return Err(StripsError::EmptyTrace);
        }
        Ok(ObservationTrace { actions, label })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Checks every action id against a vocabulary of `vocab_size` actions.
    pub fn validate(&self, vocab_size: usize) -> Result<(), StripsError> {
        if self.actions.is_empty() {
            return Err(StripsError::EmptyTrace);
        }
        for &a in &self.actions {
            if a as usize >= vocab_size {
                return Err(StripsError::IdOutOfRange {
                    kind: "action",
                    id: a,
                    len: vocab_size,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn fact(id: u32, name: &str) -> Fact {
        Fact {
            id,
            predicate: name.to_string(),
            args: vec![],
        }
    }

    pub(crate) fn action(id: u32, name: &str, pre: &[u32], add: &[u32], del: &[u32]) -> GroundAction {
        GroundAction {
            id,
            name: name.to_string(),
            args: vec![],
            pre: pre.to_vec(),
            add: add.to_vec(),
            del: del.to_vec(),
        }
    }

    #[test]
    fn overlapping_hypotheses_keep_shared_fact() {
        let facts = vec![fact(0, "p1"), fact(1, "p2"), fact(2, "p3")];
        let hyps = vec![
            GoalHypothesis {
                facts: vec![0, 2],
                prior: 1.0,
            },
            GoalHypothesis {
                facts: vec![0, 1],
                prior: 1.0,
            },
        ];
        let t = GroundTask::new(facts, vec![], vec![], hyps, None).unwrap();
        assert!(t.hypothesis(0).facts.contains(&0));
        assert!(t.hypothesis(1).facts.contains(&0));
        assert!((t.priors().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(t.priors(), vec![0.5, 0.5]);
    }

    #[test]
    fn empty_hypotheses_rejected() {
        let r = GroundTask::new(vec![fact(0, "p")], vec![], vec![], vec![], None);
        assert_eq!(r.unwrap_err(), StripsError::EmptyHypothesisSet);
    }

    #[test]
    fn add_wins_over_delete() {
        let t = GroundTask::new(
            vec![fact(0, "p")],
            vec![action(0, "a", &[], &[0], &[0])],
            vec![],
            vec![GoalHypothesis {
                facts: vec![0],
                prior: 1.0,
            }],
            None,
        )
        .unwrap();
        assert!(t.action(0).del.is_empty());
        let s = t.apply(t.init(), 0).unwrap();
        assert!(s.contains(0));
    }

    #[test]
    fn identity_action_and_missing_precondition() {
        let t = GroundTask::new(
            vec![fact(0, "p"), fact(1, "q")],
            vec![action(0, "noop", &[], &[], &[]), action(1, "needs-q", &[1], &[0], &[])],
            vec![0],
            vec![GoalHypothesis {
                facts: vec![0],
                prior: 1.0,
            }],
            None,
        )
        .unwrap();
        let s = t.apply(t.init(), 0).unwrap();
        assert_eq!(&s, t.init());
        match t.apply(t.init(), 1) {
            Err(StripsError::NotApplicable { action: 1, missing }) => assert_eq!(missing, vec![1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn holds_is_subset() {
        let s = State::from_facts(3, [0, 1]);
        assert!(holds(
            &s,
            &GoalHypothesis {
                facts: vec![0],
                prior: 1.0
            }
        ));
        assert!(!holds(
            &State::from_facts(3, [0]),
            &GoalHypothesis {
                facts: vec![0, 1],
                prior: 1.0
            }
        ));
    }

    #[test]
    fn empty_trace_rejected() {
        assert_eq!(
            ObservationTrace::new(vec![], None).unwrap_err(),
            StripsError::EmptyTrace
        );
        let t = ObservationTrace::new(vec![0, 4], Some(0)).unwrap();
        assert!(t.validate(4).is_err());
        assert!(t.validate(5).is_ok());
    }
}
