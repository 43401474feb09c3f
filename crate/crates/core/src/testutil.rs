//! Small fixtures shared by unit tests.

use crate::strips::{self, GroundTask};

pub(crate) const BLOCKS: &str = r#"(define (domain blocks) (:types block)
  (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block) (handempty) (holding ?x - block))
  (:action pick-up :parameters (?x - block) :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down :parameters (?x - block) :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack :parameters (?x - block ?y - block) :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack :parameters (?x - block ?y - block) :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))"#;

/// Three blocks on the table; hypotheses `on a b` (0) and `on b a` (1).
pub(crate) fn three_blocks() -> GroundTask {
    let d = strips::parse_domain(BLOCKS).unwrap();
    let p = strips::parse_problem(
        "(define (problem three) (:domain blocks) (:objects a b c - block)
          (:init (clear a) (clear b) (clear c) (ontable a) (ontable b) (ontable c) (handempty))
          (:hypotheses (0.5 (and (on a b))) (0.5 (and (on b a)))))",
        &d,
    )
    .unwrap();
    strips::ground(&d, &p).unwrap()
}

/// Chain task: a1 adds f1 from nothing, a2 turns f1 into f2.
pub(crate) fn chain() -> GroundTask {
    use crate::strips::{Fact, GoalHypothesis, GroundAction};
    let fact = |id, n: &str| Fact {
        id,
        predicate: n.into(),
        args: vec![],
    };
    let act = |id, n: &str, pre: Vec<u32>, add: Vec<u32>| GroundAction {
        id,
        name: n.into(),
        args: vec![],
        pre,
        add,
        del: vec![],
    };
    GroundTask::new(
        vec![fact(0, "f1"), fact(1, "f2")],
        vec![act(0, "a1", vec![], vec![0]), act(1, "a2", vec![0], vec![1])],
        vec![],
        vec![GoalHypothesis {
            facts: vec![1],
            prior: 1.0,
        }],
        None,
    )
    .unwrap()
}
