//! Parse a small typed STRIPS domain and problem, ground them, and print the
//! resulting propositional task.

use goalrec::strips::{ground, parse_domain, parse_problem};

const DOMAIN: &str = "
(define (domain delivery)
  (:requirements :strips :typing)
  (:types place item)
  (:predicates (at ?p - place) (holding ?i - item) (item-at ?i - item ?p - place) (road ?a ?b - place))
  (:action go
    :parameters (?a ?b - place)
    :precondition (and (at ?a) (road ?a ?b))
    :effect (and (at ?b) (not (at ?a))))
  (:action take
    :parameters (?i - item ?p - place)
    :precondition (and (at ?p) (item-at ?i ?p))
    :effect (and (holding ?i) (not (item-at ?i ?p))))
  (:action drop
    :parameters (?i - item ?p - place)
    :precondition (and (at ?p) (holding ?i))
    :effect (and (item-at ?i ?p) (not (holding ?i)))))
";

const PROBLEM: &str = "
(define (problem two-shops)
  (:domain delivery)
  (:objects home shop-a shop-b - place parcel - item)
  (:init (at home) (item-at parcel home)
         (road home shop-a) (road shop-a home) (road home shop-b) (road shop-b home))
  (:hypotheses
    (0.7 (item-at parcel shop-a))
    (0.3 (item-at parcel shop-b)))
  (:true-goal 0))
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = parse_domain(DOMAIN)?;
    let problem = parse_problem(PROBLEM, &schema)?;
    let task = ground(&schema, &problem)?;

    println!("{} facts, {} actions", task.num_facts(), task.num_actions());
    for a in task.actions() {
        println!("  {a}");
    }
    let init: Vec<String> = task.init().facts().map(|f| task.fact(f).to_string()).collect();
    println!("init: {}", init.join(" "));
    for (h, p) in task.priors().iter().enumerate() {
        let facts: Vec<String> = task
            .hypothesis(h)
            .facts
            .iter()
            .map(|&f| task.fact(f).to_string())
            .collect();
        println!("hypothesis {h} (prior {p}): {}", facts.join(" "));
    }
    Ok(())
}
