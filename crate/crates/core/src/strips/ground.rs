use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::syntax::*;
use super::{Fact, GoalHypothesis, GroundAction, GroundTask, StripsError};

/// Which instantiations survive grounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pruning {
    /// Keep every type-consistent instantiation.
    None,
    /// Keep actions whose static preconditions hold and that are reachable
    /// from the initial state under delete relaxation. Static facts are folded
    /// away unless a goal mentions them.
    Reachable,
}

/// Grounds with reachability pruning.
pub fn ground(schema: &DomainSchema, problem: &Problem) -> Result<GroundTask, StripsError> {
    ground_with(schema, problem, Pruning::Reachable)
}

struct Candidate {
    name: String,
    args: Vec<String>,
    pre: Vec<GroundAtom>,
    add: Vec<GroundAtom>,
    del: Vec<GroundAtom>,
}

fn check_atom(schema: &DomainSchema, objects: &HashMap<String, String>, atom: &GroundAtom) -> Result<(), StripsError> {
    let decl = schema
        .predicate(&atom.predicate)
        .ok_or_else(|| StripsError::UnknownPredicate {
            name: atom.predicate.clone(),
            line: 0,
            col: 0,
        })?;
    if decl.params.len() != atom.args.len() {
        return Err(StripsError::ArityMismatch {
            predicate: atom.predicate.clone(),
            expected: decl.params.len(),
            found: atom.args.len(),
            line: 0,
            col: 0,
        });
    }
    for (arg, p) in atom.args.iter().zip(&decl.params) {
        let ty = objects.get(arg).ok_or_else(|| StripsError::UndeclaredConstant {
            name: arg.clone(),
            line: 0,
            col: 0,
        })?;
        if !schema.is_subtype(ty, &p.ty) {
            return Err(StripsError::TypeMismatch {
                object: arg.clone(),
                expected: p.ty.clone(),
                line: 0,
                col: 0,
            });
        }
    }
    Ok(())
}

fn instantiate(atom: &Atom, params: &[TypedName], binding: &[&str]) -> GroundAtom {
    GroundAtom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => {
                    let k = params.iter().position(|p| &p.name == v).expect("checked by parser");
                    binding[k].to_string()
                }
            })
            .collect(),
    }
}

/// Deepest parameter index an atom refers to (`None` when variable-free).
fn last_param(atom: &Atom, params: &[TypedName]) -> Option<usize> {
    atom.args
        .iter()
        .filter_map(|t| match t {
            Term::Var(v) => params.iter().position(|p| &p.name == v),
            Term::Const(_) => None,
        })
        .max()
}

fn enumerate<'o>(
    action: &ActionSchema,
    domains: &[Vec<&'o str>],
    static_checks: &[Vec<&Atom>],
    init: &HashSet<GroundAtom>,
    binding: &mut Vec<&'o str>,
    out: &mut Vec<Vec<String>>,
) {
    let depth = binding.len();
    if depth == action.params.len() {
        out.push(binding.iter().map(|s| s.to_string()).collect());
        return;
    }
    for &obj in &domains[depth] {
        if binding.contains(&obj) {
            continue;
        }
        binding.push(obj);
        let ok = static_checks[depth]
            .iter()
            .all(|a| init.contains(&instantiate(a, &action.params, binding)));
        if ok {
            enumerate(action, domains, static_checks, init, binding, out);
        }
        binding.pop();
    }
}

/// Grounds `problem` against `schema`. Fact and action ids are assigned in
/// lexicographic order of (name, arguments).
pub fn ground_with(schema: &DomainSchema, problem: &Problem, pruning: Pruning) -> Result<GroundTask, StripsError> {
    if problem.domain != schema.name {
        return Err(StripsError::DomainMismatch {
            expected: schema.name.clone(),
            found: problem.domain.clone(),
        });
    }
    if problem.hypotheses.is_empty() {
        return Err(StripsError::EmptyHypothesisSet);
    }
    let mut objects: HashMap<String, String> = HashMap::new();
    for o in schema.constants.iter().chain(&problem.objects) {
        if !schema.has_type(&o.ty) {
            return Err(StripsError::UnknownType {
                name: o.ty.clone(),
                line: 0,
                col: 0,
            });
        }
        objects.insert(o.name.clone(), o.ty.clone());
    }
    for a in problem
        .init
        .iter()
        .chain(problem.hypotheses.iter().flat_map(|h| &h.facts))
    {
        check_atom(schema, &objects, a)?;
    }
    let init: HashSet<GroundAtom> = problem.init.iter().cloned().collect();

    let mut sorted_objects: Vec<(&String, &String)> = objects.iter().collect();
    sorted_objects.sort();

    let fluent: HashSet<&str> = schema
        .actions
        .iter()
        .flat_map(|a| a.add.iter().chain(&a.delete))
        .map(|a| a.predicate.as_str())
        .collect();
    let prune = pruning == Pruning::Reachable;

    let mut candidates = Vec::new();
    for action in &schema.actions {
        let domains: Vec<Vec<&str>> = action
            .params
            .iter()
            .map(|p| {
                sorted_objects
                    .iter()
                    .filter(|(_, ty)| schema.is_subtype(ty, &p.ty))
                    .map(|(n, _)| n.as_str())
                    .collect()
            })
            .collect();
        let mut static_checks: Vec<Vec<&Atom>> = vec![Vec::new(); action.params.len().max(1)];
        let mut ground_static_ok = true;
        if prune {
            for atom in &action.precondition {
                if fluent.contains(atom.predicate.as_str()) {
                    continue;
                }
                match last_param(atom, &action.params) {
                    Some(k) => static_checks[k].push(atom),
                    None => ground_static_ok &= init.contains(&instantiate(atom, &action.params, &[])),
                }
            }
        }
        if !ground_static_ok {
            continue;
        }
        let mut bindings = Vec::new();
        enumerate(action, &domains, &static_checks, &init, &mut Vec::new(), &mut bindings);
        for binding in bindings {
            let b: Vec<&str> = binding.iter().map(String::as_str).collect();
            let inst = |atoms: &[Atom]| -> Vec<GroundAtom> {
                atoms.iter().map(|a| instantiate(a, &action.params, &b)).collect()
            };
            let mut pre = inst(&action.precondition);
            if prune {
                pre.retain(|a| fluent.contains(a.predicate.as_str()));
            }
            candidates.push(Candidate {
                name: action.name.clone(),
                args: binding.clone(),
                pre,
                add: inst(&action.add),
                del: inst(&action.delete),
            });
        }
    }

    let goal_atoms: BTreeSet<&GroundAtom> = problem.hypotheses.iter().flat_map(|h| &h.facts).collect();
    let mut fact_set: BTreeSet<GroundAtom> = BTreeSet::new();
    let kept: Vec<usize> = if prune {
        let (reached, applicable) = relaxed_reach(&candidates, &init);
        for a in &reached {
            if fluent.contains(a.predicate.as_str()) {
                fact_set.insert(a.clone());
            }
        }
        applicable
    } else {
        for c in &candidates {
            fact_set.extend(c.pre.iter().chain(&c.add).chain(&c.del).cloned());
        }
        fact_set.extend(init.iter().cloned());
        (0..candidates.len()).collect()
    };
    fact_set.extend(goal_atoms.iter().map(|&a| a.clone()));

    let facts: Vec<GroundAtom> = fact_set.into_iter().collect();
    let fact_ids: HashMap<&GroundAtom, u32> = facts.iter().enumerate().map(|(i, f)| (f, i as u32)).collect();
    let mut kept: Vec<&Candidate> = kept.iter().map(|&i| &candidates[i]).collect();
    kept.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));
    // deletes of facts outside the universe (never true) are dropped
    let ids = |atoms: &[GroundAtom]| -> Vec<u32> { atoms.iter().filter_map(|a| fact_ids.get(a).copied()).collect() };
    let actions: Vec<GroundAction> = kept
        .iter()
        .enumerate()
        .map(|(i, c)| GroundAction {
            id: i as u32,
            name: c.name.clone(),
            args: c.args.clone(),
            pre: ids(&c.pre),
            add: ids(&c.add),
            del: ids(&c.del),
        })
        .collect();
    let init_ids: Vec<u32> = problem.init.iter().filter_map(|a| fact_ids.get(a).copied()).collect();
    let hypotheses = problem
        .hypotheses
        .iter()
        .map(|h| GoalHypothesis {
            facts: h.facts.iter().map(|a| fact_ids[a]).collect(),
            prior: h.prior,
        })
        .collect();
    let facts = facts
        .into_iter()
        .enumerate()
        .map(|(i, a)| Fact {
            id: i as u32,
            predicate: a.predicate,
            args: a.args,
        })
        .collect();
    GroundTask::new(facts, actions, init_ids, hypotheses, problem.true_goal)
}

/// Delete-relaxed fixpoint over candidate actions: returns reached atoms and the
/// indices of candidates whose preconditions become reachable.
fn relaxed_reach(candidates: &[Candidate], init: &HashSet<GroundAtom>) -> (HashSet<GroundAtom>, Vec<usize>) {
    let mut waiting: HashMap<&GroundAtom, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(candidates.len());
    let mut reached: HashSet<GroundAtom> = init.clone();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, c) in candidates.iter().enumerate() {
        let distinct: HashSet<&GroundAtom> = c.pre.iter().collect();
        let mut n = 0;
        for a in distinct {
            if !reached.contains(a) {
                waiting.entry(a).or_default().push(i);
                n += 1;
            }
        }
        missing.push(n);
        if n == 0 {
            queue.push_back(i);
        }
    }
    let mut applicable = Vec::new();
    while let Some(i) = queue.pop_front() {
        applicable.push(i);
        for a in &candidates[i].add {
            if reached.insert(a.clone()) {
                if let Some(ws) = waiting.remove(a) {
                    for w in ws {
                        missing[w] -= 1;
                        if missing[w] == 0 {
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
    }
    applicable.sort_unstable();
    (reached, applicable)
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_domain;
    use super::super::parser::parse_problem;
    use super::super::{holds, StripsError};
    use super::*;

    const BLOCKS: &str = r#"(define (domain blocks) (:types block)
      (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block) (handempty) (holding ?x - block))
      (:action pick-up :parameters (?x - block) :precondition (and (clear ?x) (ontable ?x) (handempty))
        :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
      (:action put-down :parameters (?x - block) :precondition (holding ?x)
        :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
      (:action stack :parameters (?x - block ?y - block) :precondition (and (holding ?x) (clear ?y))
        :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
      (:action unstack :parameters (?x - block ?y - block) :precondition (and (on ?x ?y) (clear ?x) (handempty))
        :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))"#;

    const THREE: &str = "(define (problem three) (:domain blocks) (:objects a b c - block)
      (:init (clear a) (clear b) (clear c) (ontable a) (ontable b) (ontable c) (handempty))
      (:hypotheses (0.5 (and (on a b))) (0.5 (and (on b a)))))";

    #[test]
    fn three_blocks_type_consistent_count() {
        let d = parse_domain(BLOCKS).unwrap();
        let p = parse_problem(THREE, &d).unwrap();
        // 3 pick-up + 3 put-down + 6 stack + 6 unstack
        let t = ground_with(&d, &p, Pruning::None).unwrap();
        assert_eq!(t.num_actions(), 18);
        // all instantiations are reachable in blocksworld
        let t = ground(&d, &p).unwrap();
        assert_eq!(t.num_actions(), 18);
    }

    #[test]
    fn ids_are_lexicographic_and_deterministic() {
        let d = parse_domain(BLOCKS).unwrap();
        let p = parse_problem(THREE, &d).unwrap();
        let a = ground(&d, &p).unwrap();
        let b = ground(&d, &p).unwrap();
        assert_eq!(a, b);
        let names: Vec<String> = a.actions().iter().map(|x| x.to_string()).collect();
        assert_eq!(names[0], "(pick-up a)");
        let mut sorted = a
            .actions()
            .iter()
            .map(|x| (x.name.clone(), x.args.clone()))
            .collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(
            sorted,
            a.actions()
                .iter()
                .map(|x| (x.name.clone(), x.args.clone()))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn pick_up_semantics() {
        let d = parse_domain(BLOCKS).unwrap();
        let p = parse_problem(THREE, &d).unwrap();
        let t = ground(&d, &p).unwrap();
        let pick = t.action_id("(pick-up a)").unwrap();
        let s = t.apply(t.init(), pick).unwrap();
        assert!(s.contains(t.fact_id("(holding a)").unwrap()));
        assert!(!s.contains(t.fact_id("(clear a)").unwrap()));
        assert!(!s.contains(t.fact_id("(handempty)").unwrap()));
        assert!(!s.contains(t.fact_id("(ontable a)").unwrap()));
        // input state untouched
        assert!(t.init().contains(t.fact_id("(clear a)").unwrap()));
        let stack = t.action_id("(stack a b)").unwrap();
        let s2 = t.apply(&s, stack).unwrap();
        assert!(holds(&s2, t.hypothesis(0)));
    }

    #[test]
    fn unreachable_actions_pruned() {
        let d = parse_domain(
            "(define (domain d) (:predicates (p) (q) (r) (link ?x ?y))
              (:action a1 :parameters () :precondition (p) :effect (q))
              (:action a2 :parameters () :precondition (r) :effect (q))
              (:action go :parameters (?x ?y) :precondition (and (link ?x ?y) (p)) :effect (q)))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem x) (:domain d) (:objects u v) (:init (p) (link u v)) (:goal (q)))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p).unwrap();
        let names: Vec<String> = t.actions().iter().map(|a| a.to_string()).collect();
        assert_eq!(names, vec!["(a1)", "(go u v)"]);
        // static link facts are folded away
        assert!(t.fact_id("(link u v)").is_none());
        assert!(t.action(1).pre.iter().all(|&f| t.fact(f).predicate == "p"));
        let full = ground_with(&d, &p, Pruning::None).unwrap();
        assert_eq!(full.num_actions(), 4);
    }

    #[test]
    fn zero_hypotheses_error() {
        let d = parse_domain(BLOCKS).unwrap();
        let mut p = parse_problem(THREE, &d).unwrap();
        p.hypotheses.clear();
        assert_eq!(ground(&d, &p).unwrap_err(), StripsError::EmptyHypothesisSet);
    }

    #[test]
    fn undeclared_constant_in_constructed_problem() {
        let d = parse_domain(BLOCKS).unwrap();
        let mut p = parse_problem(THREE, &d).unwrap();
        p.init.push(GroundAtom::new("clear", &["zz"]));
        assert!(matches!(ground(&d, &p), Err(StripsError::UndeclaredConstant { .. })));
    }

    #[test]
    fn subtypes_match_parent_parameters() {
        let d = parse_domain(
            "(define (domain t) (:types vehicle - object truck - vehicle place)
              (:predicates (at ?v - vehicle ?p - place))
              (:action move :parameters (?v - vehicle ?from - place ?to - place)
                 :precondition (at ?v ?from) :effect (and (at ?v ?to) (not (at ?v ?from)))))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem q) (:domain t) (:objects t1 - truck x y - place)
               (:init (at t1 x)) (:goal (at t1 y)))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p).unwrap();
        assert_eq!(t.num_actions(), 2);
    }
}
