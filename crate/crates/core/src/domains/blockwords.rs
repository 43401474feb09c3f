//! Block-words: blocks named after letters, goals are towers spelling words.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    accept, domain_schema, draw_index, hypothesis_priors, DomainError, Family, GeneratorConfig, Instance, Setting,
};
use crate::strips::{GroundAtom, Hypothesis, Problem, TypedName};

pub const BLOCKWORDS_DOMAIN: &str = r#"(define (domain blockwords)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block)
               (handempty) (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down
    :parameters (?x - block)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x - block ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
"#;

const ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";
/// Letters used by the word-goal setting, in pool order.
const WORD_LETTERS: &str = "ardeshtp";
/// Words of the goal setting at the full eight-letter pool; shorter pools
/// keep the same words restricted to available letters.
const WORDS: [&str; 5] = ["read", "dare", "heat", "sept", "shard"];
const ATTEMPTS: usize = 100;

fn letters(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

/// Goal facts of a tower spelling `word` from the top down.
fn tower(word: &[String]) -> Vec<GroundAtom> {
    let mut facts: Vec<GroundAtom> = word
        .windows(2)
        .map(|w| GroundAtom::new("on", &[&w[0], &w[1]]))
        .collect();
    facts.push(GroundAtom::new("ontable", &[word.last().expect("nonempty word")]));
    facts
}

/// Random stacking of `blocks` into towers, hand empty.
fn random_state(rng: &mut ChaCha8Rng, blocks: &[String]) -> Vec<GroundAtom> {
    let mut order = blocks.to_vec();
    order.shuffle(rng);
    let mut towers: Vec<Vec<String>> = Vec::new();
    for b in order {
        if towers.is_empty() || rng.gen_bool(0.5) {
            towers.push(vec![b]);
        } else {
            let i = rng.gen_range(0..towers.len());
            towers[i].push(b);
        }
    }
    let mut init = vec![GroundAtom::new::<_, &str>("handempty", &[])];
    for t in &towers {
        init.push(GroundAtom::new("ontable", &[&t[0]]));
        for w in t.windows(2) {
            init.push(GroundAtom::new("on", &[&w[1], &w[0]]));
        }
        init.push(GroundAtom::new("clear", &[t.last().expect("nonempty tower")]));
    }
    init
}

/// Set1 tower goals over the first `n` letters: hypothesis 0 reads the letters
/// in order from the bottom up; hypothesis 1 swaps the top two blocks.
fn set1_goals(n: usize) -> Vec<Vec<GroundAtom>> {
    let blocks = letters(&ALPHABET[..n]);
    let top_down: Vec<String> = blocks.iter().rev().cloned().collect();
    let mut swapped = top_down.clone();
    swapped.swap(0, 1);
    vec![tower(&top_down), tower(&swapped)]
}

fn set2_words(pool: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let avail = &WORD_LETTERS[..pool];
    let words = WORDS
        .iter()
        .map(|w| {
            w.chars()
                .filter(|c| avail.contains(*c))
                .map(String::from)
                .collect::<Vec<_>>()
        })
        .collect();
    (letters(avail), words)
}

pub fn gen_blockwords(cfg: &GeneratorConfig) -> Result<Instance, DomainError> {
    let schema = domain_schema(Family::Blockwords)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (blocks, goals) = match cfg.setting {
        Setting::Set1 => {
            let n = (24.0 * cfg.scale).ceil() as usize;
            if n < 3 {
                return Err(DomainError::ScaleTooSmall {
                    family: Family::Blockwords,
                    scale: cfg.scale,
                    reason: "towers need at least 3 blocks",
                });
            }
            (letters(&ALPHABET[..n]), set1_goals(n))
        }
        Setting::Set2 => {
            let pool = ((8.0 * cfg.scale).ceil() as usize).clamp(4, WORD_LETTERS.len());
            let (blocks, words) = set2_words(pool);
            (blocks, words.iter().map(|w| tower(w)).collect())
        }
    };
    let priors = hypothesis_priors(Family::Blockwords, cfg.setting);
    let truth = draw_index(&mut rng, &priors);
    let hypotheses: Vec<Hypothesis> = goals
        .into_iter()
        .zip(&priors)
        .map(|(facts, &prior)| Hypothesis { prior, facts })
        .collect();
    for _ in 0..ATTEMPTS {
        let problem = Problem {
            name: format!("blockwords-{}-{}", cfg.setting, cfg.seed),
            domain: schema.name.clone(),
            objects: blocks
                .iter()
                .map(|b| TypedName {
                    name: b.clone(),
                    ty: "block".into(),
                })
                .collect(),
            init: random_state(&mut rng, &blocks),
            hypotheses: hypotheses.clone(),
            true_goal: Some(truth),
        };
        if let Some(inst) = accept(&schema, problem)? {
            return Ok(inst);
        }
    }
    Err(DomainError::UnsolvableLayout(ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::tests::check_instance;
    use super::*;

    #[test]
    fn full_scale_towers_have_24_facts() {
        let inst = gen_blockwords(&GeneratorConfig::new(Family::Blockwords, Setting::Set1, 3, 1.0)).unwrap();
        let t = &inst.task;
        assert_eq!(t.hypotheses().len(), 2);
        assert_eq!(t.hypothesis(0).facts.len(), 24);
        assert_eq!(t.hypothesis(1).facts.len(), 24);
        assert_eq!(t.priors(), vec![0.8, 0.2]);
    }

    #[test]
    fn set1_goals_differ_only_at_the_top() {
        let n = 6;
        let g = set1_goals(n);
        let a: BTreeSet<String> = g[0].iter().map(|f| f.to_string()).collect();
        let b: BTreeSet<String> = g[1].iter().map(|f| f.to_string()).collect();
        let top = ["e", "f"];
        for f in a.symmetric_difference(&b) {
            assert!(top.iter().any(|t| f.contains(t)), "{f}");
        }
        for f in a.intersection(&b) {
            assert!(!f.contains('f'), "{f}");
        }
        assert!(a.contains("(on f e)") && b.contains("(on e f)"));
    }

    #[test]
    fn scale_too_small() {
        let err = gen_blockwords(&GeneratorConfig::new(Family::Blockwords, Setting::Set1, 0, 0.05)).unwrap_err();
        assert!(matches!(err, DomainError::ScaleTooSmall { .. }));
    }

    #[test]
    fn set2_has_five_overlapping_words() {
        let cfg = GeneratorConfig::new(Family::Blockwords, Setting::Set2, 1, 1.0);
        let inst = gen_blockwords(&cfg).unwrap();
        let t = &inst.task;
        assert_eq!(t.hypotheses().len(), 5);
        assert!(t.priors().iter().all(|&p| (p - 0.2).abs() < 1e-12));
        // "read" and "shard" both end on d
        let shared = t.hypothesis(0).facts.iter().any(|f| t.hypothesis(4).facts.contains(f));
        assert!(shared);
        check_instance(&inst);
        // small pools keep 4 letters
        let small = gen_blockwords(&GeneratorConfig::new(Family::Blockwords, Setting::Set2, 1, 0.1)).unwrap();
        assert_eq!(small.problem.objects.len(), 4);
    }

    #[test]
    fn seeded_instances_are_reproducible_and_plannable() {
        for seed in 0..10 {
            let cfg = GeneratorConfig::new(Family::Blockwords, Setting::Set1, seed, 0.25);
            let a = gen_blockwords(&cfg).unwrap();
            let b = gen_blockwords(&cfg).unwrap();
            assert_eq!(a.problem, b.problem);
            check_instance(&a);
        }
    }
}
