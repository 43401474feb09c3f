//! Grid: a robot moves on a 4-connected grid; locked cells open with a key.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    accept, domain_schema, draw_index, hypothesis_priors, DomainError, Family, GeneratorConfig, Instance, Setting,
};
use crate::strips::{GroundAtom, Hypothesis, Problem, TypedName};

pub const GRID_DOMAIN: &str = r#"(define (domain grid)
  (:requirements :strips :typing)
  (:types cell)
  (:predicates (at-robot ?c - cell) (open ?c - cell) (locked ?c - cell) (key-at ?c - cell)
               (holding-key) (arm-empty) (adj ?a - cell ?b - cell))
  (:action move
    :parameters (?from - cell ?to - cell)
    :precondition (and (at-robot ?from) (adj ?from ?to) (open ?to))
    :effect (and (not (at-robot ?from)) (at-robot ?to)))
  (:action unlock
    :parameters (?cur - cell ?lock - cell)
    :precondition (and (at-robot ?cur) (adj ?cur ?lock) (locked ?lock) (holding-key))
    :effect (and (not (locked ?lock)) (open ?lock)))
  (:action pickup
    :parameters (?c - cell)
    :precondition (and (at-robot ?c) (key-at ?c) (arm-empty))
    :effect (and (not (key-at ?c)) (not (arm-empty)) (holding-key)))
  (:action putdown
    :parameters (?c - cell)
    :precondition (and (at-robot ?c) (holding-key))
    :effect (and (not (holding-key)) (arm-empty) (key-at ?c))))
"#;

const ATTEMPTS: usize = 100;
/// Fraction of cells that start locked.
const LOCK_DENSITY: f64 = 0.15;
// fixed draws shared by every instance of a setting
const LAYOUT_SEED: u64 = 0x6e1d;

fn cell(x: usize, y: usize) -> String {
    format!("c{x}-{y}")
}

fn at_robot(c: (usize, usize)) -> Vec<GroundAtom> {
    vec![GroundAtom::new("at-robot", &[cell(c.0, c.1)])]
}

pub fn side_for_scale(scale: f64) -> usize {
    ((15.0 * scale).round() as usize).max(3)
}

/// Goal cells of `set2`: a fixed sample of `pool` cells away from the origin.
fn goal_pool(side: usize, pool: usize) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..side)
        .flat_map(|x| (0..side).map(move |y| (x, y)))
        .filter(|&c| c != (0, 0))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(LAYOUT_SEED);
    cells.shuffle(&mut rng);
    cells.truncate(pool);
    cells
}

struct Layout {
    side: usize,
    robot: (usize, usize),
    locked: Vec<(usize, usize)>,
    keys: Vec<(usize, usize)>,
}

impl Layout {
    /// Random locks and keys; locks avoid the robot and `keep` cells.
    fn random(rng: &mut ChaCha8Rng, side: usize, robot: (usize, usize), keep: &[(usize, usize)]) -> Self {
        let mut free: Vec<(usize, usize)> = (0..side)
            .flat_map(|x| (0..side).map(move |y| (x, y)))
            .filter(|&c| c != robot && !keep.contains(&c))
            .collect();
        free.shuffle(rng);
        let n_locks = (LOCK_DENSITY * (side * side) as f64).round() as usize;
        let locked: Vec<_> = free.drain(..n_locks.min(free.len())).collect();
        let n_keys = (side / 3).max(1).min(free.len());
        let keys = free.drain(..n_keys).collect();
        Layout {
            side,
            robot,
            locked,
            keys,
        }
    }

    fn init(&self) -> Vec<GroundAtom> {
        let n = self.side;
        let mut init = vec![
            GroundAtom::new("at-robot", &[cell(self.robot.0, self.robot.1)]),
            GroundAtom::new::<_, &str>("arm-empty", &[]),
        ];
        for x in 0..n {
            for y in 0..n {
                let here = cell(x, y);
                let pred = if self.locked.contains(&(x, y)) {
                    "locked"
                } else {
                    "open"
                };
                init.push(GroundAtom::new(pred, &[&here]));
                let mut nbrs = Vec::new();
                if x > 0 {
                    nbrs.push((x - 1, y));
                }
                if x + 1 < n {
                    nbrs.push((x + 1, y));
                }
                if y > 0 {
                    nbrs.push((x, y - 1));
                }
                if y + 1 < n {
                    nbrs.push((x, y + 1));
                }
                for (a, b) in nbrs {
                    init.push(GroundAtom::new("adj", &[here.clone(), cell(a, b)]));
                }
            }
        }
        for &(x, y) in &self.keys {
            init.push(GroundAtom::new("key-at", &[cell(x, y)]));
        }
        init
    }

    fn objects(&self) -> Vec<TypedName> {
        (0..self.side)
            .flat_map(|x| (0..self.side).map(move |y| (x, y)))
            .map(|(x, y)| TypedName {
                name: cell(x, y),
                ty: "cell".into(),
            })
            .collect()
    }
}

pub fn gen_grid(cfg: &GeneratorConfig) -> Result<Instance, DomainError> {
    let side = side_for_scale(cfg.scale);
    let schema = domain_schema(Family::Grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let priors = match cfg.setting {
        Setting::Set1 => hypothesis_priors(Family::Grid, Setting::Set1),
        Setting::Set2 => vec![1.0 / cfg.grid_goal_pool as f64; cfg.grid_goal_pool],
    };
    let goals: Vec<(usize, usize)> = match cfg.setting {
        // two neighbouring cells in the far corner
        Setting::Set1 => vec![(side - 1, side - 1), (side - 2, side - 1)],
        Setting::Set2 => {
            if cfg.grid_goal_pool == 0 || cfg.grid_goal_pool >= side * side {
                return Err(DomainError::ScaleTooSmall {
                    family: Family::Grid,
                    scale: cfg.scale,
                    reason: "grid too small for the goal pool",
                });
            }
            goal_pool(side, cfg.grid_goal_pool)
        }
    };
    let truth = draw_index(&mut rng, &priors);
    let hypotheses: Vec<Hypothesis> = goals
        .iter()
        .zip(&priors)
        .map(|(&g, &prior)| Hypothesis {
            prior,
            facts: at_robot(g),
        })
        .collect();
    for _ in 0..ATTEMPTS {
        let robot = match cfg.setting {
            Setting::Set1 => (0, 0),
            Setting::Set2 => loop {
                let c = (rng.gen_range(0..side), rng.gen_range(0..side));
                if c != goals[truth] {
                    break c;
                }
            },
        };
        let layout = Layout::random(&mut rng, side, robot, &goals);
        let problem = Problem {
            name: format!("grid-{}-{}", cfg.setting, cfg.seed),
            domain: schema.name.clone(),
            objects: layout.objects(),
            init: layout.init(),
            hypotheses: hypotheses.clone(),
            true_goal: Some(truth),
        };
        if let Some(inst) = accept(&schema, problem)? {
            return Ok(inst);
        }
    }
    Err(DomainError::UnsolvableLayout(ATTEMPTS))
}
