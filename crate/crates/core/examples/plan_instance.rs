//! Generate a logistics instance and solve it with greedy best-first search,
//! once deterministically and a few times with heuristic noise.

use goalrec::domains::{generate, Family, GeneratorConfig, Setting};
use goalrec::planner::{gbfs_plan, validate, RelaxedExplorer, SearchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorConfig::new(Family::Logistics, Setting::Set2, 11, 0.3))?;
    let task = &inst.task;
    let h = task.true_goal().expect("generated instances carry a label");
    let goal = task.hypothesis(h);

    let h_add = RelaxedExplorer::new(task).h_add(task.init(), &goal.facts);
    println!("hypothesis {h}, h_add at init = {h_add:?}");

    let plan = gbfs_plan(task, goal, &SearchConfig::default())?;
    validate(task, &plan, goal)?;
    println!("greedy plan, {} steps:", plan.cost());
    for &a in &plan.actions {
        println!("  {}", task.action(a));
    }

    for seed in 0..4 {
        let cfg = SearchConfig {
            seed,
            noise: 1.0,
            ..SearchConfig::default()
        };
        let p = gbfs_plan(task, goal, &cfg)?;
        validate(task, &p, goal)?;
        println!("noisy seed {seed}: {} steps", p.cost());
    }
    Ok(())
}
