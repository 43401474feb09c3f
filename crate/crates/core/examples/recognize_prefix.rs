//! Plan toward a hidden goal, then watch landmark-based recognition sharpen as
//! more of the plan is observed, with and without hypothesis priors.

use goalrec::domains::{generate, Family, GeneratorConfig, Setting};
use goalrec::landmarks::LandmarkExtractor;
use goalrec::planner::{gbfs_plan, SearchConfig};
use goalrec::recognizer::{recognize_trace, DomainModel, DEFAULT_THETA};
use goalrec::strips::ObservationTrace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorConfig::new(Family::Blockwords, Setting::Set2, 5, 0.75))?;
    let task = &inst.task;
    let truth = task.true_goal().expect("labeled instance");
    let plan = gbfs_plan(task, task.hypothesis(truth), &SearchConfig::default())?;
    let graphs = LandmarkExtractor::new(task).extract_all()?;
    let priors = task.priors();

    println!("true goal {truth}, plan length {}", plan.actions.len());
    for ratio in [0.1, 0.3, 0.5, 0.7, 1.0] {
        let n = ((ratio * plan.actions.len() as f64).ceil() as usize).max(1);
        let obs = ObservationTrace::new(plan.actions[..n].to_vec(), Some(truth))?;
        let plain = recognize_trace(DomainModel::Strips(task), &graphs, &obs, DEFAULT_THETA, None)?;
        let weighted = recognize_trace(DomainModel::Strips(task), &graphs, &obs, DEFAULT_THETA, Some(&priors))?;
        let scores: Vec<String> = plain.scores.iter().map(|s| format!("{s:.2}")).collect();
        println!(
            "ratio {ratio:.1}: scores [{}] candidates {:?} -> lgr {} / lgr+prior {}",
            scores.join(" "),
            plain.candidate_set,
            plain.predicted,
            weighted.predicted
        );
    }
    Ok(())
}
