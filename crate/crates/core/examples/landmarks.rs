//! Extract fact landmarks for each goal hypothesis of a small grid instance.

use goalrec::domains::{generate, Family, GeneratorConfig, Setting};
use goalrec::landmarks::LandmarkExtractor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate(&GeneratorConfig::new(Family::Grid, Setting::Set1, 4, 0.2))?;
    let task = &inst.task;
    let graphs = LandmarkExtractor::new(task).extract_all()?;
    for g in &graphs {
        println!(
            "hypothesis {}: {} landmarks ({} already true), {} orderings",
            g.goal_index,
            g.landmarks.len(),
            g.trivial.len(),
            g.orderings.len()
        );
        print!("{}", g.dump(task));
    }
    Ok(())
}
