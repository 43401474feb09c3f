//! Build a labeled trace dataset, inspect its split, and show how observation
//! ratios truncate a trace.

use goalrec::domains::{Family, GeneratorConfig, Setting};
use goalrec::harness::{build_dataset, truncate, RATIOS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::new(Family::Grid, Setting::Set2, 21, 0.4);
    let ds = build_dataset(&cfg, 200)?;
    println!(
        "{} traces over {} distinct actions from {} instances",
        ds.traces.len(),
        ds.vocab.len(),
        ds.instances.len()
    );
    println!(
        "split: {} train / {} validation / {} held out",
        ds.split.train.len(),
        ds.split.validation.len(),
        ds.split.heldout.len()
    );
    let mut counts = vec![0; ds.n_classes()];
    for t in &ds.traces {
        counts[t.label.expect("generated traces are labeled")] += 1;
    }
    println!("label counts {counts:?} for priors {:?}", ds.meta.priors);

    let t = &ds.traces[ds.split.heldout[0]];
    for r in RATIOS.into_iter().chain([1.0]) {
        let p = truncate(t, r);
        let names: Vec<&str> = p.actions.iter().map(|&a| ds.vocab[a as usize].as_str()).collect();
        println!("{r:.1}: {}", names.join(" "));
    }

    let dir = std::env::temp_dir().join("goalrec-grid-set2");
    ds.save(&dir)?;
    println!("saved to {}", dir.display());
    Ok(())
}
