//! Compare every recognizer on small set1 datasets of each family and print
//! accuracy and per-prediction time by observation ratio.

use goalrec::domains::{Family, GeneratorConfig, Setting};
use goalrec::harness::{build_dataset, evaluate, EvalReport, Gbt, HyperConfig, Lgr, Lstm, Method, RATIOS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hyper = HyperConfig::default();
    let mut report = EvalReport::default();
    for (family, scale) in [
        (Family::Blockwords, 0.25),
        (Family::Grid, 0.3),
        (Family::Logistics, 0.3),
        (Family::Buy, 1.0),
    ] {
        let ds = build_dataset(&GeneratorConfig::new(family, Setting::Set1, 1, scale), 300)?;
        let mut methods: Vec<Box<dyn Method>> = vec![
            Box::new(Lstm::new(hyper.lstm, hyper.seed)),
            Box::new(Gbt::new(hyper.gbt)),
            Box::new(Lgr::new(hyper.theta, false)),
            Box::new(Lgr::new(hyper.theta, true)),
        ];
        report.extend(evaluate(&mut methods, &ds, &RATIOS)?);
    }
    print!("{}", report.to_table());
    Ok(())
}
