//! Held-out accuracy of the LSTM recognizer as the training set grows.

use goalrec::domains::{Family, GeneratorConfig, Setting};
use goalrec::harness::{curve_csv, learning_curve_eval, CurveMethod, HyperConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::new(Family::Logistics, Setting::Set1, 2, 0.3);
    let hyper = HyperConfig::default();
    let points = learning_curve_eval(&cfg, &[10, 40, 160], CurveMethod::Lstm, &hyper)?;
    print!("{}", curve_csv(&points));
    Ok(())
}
