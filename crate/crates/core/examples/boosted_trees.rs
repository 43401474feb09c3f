//! Train the boosted-trees recognizer on simulated Buy traces, watch the
//! training loss, and round-trip the model through JSON.

use goalrec::domains::{buy_vocab, gen_buy, Family, GeneratorConfig, Setting};
use goalrec::gbt::{featurize, train_gbt, GbtConfig, GbtEnsemble};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::new(Family::Buy, Setting::Set2, 3, 0.3);
    let buy = gen_buy(&cfg, 600);
    let vocab = buy_vocab(Setting::Set2);
    let data = buy
        .traces
        .iter()
        .map(|(a, y)| Ok((featurize(a, vocab.len())?, *y)))
        .collect::<Result<Vec<_>, goalrec::gbt::GbtError>>()?;
    let (train, test) = data.split_at(500);

    let gbt = GbtConfig {
        n_rounds: 30,
        ..GbtConfig::default()
    };
    let t = train_gbt(train, buy.priors.len(), &gbt)?;
    for (round, loss) in t.train_loss.iter().enumerate().step_by(5) {
        println!("round {round:3}  loss {loss:.4}");
    }

    let mut json = Vec::new();
    t.model.save(&mut json)?;
    let model = GbtEnsemble::load(json.as_slice())?;
    let correct = test
        .iter()
        .filter(|(x, y)| model.predict(x).map(|p| p.label == *y).unwrap_or(false))
        .count();
    println!(
        "held-out accuracy {}/{} ({} bytes of JSON)",
        correct,
        test.len(),
        json.len()
    );
    println!("vocabulary: {}", vocab.join(" "));
    Ok(())
}
