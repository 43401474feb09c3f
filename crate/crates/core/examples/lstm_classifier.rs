//! Train the LSTM sequence classifier on a toy problem where only the order
//! of two actions reveals the class.

use goalrec::seq::{accuracy, train_seq, SeqHyper};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // vocab: 0..4 filler, 4 and 5 the informative pair
    let mut sample = || {
        let y = rng.gen_range(0..2);
        let mut s: Vec<u32> = (0..rng.gen_range(3..10)).map(|_| rng.gen_range(0..4)).collect();
        let (a, b) = if y == 0 { (4, 5) } else { (5, 4) };
        let i = rng.gen_range(0..=s.len());
        s.insert(i, a);
        let j = rng.gen_range(i + 1..=s.len());
        s.insert(j, b);
        (s, y)
    };
    let train: Vec<_> = (0..400).map(|_| sample()).collect();
    let test: Vec<_> = (0..200).map(|_| sample()).collect();

    let hyper = SeqHyper {
        d_embed: 8,
        d_hidden: 16,
        epochs: 15,
        ..SeqHyper::default()
    };
    let t = train_seq(&train, 6, 2, &hyper, 1)?;
    let per_epoch = t.batch_loss.len() / hyper.epochs;
    for (e, chunk) in t.batch_loss.chunks(per_epoch).enumerate() {
        println!(
            "epoch {e:2}  mean batch loss {:.4}",
            chunk.iter().sum::<f64>() / chunk.len() as f64
        );
    }
    println!("train accuracy {:.3}", accuracy(&t.model, &train)?);
    println!("test accuracy  {:.3}", accuracy(&t.model, &test)?);
    Ok(())
}
