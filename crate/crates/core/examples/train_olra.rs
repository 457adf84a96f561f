//! Trains OLRA on a synthetic toy split and prints the per-epoch losses and
//! a few generated questions.
//!
//! cargo run --release --example train_olra -- [epochs] [learning_rate]

use textvqg::data::make_toy_dataset;
use textvqg::encoders::WordVectorTable;
use textvqg::olra::{prepare_samples, train_prepared, Stores, TrainConfig};
use textvqg::text::{build_vocab, decode_ids};

fn main() -> textvqg::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let epochs = args.next().map_or(30, |s| s.parse().expect("epochs"));
    let learning_rate = args.next().map_or(1e-3, |s| s.parse().expect("learning rate"));

    let toy = make_toy_dataset(7, 64);
    let words = WordVectorTable::new(300);
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    let config = TrainConfig {
        epochs,
        learning_rate,
        seed: 7,
        ..TrainConfig::default()
    };
    let stores = Stores { visual: &toy.store, words: &words };
    let samples = prepare_samples(&toy.manifest, stores, &vocab, config.max_len, config.use_position)?;

    let start = std::time::Instant::now();
    let out = train_prepared(&samples, vocab.len(), &config, |l, _| {
        println!(
            "epoch {:>3}  l_q {:.4}  l_a {:.4}  total {:.4}  lr {:.2e}  ({:.1}s)",
            l.epoch,
            l.l_q,
            l.l_a,
            l.total,
            l.lr,
            start.elapsed().as_secs_f64()
        );
        Ok(())
    })?;

    let mut exact = 0;
    for (i, s) in samples.iter().enumerate() {
        let q = decode_ids(&out.model.generate(&s.input, config.max_len, 1)?, &vocab)?;
        exact += usize::from(q == s.question);
        if i < 5 {
            println!("{:<28} -> {}", s.ocr_text, q.join(" "));
        }
    }
    println!("exact reproductions: {exact}/{}", samples.len());
    Ok(())
}
