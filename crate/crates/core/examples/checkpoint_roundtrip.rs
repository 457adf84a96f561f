//! Trains a model, saves it as a checkpoint directory, loads it back and
//! decodes with greedy search and with beam search.
//!
//! cargo run --release --example checkpoint_roundtrip -- [olra|melm|seq2seq|grnn] [epochs]

use textvqg::baselines::GRNN_INPUT_DIM;
use textvqg::data::make_toy_dataset;
use textvqg::encoders::WordVectorTable;
use textvqg::models::{train_model, ModelKind, Resources, TrainedModel};
use textvqg::olra::TrainConfig;
use textvqg::text::{build_vocab, decode_ids};

fn main() -> textvqg::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ModelKind = args.next().as_deref().unwrap_or("olra").parse()?;
    let epochs = args.next().map_or(20, |s| s.parse().expect("epochs"));

    let toy = make_toy_dataset(7, 64);
    let wide = toy.visual_store(GRNN_INPUT_DIM);
    let side = toy.side_info();
    let words = WordVectorTable::new(300);
    let res = Resources { visual: &toy.store, visual_wide: Some(&wide), words: &words, side: &side };
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    let config = TrainConfig { epochs, learning_rate: 1e-3, ..TrainConfig::default() };

    let (trained, log) = train_model(kind, &toy.manifest, res, &vocab, &config, |_, _| Ok(()))?;
    let dir = std::env::temp_dir().join(format!("textvqg-checkpoint-{kind}"));
    trained.save(&dir)?;
    let loaded = TrainedModel::load(&dir)?;
    println!(
        "{kind}: {} epochs, final total {:.4}, checkpoint in {}",
        log.len(),
        log.last().map_or(f64::NAN, |l| l.total),
        dir.display()
    );
    for (i, s) in toy.manifest.samples.iter().enumerate().take(4) {
        let greedy = decode_ids(&loaded.generate(s, i, res, 1)?, &vocab)?;
        let beam = decode_ids(&loaded.generate(s, i, res, 3)?, &vocab)?;
        println!("{:<20} greedy: {}", s.ocr.text, greedy.join(" "));
        println!("{:<20} beam 3: {}", "", beam.join(" "));
    }
    Ok(())
}
