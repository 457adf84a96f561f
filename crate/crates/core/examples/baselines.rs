//! Trains MELM, seq2seq and GRNN on the toy split and compares MELM's
//! perplexity with the unigram model of the same questions.
//!
//! cargo run --release --example baselines -- [epochs]

use textvqg::baselines::{
    generate_baseline, melm_perplexity, train_baseline, unigram_perplexity, BaselineKind, BaselineModel,
    BaselineResources, GRNN_INPUT_DIM,
};
use textvqg::data::make_toy_dataset;
use textvqg::olra::TrainConfig;
use textvqg::text::{build_vocab, decode_ids, encode_question};

fn main() -> textvqg::Result<()> {
    let epochs = std::env::args().nth(1).map_or(30, |s| s.parse().expect("epochs"));
    let toy = make_toy_dataset(7, 64);
    let side = toy.side_info();
    let wide = toy.visual_store(GRNN_INPUT_DIM);
    let res = BaselineResources { side: &side, visual: Some(&wide) };
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    let config = TrainConfig { epochs, learning_rate: 1e-3, ..TrainConfig::default() };

    for kind in BaselineKind::ALL {
        let out = train_baseline(kind, &toy.manifest, res, &vocab, &config, |_, _| Ok(()))?;
        let last = out.log.last().expect("at least one epoch");
        println!("{kind}: final l_q {:.4} after {} epochs", last.l_q, out.log.len());
        for s in toy.manifest.samples.iter().take(3) {
            let ids = generate_baseline(&out.model, s, res, &vocab, &config, 1)?;
            println!("  {:<20} -> {}", s.ocr.text, decode_ids(&ids, &vocab)?.join(" "));
        }
        if let BaselineModel::Melm(m) = &out.model {
            let ppl = melm_perplexity(m, &toy.manifest, res, &vocab, &config)?;
            let targets: Vec<Vec<usize>> = toy
                .manifest
                .samples
                .iter()
                .map(|s| encode_question(&s.question, &vocab, config.max_len))
                .collect();
            println!("  perplexity {ppl:.3} vs unigram {:.3}", unigram_perplexity(&targets));
        }
    }
    Ok(())
}
