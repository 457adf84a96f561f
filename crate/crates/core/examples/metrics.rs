//! Scores a handful of generated questions with corpus BLEU, METEOR and
//! ROUGE-L, then prints the full report as markdown.
//!
//! cargo run --example metrics

use textvqg::cli::{render_report, Format};
use textvqg::metrics::{bleu_corpus_up_to, evaluate_corpus, meteor, rouge_l, EvalPair};
use textvqg::text::tokenize;

fn main() -> textvqg::Result<()> {
    let rows = [
        ("what is the name of the aircraft?", "what is the name of the aircraft?", 1),
        ("what is the number on the plane?", "what is the number on the aircraft?", 1),
        ("what does the sign say?", "what is written on the sign?", 3),
        ("which brand is the bottle?", "what brand is the bottle?", 2),
    ];
    let pairs: Vec<EvalPair> = rows
        .iter()
        .map(|(c, r, _)| EvalPair::single(tokenize(c), tokenize(r)))
        .collect();
    let counts: Vec<usize> = rows.iter().map(|r| r.2).collect();

    for p in &pairs {
        println!(
            "{:<40} meteor {:.4}  rouge-l {:.4}",
            p.candidate.join(" "),
            meteor(&p.candidate, &p.references[0]),
            rouge_l(&p.candidate, &p.references[0])
        );
    }
    let bleu = bleu_corpus_up_to(&pairs, 4);
    println!("corpus BLEU-1..4: {bleu:.4?}\n");

    let report = evaluate_corpus(&pairs, &counts)?;
    print!("{}", render_report(&report, Format::Md));
    Ok(())
}
