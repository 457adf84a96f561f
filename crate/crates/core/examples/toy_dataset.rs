//! Generates the synthetic toy dataset, shows a few records in the canonical
//! JSONL layout and round-trips its feature store through disk.
//!
//! cargo run --example toy_dataset -- [seed] [n]

use textvqg::data::{make_toy_dataset, FeatureStore};

fn main() -> textvqg::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(7, |s| s.parse().expect("seed"));
    let n = args.next().map_or(64, |s| s.parse().expect("n"));

    let toy = make_toy_dataset(seed, n);
    for line in toy.manifest.to_jsonl()?.lines().take(3) {
        println!("{line}");
    }
    println!("answer length fractions: {:?}", toy.manifest.answer_length_fractions());

    let dir = std::env::temp_dir().join(format!("textvqg-toy-{seed}-{n}"));
    toy.store.write(&dir)?;
    let back = FeatureStore::read(&dir)?;
    println!(
        "feature store: {} records of dim {} at {}, round trip exact: {}",
        back.len(),
        back.dim(),
        dir.display(),
        back == toy.store
    );
    Ok(())
}
