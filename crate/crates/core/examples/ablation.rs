//! Runs the three-variant OLRA ablation on toy data and prints the variant
//! table and the answer-length table.
//!
//! cargo run --release --example ablation -- [epochs]

use textvqg::cli::{run_ablation, Format, PreparedData};
use textvqg::olra::TrainConfig;

fn main() -> textvqg::Result<()> {
    let epochs = std::env::args().nth(1).map_or(60, |s| s.parse().expect("epochs"));
    let root = std::env::temp_dir().join("textvqg-ablation");
    let data_dir = root.join("data");
    let data_arg = data_dir.to_str().expect("utf-8 path");
    textvqg::cli::run_from(["textvqg", "prepare", "--dataset", "toy", "--out", data_arg, "--seed", "7"])?;
    let data = PreparedData::load(&data_dir)?;
    let base = TrainConfig { epochs, learning_rate: 1e-3, seed: 7, ..TrainConfig::default() };
    let result = run_ablation(&data, &base, &root.join("runs"))?;
    print!("{}", result.render(Format::Md));
    Ok(())
}
