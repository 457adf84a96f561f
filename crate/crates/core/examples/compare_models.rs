//! Trains OLRA and the three baselines on the toy training split and prints
//! their test scores in one comparison table.
//!
//! cargo run --release --example compare_models -- [epochs]

use textvqg::cli::{predict, render_comparison, train_into, ComparisonRow, Format, PreparedData};
use textvqg::metrics::evaluate_predictions;
use textvqg::models::ModelKind;
use textvqg::olra::TrainConfig;
use textvqg::sample::Split;

fn main() -> textvqg::Result<()> {
    let epochs = std::env::args().nth(1).unwrap_or_else(|| "60".into());
    let root = std::env::temp_dir().join("textvqg-compare");
    let data_dir = root.join("data");
    let data_arg = data_dir.to_str().expect("utf-8 path");
    textvqg::cli::run_from(["textvqg", "prepare", "--dataset", "toy", "--out", data_arg, "--seed", "7"])?;
    let data = PreparedData::load(&data_dir)?;
    let config = TrainConfig {
        epochs: epochs.parse().expect("epochs"),
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };

    let order = [ModelKind::Melm, ModelKind::Seq2seq, ModelKind::Grnn, ModelKind::Olra];
    let mut reports = Vec::new();
    for kind in order {
        let (model, _) = train_into(kind, &data, &config, &root.join(kind.name()))?;
        let report = evaluate_predictions(&predict(&model, &data, Split::Test, 1)?)?;
        reports.push((kind, report));
    }
    let rows: Vec<ComparisonRow<'_>> = reports
        .iter()
        .map(|(kind, r)| ComparisonRow { method: kind.label().to_string(), scores: vec![Some(&r.corpus)] })
        .collect();
    print!("{}", render_comparison(&["toy"], &rows, Format::Md));
    Ok(())
}
