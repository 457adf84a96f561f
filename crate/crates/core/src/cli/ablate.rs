//! Three OLRA variants trained on the same data and compared.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::commands::{predict, train_into};
use super::data_dir::{PreparedData, RUN_CONFIG_FILE};
use super::render::{push_heading, score, Format, Table};
use super::{AblateArgs, RunConfig};
use crate::checkpoint::write_json;
use crate::error::{Error, Result};
use crate::metrics::{CorpusScores, EvalReport, SliceScores, PredictionRow, evaluate_predictions};
use crate::models::{ModelKind, TrainedModel};
use crate::olra::TrainConfig;
use crate::sample::Split;

/// λ of the full model.
pub const ABLATION_LAMBDA: f64 = 0.001;
pub const ABLATION_FILE: &str = "ablation.json";
/// Buckets shown in the answer-length table.
pub const SLICE_BUCKETS: [&str; 3] = ["1", "2", "3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    /// Directory name under the ablation output.
    pub dir: &'static str,
    pub label: &'static str,
    pub use_position: bool,
    pub consistency: bool,
}

pub const VARIANTS: [Variant; 3] = [
    Variant { dir: "wo_position", label: "w/o position", use_position: false, consistency: false },
    Variant { dir: "w_position", label: "w/ position", use_position: true, consistency: false },
    Variant {
        dir: "w_position_consistency",
        label: "w/ position + OCR-consistency",
        use_position: true,
        consistency: true,
    },
];

impl Variant {
    pub fn config(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            use_position: self.use_position,
            lambda: if self.consistency { ABLATION_LAMBDA } else { 0.0 },
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub label: String,
    pub lambda: f64,
    pub use_position: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<CorpusScores>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<SliceScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    /// Split the variants were scored on.
    pub split: Split,
    pub rows: Vec<AblationRow>,
}

fn run_variant(v: &Variant, data: &PreparedData, config: &TrainConfig, split: Split, out: &Path) -> Result<EvalReport> {
    let dir = out.join(v.dir);
    let ckpt = dir.join("checkpoint");
    RunConfig::new("ablate", &dir)
        .input("data", Some(&data.dir))
        .model(ModelKind::Olra)
        .train(config.clone())
        .seed(config.seed)
        .option("variant", serde_json::json!(v.label))
        .write_creating(&dir.join(RUN_CONFIG_FILE))?;
    train_into(ModelKind::Olra, data, config, &ckpt)?;
    let model = TrainedModel::load(&ckpt)?;
    let rows = predict(&model, data, split, 1)?;
    PredictionRow::write_jsonl(&rows, &dir.join("predictions.jsonl"))?;
    let report = evaluate_predictions(&rows)?;
    report.write(&dir.join("report.json"))?;
    Ok(report)
}

/// Trains every variant, scoring each on the test split (the training split
/// when the test split is empty). A failing variant is recorded and the
/// remaining ones still run.
pub fn run_ablation(data: &PreparedData, base: &TrainConfig, out: &Path) -> Result<AblationResult> {
    let split = if data.test.is_empty() { Split::Train } else { Split::Test };
    let mut rows = Vec::new();
    for v in &VARIANTS {
        let config = v.config(base);
        log::info!("ablation variant '{}'", v.label);
        let result = run_variant(v, data, &config, split, out);
        let mut row = AblationRow {
            variant: v.dir.to_string(),
            label: v.label.to_string(),
            lambda: config.lambda,
            use_position: config.use_position,
            scores: None,
            slices: Vec::new(),
            error: None,
        };
        match result {
            Ok(report) => {
                row.scores = Some(report.corpus);
                row.slices = report.slices;
            }
            Err(e) => {
                log::error!("variant '{}' failed: {e}", v.label);
                row.error = Some(e.to_string());
            }
        }
        rows.push(row);
    }
    Ok(AblationResult { split, rows })
}

impl AblationResult {
    /// Variant rows with BLEU, METEOR, ROUGE-L and λ.
    pub fn variant_table(&self) -> Table {
        let mut t = Table::new(&["OLRA", "λ", "BLEU", "METEOR", "ROUGE-L"]);
        for r in &self.rows {
            let mut cells = vec![r.label.clone(), r.lambda.to_string()];
            match &r.scores {
                Some(s) => cells.extend([score(s.bleu), score(s.meteor), score(s.rouge_l)]),
                None => cells.extend(["failed".to_string(), "-".to_string(), "-".to_string()]),
            }
            t.push(cells);
        }
        t
    }

    /// 1/2/3-word answer slices of the full model.
    pub fn slice_table(&self) -> Table {
        let mut t = Table::new(&["OLRA", "Fraction", "Samples", "BLEU", "METEOR", "ROUGE-L"]);
        let full = self.rows.last().filter(|r| r.scores.is_some());
        for b in SLICE_BUCKETS {
            let label = format!("w/ {b}-word answers");
            match full.and_then(|r| r.slices.iter().find(|s| s.bucket == b)) {
                Some(s) => t.push(vec![
                    label,
                    score(s.fraction),
                    s.scores.count.to_string(),
                    score(s.scores.bleu),
                    score(s.scores.meteor),
                    score(s.scores.rouge_l),
                ]),
                None => t.push(vec![label, "-".into(), "0".into(), "-".into(), "-".into(), "-".into()]),
            }
        }
        t
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        push_heading(&mut out, format, 1, &format!("Ablation ({} split)", self.split));
        out.push_str(&self.variant_table().render(format));
        out.push('\n');
        push_heading(&mut out, format, 2, "Answer length (full model)");
        out.push_str(&self.slice_table().render(format));
        out
    }

    pub fn failures(&self) -> Vec<&AblationRow> {
        self.rows.iter().filter(|r| r.error.is_some()).collect()
    }
}

pub fn ablate(args: &AblateArgs) -> Result<AblationResult> {
    let base = super::commands::resolve_config(args.config.as_deref(), &args.overrides())?;
    let data = PreparedData::load(&args.data)?;
    RunConfig::new("ablate", &args.out)
        .input("data", Some(&args.data))
        .input("config", args.config.as_deref())
        .model(ModelKind::Olra)
        .train(base.clone())
        .seed(base.seed)
        .write_creating(&args.out.join(RUN_CONFIG_FILE))?;
    let result = run_ablation(&data, &base, &args.out)?;
    write_json(&args.out.join(ABLATION_FILE), &result)?;
    for (name, format) in [("ablation.md", Format::Md), ("ablation.txt", Format::Txt)] {
        let p = args.out.join(name);
        std::fs::write(&p, result.render(format)).map_err(|e| Error::io(&p, e))?;
    }
    print!("{}", result.render(Format::Txt));
    let failed = result.failures();
    if failed.is_empty() {
        Ok(result)
    } else {
        let names: Vec<&str> = failed.iter().map(|r| r.label.as_str()).collect();
        Err(Error::Invalid(format!("ablation variants failed: {}", names.join(", "))))
    }
}
