//! Command-line surface: one subcommand per pipeline stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::checkpoint::write_json;
use crate::data::Source;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::olra::TrainConfig;
use crate::sample::Split;

pub mod ablate;
pub mod commands;
pub mod data_dir;
pub mod render;

pub use ablate::{run_ablation, AblationResult, AblationRow, Variant, ABLATION_LAMBDA, VARIANTS};
pub use commands::{predict, resolve_config, train_into};
pub use data_dir::PreparedData;
pub use render::{render_comparison, render_report, ComparisonRow, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "textvqg", version, about = "Question generation for OCR tokens in images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a dataset (or generate the toy one) into a prepared-data directory.
    Prepare(PrepareArgs),
    /// Train one model on a prepared-data directory.
    Train(TrainArgs),
    /// Generate questions for a split with a trained checkpoint.
    Generate(GenerateArgs),
    /// Score a prediction file.
    Evaluate(EvaluateArgs),
    /// Train and compare the three OLRA variants.
    Ablate(AblateArgs),
    /// Render an evaluation report as markdown or plain text.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// stvqa, textvqa or toy.
    #[arg(long)]
    pub dataset: Source,
    /// Directory holding the official annotation and OCR files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Feature store directory; repeat to pass both a 512-d and a 4096-d store.
    #[arg(long)]
    pub features: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Toy training-set size (default 64); caps each split of official data.
    #[arg(long)]
    pub n: Option<usize>,
}

impl PrepareArgs {
    pub fn dataset_name(&self) -> &'static str {
        match self.dataset {
            Source::Stvqa => "stvqa",
            Source::Textvqa => "textvqa",
            Source::Toy => "toy",
        }
    }
}

/// Flags layered over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainOverrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Zero the positional feature.
    #[arg(long)]
    pub no_position: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// olra, melm, seq2seq or grnn.
    #[arg(long)]
    pub model: ModelKind,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file with TrainConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: TrainOverrides,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Beam width; 1 is greedy decoding.
    #[arg(long, default_value_t = 1)]
    pub beam: usize,
    #[arg(long, default_value = "test")]
    pub split: Split,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

impl AblateArgs {
    pub(crate) fn overrides(&self) -> TrainOverrides {
        TrainOverrides {
            seed: Some(self.seed),
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            ..TrainOverrides::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// md or txt.
    #[arg(long)]
    pub format: Format,
    /// Write the document here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The fully resolved settings of one run, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub options: BTreeMap<String, serde_json::Value>,
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    pub fn new(command: &str, output: &Path) -> Self {
        RunConfig {
            command: command.to_string(),
            dataset: None,
            inputs: BTreeMap::new(),
            model: None,
            train: None,
            output: path_string(output),
            seed: None,
            options: BTreeMap::new(),
        }
    }

    pub fn dataset(mut self, name: &str) -> Self {
        self.dataset = Some(name.to_string());
        self
    }

    pub fn input(mut self, name: &str, path: Option<&Path>) -> Self {
        if let Some(p) = path {
            self.inputs.insert(name.to_string(), path_string(p).into());
        }
        self
    }

    pub fn inputs(mut self, name: &str, paths: &[PathBuf]) -> Self {
        if !paths.is_empty() {
            let v: Vec<String> = paths.iter().map(|p| path_string(p)).collect();
            self.inputs.insert(name.to_string(), v.into());
        }
        self
    }

    pub fn model(mut self, kind: ModelKind) -> Self {
        self.model = Some(kind);
        self
    }

    pub fn train(mut self, config: TrainConfig) -> Self {
        self.train = Some(config);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn option(mut self, name: &str, value: serde_json::Value) -> Self {
        if !value.is_null() {
            self.options.insert(name.to_string(), value);
        }
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// As [`RunConfig::write`], creating the parent directory first.
    pub fn write_creating(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.write(path)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Prepare(a) => commands::prepare(a),
        Command::Train(a) => commands::train(a),
        Command::Generate(a) => commands::generate(a),
        Command::Evaluate(a) => commands::evaluate(a).map(|_| ()),
        Command::Ablate(a) => ablate::ablate(a).map(|_| ()),
        Command::Report(a) => commands::report(a).map(|_| ()),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Invalid(e.to_string()))?;
    run(&cli)
}
