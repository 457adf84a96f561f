//! prepare, train, generate, evaluate and report.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::data_dir::*;
use super::render::{render_report, Format};
use super::{GenerateArgs, EvaluateArgs, PrepareArgs, ReportArgs, RunConfig, TrainArgs};
use crate::baselines::SideInfo;
use crate::checkpoint::{read_json, write_json, write_vocab, VOCAB_FILE};
use crate::data::{
    ingest_stvqa, ingest_textvqa, make_toy_split, DatasetManifest, FeatureStore, Ingested, Source,
};
use crate::encoders::WordVectorTable;
use crate::error::{Error, Result};
use crate::metrics::{evaluate_predictions, EvalReport, PredictionRow};
use crate::models::{train_model, ModelKind, TrainedModel};
use crate::baselines::GRNN_INPUT_DIM;
use crate::olra::{write_log_jsonl, EpochLog, TrainConfig};
use crate::sample::Split;
use crate::text::{build_vocab, decode_ids};

pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
/// Toy test split size relative to `--n`.
const TOY_TEST_FRACTION: usize = 4;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Path of the run config written beside a file output.
pub fn run_config_beside(out: &Path) -> PathBuf {
    out.with_extension(RUN_CONFIG_FILE)
}

fn first_existing(dir: &Path, names: &[String]) -> Result<PathBuf> {
    names
        .iter()
        .map(|n| dir.join(n))
        .find(|p| p.exists())
        .ok_or_else(|| Error::Invalid(format!("none of {} found in {}", names.join(", "), dir.display())))
}

/// Annotation and OCR file names tried for one split, in order.
pub fn official_file_names(source: Source, split: Split) -> (Vec<String>, Vec<String>) {
    let s = split.to_string();
    match source {
        Source::Stvqa => (
            vec![format!("{s}_annotations.json"), format!("{s}_task_3.json")],
            vec![format!("{s}_ocr.json")],
        ),
        Source::Textvqa => {
            let release = if split == Split::Train { "train" } else { "val" };
            (
                vec![format!("{s}_annotations.json"), format!("TextVQA_0.5.1_{release}.json")],
                vec![format!("{s}_rosetta.json"), format!("TextVQA_Rosetta_OCR_v0.2_{release}.json")],
            )
        }
        Source::Toy => (Vec::new(), Vec::new()),
    }
}

/// Runs the official-format reader on one split of `input`.
pub fn ingest_official(source: Source, input: &Path, split: Split) -> Result<Ingested> {
    let (ann_names, ocr_names) = official_file_names(source, split);
    let ann = first_existing(input, &ann_names)?;
    let ocr = first_existing(input, &ocr_names)?;
    log::info!("ingesting {} with {}", ann.display(), ocr.display());
    match source {
        Source::Stvqa => ingest_stvqa(&ann, &ocr, split),
        Source::Textvqa => ingest_textvqa(&ann, &ocr, split),
        Source::Toy => unreachable!("toy data is generated"),
    }
}

fn merge_stores(a: &FeatureStore, b: &FeatureStore) -> Result<FeatureStore> {
    let mut out = FeatureStore::new(a.dim());
    for s in [a, b] {
        for r in s.records() {
            if !out.contains(&r.image_id) {
                out.insert(r.image_id.clone(), s.get(&r.image_id).expect("indexed record"))?;
            }
        }
    }
    Ok(out)
}

fn split_summary(m: &DatasetManifest, skipped: &Ingested) -> serde_json::Value {
    json!({
        "questions": m.len(),
        "images": m.image_count(),
        "answer_fractions": m.answer_length_fractions(),
        "skipped": skipped.skipped.len(),
        "skip_reasons": skipped.skip_summary(),
    })
}

fn coverage(store: &FeatureStore, manifests: [&DatasetManifest; 2]) -> serde_json::Value {
    let missing: usize = manifests
        .iter()
        .flat_map(|m| &m.samples)
        .filter(|s| !store.contains(&s.image_id))
        .count();
    json!({"dim": store.dim(), "records": store.len(), "samples_without_features": missing})
}

pub fn prepare(args: &PrepareArgs) -> Result<()> {
    create_dir(&args.out)?;
    let (mut train, mut test, mut visual, mut wide, side) = match args.dataset {
        Source::Toy => {
            let n = args.n.unwrap_or(64).max(1);
            let tr = make_toy_split(args.seed, n, Split::Train);
            let te = make_toy_split(args.seed, (n / TOY_TEST_FRACTION).max(1), Split::Test);
            let visual = merge_stores(&tr.store, &te.store)?;
            let wide = merge_stores(&tr.visual_store(GRNN_INPUT_DIM), &te.visual_store(GRNN_INPUT_DIM))?;
            let mut side = tr.side_info();
            side.extend(te.side_info());
            let empty = |m: DatasetManifest| Ingested { manifest: m, skipped: Vec::new() };
            (empty(tr.manifest), empty(te.manifest), Some(visual), Some(wide), Some(side))
        }
        source => {
            let input = args
                .input
                .as_deref()
                .ok_or_else(|| Error::Invalid(format!("--input is required for --dataset {}", args.dataset_name())))?;
            let train = ingest_official(source, input, Split::Train)?;
            let test = match ingest_official(source, input, Split::Test) {
                Ok(t) => t,
                Err(Error::Invalid(msg)) => {
                    log::warn!("no test split: {msg}");
                    Ingested {
                        manifest: DatasetManifest { name: format!("{}-test", args.dataset_name()), source, samples: Vec::new() },
                        skipped: Vec::new(),
                    }
                }
                Err(e) => return Err(e),
            };
            let side_path = input.join(SIDE_INFO_FILE);
            let side = side_path.exists().then(|| SideInfo::read_jsonl(&side_path)).transpose()?;
            let wv = input.join(WORD_VECTORS_FILE);
            if wv.exists() {
                WordVectorTable::read(&wv)?.write(&args.out.join(WORD_VECTORS_FILE))?;
            }
            (train, test, None, None, side)
        }
    };
    if let Some(n) = args.n.filter(|_| args.dataset != Source::Toy) {
        train.manifest.samples.truncate(n);
        test.manifest.samples.truncate(n);
    }
    for dir in &args.features {
        let store = FeatureStore::read(dir)?;
        if store.dim() == GRNN_INPUT_DIM {
            wide = Some(store);
        } else {
            visual = Some(store);
        }
    }

    train.manifest.write_jsonl(&args.out.join(TRAIN_MANIFEST))?;
    test.manifest.write_jsonl(&args.out.join(TEST_MANIFEST))?;
    write_text(&args.out.join("skipped_train.jsonl"), &train.skipped_jsonl()?)?;
    write_text(&args.out.join("skipped_test.jsonl"), &test.skipped_jsonl()?)?;
    let min_count = if args.dataset == Source::Toy { 1 } else { 2 };
    let vocab = build_vocab(train.manifest.samples.iter().map(|s| &s.question), min_count);
    write_vocab(&args.out.join(VOCAB_FILE), &vocab)?;
    let manifests = [&train.manifest, &test.manifest];
    let mut features = serde_json::Map::new();
    if let Some(v) = &visual {
        v.write(&args.out.join(FEATURES_DIR))?;
        features.insert(FEATURES_DIR.into(), coverage(v, manifests));
    }
    if let Some(w) = &wide {
        w.write(&args.out.join(WIDE_FEATURES_DIR))?;
        features.insert(WIDE_FEATURES_DIR.into(), coverage(w, manifests));
    }
    if let Some(s) = &side {
        s.write_jsonl(&args.out.join(SIDE_INFO_FILE))?;
    }
    let summary = json!({
        "dataset": args.dataset_name(),
        "train": split_summary(&train.manifest, &train),
        "test": split_summary(&test.manifest, &test),
        "vocab_size": vocab.len(),
        "vocab_min_count": min_count,
        "features": features,
        "side_info_records": side.as_ref().map_or(0, SideInfo::len),
    });
    write_json(&args.out.join(SUMMARY_FILE), &summary)?;
    log::info!(
        "prepared {} train / {} test questions in {}",
        train.manifest.len(),
        test.manifest.len(),
        args.out.display()
    );
    RunConfig::new("prepare", &args.out)
        .dataset(args.dataset_name())
        .input("input", args.input.as_deref())
        .inputs("features", &args.features)
        .seed(args.seed)
        .option("n", json!(args.n))
        .write(&args.out.join(RUN_CONFIG_FILE))
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve_config(file: Option<&Path>, overrides: &super::TrainOverrides) -> Result<TrainConfig> {
    let mut c = match file {
        Some(p) => read_json::<TrainConfig>(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = overrides.seed {
        c.seed = s;
    }
    if let Some(l) = overrides.lambda {
        c.lambda = l;
    }
    if overrides.no_position {
        c.use_position = false;
    }
    if let Some(e) = overrides.epochs {
        c.epochs = e;
    }
    if let Some(lr) = overrides.learning_rate {
        c.learning_rate = lr;
    }
    c.validate()?;
    Ok(c)
}

/// Trains `kind` and keeps `out` holding the latest checkpoint and the log
/// so far after every epoch.
pub fn train_into(kind: ModelKind, data: &PreparedData, config: &TrainConfig, out: &Path) -> Result<(TrainedModel, Vec<EpochLog>)> {
    create_dir(out)?;
    let mut log_so_far: Vec<EpochLog> = Vec::new();
    let (model, log) = train_model(kind, &data.train, data.resources(), &data.vocab, config, |line, model| {
        model.save(out)?;
        log_so_far.push(*line);
        write_text(&out.join(TRAIN_LOG_FILE), &write_log_jsonl(&log_so_far)?)
    })?;
    Ok((model, log))
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = resolve_config(args.config.as_deref(), &args.overrides)?;
    let data = PreparedData::load(&args.data)?;
    create_dir(&args.out)?;
    RunConfig::new("train", &args.out)
        .input("data", Some(&args.data))
        .input("config", args.config.as_deref())
        .model(args.model)
        .train(config.clone())
        .seed(config.seed)
        .write(&args.out.join(RUN_CONFIG_FILE))?;
    train_into(args.model, &data, &config, &args.out)?;
    Ok(())
}

/// One prediction row per sample of `split`, in manifest order.
pub fn predict(model: &TrainedModel, data: &PreparedData, split: Split, beam: usize) -> Result<Vec<PredictionRow>> {
    let manifest = data.split(split);
    if manifest.is_empty() {
        return Err(Error::Invalid(format!("the {split} split of {} is empty", data.dir.display())));
    }
    manifest
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ids = model.generate(s, i, data.resources(), beam.max(1))?;
            Ok(PredictionRow {
                image_id: s.image_id.clone(),
                ocr_text: s.ocr.text.clone(),
                generated: decode_ids(&ids, &model.vocab)?.join(" "),
                references: vec![s.question.join(" ")],
                answer_word_count: s.answer_word_count(),
            })
        })
        .collect()
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let model = TrainedModel::load(&args.checkpoint)?;
    let data = PreparedData::load(&args.data)?;
    let rows = predict(&model, &data, args.split, args.beam)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    PredictionRow::write_jsonl(&rows, &args.out)?;
    log::info!("wrote {} predictions to {}", rows.len(), args.out.display());
    RunConfig::new("generate", &args.out)
        .input("checkpoint", Some(&args.checkpoint))
        .input("data", Some(&args.data))
        .model(model.kind)
        .train(model.config.clone())
        .option("beam", json!(args.beam.max(1)))
        .option("split", json!(args.split))
        .write(&run_config_beside(&args.out))
}

/// Human-readable table written beside a report file.
pub fn table_beside(out: &Path) -> PathBuf {
    out.with_extension("table.txt")
}

pub fn evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let rows = PredictionRow::read_jsonl(&args.pred)?;
    let report = evaluate_predictions(&rows)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    report.write(&args.out)?;
    let table = render_report(&report, Format::Txt);
    write_text(&table_beside(&args.out), &table)?;
    let corpus = super::render::corpus_table(&report.corpus).render(Format::Txt);
    println!("{corpus}");
    RunConfig::new("evaluate", &args.out)
        .input("pred", Some(&args.pred))
        .write(&run_config_beside(&args.out))?;
    Ok(report)
}

pub fn report(args: &ReportArgs) -> Result<String> {
    let report = EvalReport::read(&args.input)?;
    let doc = render_report(&report, args.format);
    match &args.out {
        Some(out) => {
            write_text(out, &doc)?;
            RunConfig::new("report", out)
                .input("in", Some(&args.input))
                .option("format", json!(args.format))
                .write(&run_config_beside(out))?;
        }
        None => print!("{doc}"),
    }
    Ok(doc)
}
