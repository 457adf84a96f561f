//! The prepared-data directory shared by every command after `prepare`.

use std::path::{Path, PathBuf};

use crate::baselines::SideInfo;
use crate::checkpoint::read_vocab;
use crate::data::{DatasetManifest, FeatureStore, Source, INDEX_FILE};
use crate::encoders::{WordVectorTable, VISUAL_DIM, WORD_DIM};
use crate::error::{Error, Result};
use crate::models::Resources;
use crate::sample::Split;
use crate::text::Vocabulary;

pub const TRAIN_MANIFEST: &str = "manifest_train.jsonl";
pub const TEST_MANIFEST: &str = "manifest_test.jsonl";
pub const FEATURES_DIR: &str = "features";
pub const WIDE_FEATURES_DIR: &str = "features_4096";
pub const SIDE_INFO_FILE: &str = "side_info.jsonl";
pub const WORD_VECTORS_FILE: &str = "word_vectors.txt";
pub const SKIPPED_FILE: &str = "skipped.jsonl";
pub const SUMMARY_FILE: &str = "prepare_summary.json";
pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Everything `prepare` wrote, loaded back.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dir: PathBuf,
    pub train: DatasetManifest,
    pub test: DatasetManifest,
    pub vocab: Vocabulary,
    pub visual: FeatureStore,
    pub visual_wide: Option<FeatureStore>,
    pub side: SideInfo,
    pub words: WordVectorTable,
}

fn manifest_source(dir: &Path) -> Result<Source> {
    let summary: serde_json::Value = crate::checkpoint::read_json(&dir.join(SUMMARY_FILE))?;
    let name = summary["dataset"].as_str().unwrap_or("toy");
    name.parse()
}

impl PreparedData {
    pub fn load(dir: &Path) -> Result<PreparedData> {
        if !dir.join(TRAIN_MANIFEST).exists() {
            return Err(Error::Invalid(format!(
                "{} is not a prepared data directory (run prepare first)",
                dir.display()
            )));
        }
        let source = manifest_source(dir)?;
        let train = DatasetManifest::read_jsonl(&dir.join(TRAIN_MANIFEST), "train", source)?;
        let test = DatasetManifest::read_jsonl(&dir.join(TEST_MANIFEST), "test", source)?;
        let vocab = read_vocab(&dir.join(crate::checkpoint::VOCAB_FILE))?;
        let features = dir.join(FEATURES_DIR);
        let visual = if features.join(INDEX_FILE).exists() {
            FeatureStore::read(&features)?
        } else {
            log::warn!("{} has no visual feature store", dir.display());
            FeatureStore::new(VISUAL_DIM)
        };
        let wide = dir.join(WIDE_FEATURES_DIR);
        let visual_wide = if wide.join(INDEX_FILE).exists() {
            Some(FeatureStore::read(&wide)?)
        } else {
            None
        };
        let side_path = dir.join(SIDE_INFO_FILE);
        let side = if side_path.exists() {
            SideInfo::read_jsonl(&side_path)?
        } else {
            SideInfo::default()
        };
        let wv_path = dir.join(WORD_VECTORS_FILE);
        let words = if wv_path.exists() {
            WordVectorTable::read(&wv_path)?
        } else {
            WordVectorTable::new(WORD_DIM)
        };
        Ok(PreparedData {
            dir: dir.to_path_buf(),
            train,
            test,
            vocab,
            visual,
            visual_wide,
            side,
            words,
        })
    }

    pub fn resources(&self) -> Resources<'_> {
        Resources {
            visual: &self.visual,
            visual_wide: self.visual_wide.as_ref(),
            words: &self.words,
            side: &self.side,
        }
    }

    pub fn split(&self, split: Split) -> &DatasetManifest {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}
