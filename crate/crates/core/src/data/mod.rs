//! Dataset ingestion, the canonical JSONL manifest, the synthetic toy
//! dataset and the on-disk feature store.

mod manifest;
mod matching;
mod official;
mod store;
mod toy;

pub use manifest::{DatasetManifest, Ingested, SkipEntry, Source};
pub use matching::answer_matches_ocr;
pub use official::{ingest_stvqa, ingest_textvqa};
pub use store::{FeatureStore, StoreRecord, INDEX_FILE, PAYLOAD_FILE};
pub use toy::{make_toy_dataset, make_toy_split, ToyDataset};

pub(crate) use store::{read_f32_le, write_f32_le};
