//! OCR-consistency, the Ask decoder, the multitask objective and training.

mod config;
mod inputs;
mod model;
mod train;

pub use config::{ModelDims, TrainConfig};
pub use inputs::{prepare_samples, OlraInput, PreparedSample, Stores};
pub use model::{
    consistency_loss, generate_question, generate_question_beam, question_nll, reconstruct_ocr,
    total_loss, FeatureBundle, LossBreakdown, OlraModel,
};
pub use train::{epoch_order, train_olra, train_prepared, write_log_jsonl, EpochLog, TrainOutcome};

pub(crate) use train::run_epochs;
