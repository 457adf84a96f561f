//! Visual, OCR-token and positional features, and their fusion into the
//! joint representation that seeds the question decoder.

mod features;
mod fusion;
mod ocr;
mod positional;
mod word_vectors;

pub use features::{
    JointFeature, PosFeature, TokenFeature, VisualFeature, FUSED_DIM, JOINT_DIM, POS_DIM,
    TOKEN_DIM, VISUAL_DIM, WORD_DIM,
};
pub use fusion::{concat_features, fuse, Fusion, FusionTrace};
pub use ocr::{encode_ocr, words_to_mat, OcrEncoder, OcrEncoderTrace};
pub use positional::build_positional;
pub use word_vectors::{embed_token_words, WordVectorTable};
