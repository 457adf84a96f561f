pub mod baselines;
pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod encoders;
pub mod error;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod olra;
pub mod sample;
pub mod text;

pub use error::{Error, Result};
