//! The coupled encoder with its decoder, first-order and skip-gram heads.

mod config;
mod io;
mod objective;
mod optim;
mod params;
mod train;

pub(crate) use config::sigmoid;
pub use config::{Activation, ModelConfig, OptimizerKind, UpdateMode};
pub use io::{export_embeddings, load_checkpoint, load_embeddings, save_checkpoint, Embeddings};
pub use objective::{
    decode, decoder_forward, encode, encode_all, encoder_forward, first_order_loss,
    reconstruction_loss, regularizer, skipgram_loss, BatchBundle, LossBreakdown, LossWeights,
    Objective,
};
pub use optim::Optimizer;
pub use params::{Dense, ModelParams, TensorGroup};
pub use train::{initial_params, train, train_from, EpochLog, TrainOutput, TrainingSetup};
