//! LSTM sequence model over player actions.

pub mod checkpoint;
pub mod chunk;
pub mod lstm;
pub mod optim;
pub mod sample;
pub mod train;

pub use checkpoint::Checkpoint;
pub use chunk::{make_training_pairs, OneHotChunk, TrainingPair, ALPHABET, DEFAULT_CHUNK_LEN};
pub use lstm::{ForwardPass, LstmModel, ModelShape};
pub use optim::{clip_gradients, AdamState};
pub use sample::{sample_path, sample_path_with, DEFAULT_PATH_LENGTH};
pub use train::{next_action_accuracy, train, train_on_pairs, TrainConfig, TrainOutcome};
