//! Chunked behavior-cloning policy: network, training loop, checkpoints and
//! closed-loop execution.

mod checkpoint;
mod controller;
pub mod mlp;
mod schedule;
mod train;

pub use checkpoint::{Checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
pub use controller::ChunkedController;
pub use mlp::{loss_masked_l1, Dense, Mlp};
pub use schedule::LrSchedule;
pub use train::{
    batch_gradient, predict_chunk, train, AdamConfig, CurvePoint, PolicyConfig, PolicyStats, TrainConfig, TrainOutput,
    TrainingSet,
};
