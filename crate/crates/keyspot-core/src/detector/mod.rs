//! The trainable per-pixel keypoint scorer and its training loop.

mod net;
mod train;

pub use net::{to_prob, Conv, ForwardPass, Gradients, ScoreNet, ENCODER_LAYERS, NET_DOWNSAMPLE};
pub use train::{
    train, train_with_observer, Checkpoint, PairSource, StepRecord, SyntheticDataset,
    TrainConfig, TrainOutput, StepMetrics,
};
