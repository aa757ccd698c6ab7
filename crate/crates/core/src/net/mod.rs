//! The interactiveness discriminator and the stream building blocks it
//! shares with the HOI classifier.

mod discriminator;
mod streams;

pub use discriminator::{
    aggregate_parts, attention_reweight, loss_d, DForward, DLoss, DScores, Discriminator, NetConfig,
};
pub use streams::{
    FeatureBundle, HeadTrace, InstanceTrunk, MlpHead, SpatialConfig, SpatialStream, SpatialTrace, StreamOutputs, TrunkTrace,
};
