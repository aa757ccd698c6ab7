//! Dataset records, the synthetic generator, feature provision, training
//! and inference.

mod features;
mod infer;
mod manifest;
pub mod synthetic;
mod train;

pub use features::{FeatureMode, FeatureProvider, FeatureProviderSpec};
pub use infer::{
    evaluate, gt_records, infer_dataset, interactive_gt_records, prediction_records, EvalSummary, InferConfig, PairPrediction,
};
pub use manifest::{DatasetManifest, GtIndexPair, ImageRecord};
pub use synthetic::{synthetic_generate, SceneTruth, SyntheticSpec, Vocabulary};
pub use train::{
    train_classifier, train_discriminator, train_joint, EpochLog, PreparedDataset, PreparedImage, TinModel, TrainConfig,
    TransferMode,
};
