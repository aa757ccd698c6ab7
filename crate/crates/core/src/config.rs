//! Run-wide configuration with the default hyperparameters.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::classifier::{FusionRule, TrainingMode};
use crate::data::{FeatureMode, FeatureProviderSpec, InferConfig, SyntheticSpec, TrainConfig, TransferMode, Vocabulary};
use crate::net::NetConfig;
use crate::suppression::LisParams;
use crate::{Error, Result};

/// Pipeline stages that draw randomness. Each gets `root seed + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SynthTrain,
    SynthTest,
    Features,
    InitJoint,
    InitTransfer,
    Shuffle,
}

impl Stage {
    fn offset(self) -> u64 {
        match self {
            Stage::SynthTrain => 1,
            Stage::SynthTest => 2,
            Stage::Features => 3,
            Stage::InitJoint => 4,
            Stage::InitTransfer => 5,
            Stage::Shuffle => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: TrainingMode,
    pub net: NetConfig,
    pub fusion: FusionRule,
    /// Where part features come from.
    pub feature_mode: FeatureMode,
    pub train: TrainConfig,
    pub infer: InferConfig,
    /// Generator settings shared by both vocabularies.
    pub synth: SyntheticSpec,
    pub test_images: usize,
    pub d_train: Vec<String>,
    pub c_train: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mode: TrainingMode::Joint,
            net: NetConfig::default(),
            fusion: FusionRule::Mean,
            feature_mode: FeatureMode::Synthetic,
            train: TrainConfig::default(),
            infer: InferConfig::default(),
            synth: SyntheticSpec::default(),
            test_images: 100,
            d_train: vec!["A".to_string()],
            c_train: "A".to_string(),
        }
    }
}

impl RunConfig {
    pub fn seed_for(&self, stage: Stage) -> u64 {
        self.seed.wrapping_add(stage.offset())
    }

    /// Dataset roles; the test set is always the classifier's dataset.
    pub fn transfer_mode(&self) -> TransferMode {
        TransferMode {
            d_train_sets: self.d_train.clone(),
            c_train_set: self.c_train.clone(),
            test_set: self.c_train.clone(),
        }
    }

    pub fn feature_spec(&self) -> FeatureProviderSpec {
        FeatureProviderSpec {
            mode: self.feature_mode,
            feature_dim: self.net.feature_dim,
            part_dim: self.net.part_dim,
            seed: self.seed_for(Stage::Features),
        }
    }

    /// Training settings with the shuffle seed and shared geometry filled in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed_for(Stage::Shuffle),
            thresholds: self.infer.thresholds,
            gamma: self.infer.gamma,
            iou_min: self.infer.iou_min,
            ..self.train
        }
    }

    /// Generator settings for one split of a synthetic dataset.
    pub fn synth_spec(&self, vocabulary: Vocabulary, test: bool) -> SyntheticSpec {
        let vocab_offset = match vocabulary {
            Vocabulary::A => 0,
            Vocabulary::B => 10_000_000,
        };
        SyntheticSpec {
            images: if test { self.test_images } else { self.synth.images },
            first_image_id: vocab_offset + if test { 1_000_000 } else { 0 },
            feature_dim: self.net.feature_dim,
            vocabulary,
            ..self.synth.clone()
        }
    }

    /// Seed for one split; the vocabulary perturbs it so A and B differ.
    pub fn synth_seed(&self, vocabulary: Vocabulary, test: bool) -> u64 {
        let stage = if test { Stage::SynthTest } else { Stage::SynthTrain };
        let v = match vocabulary {
            Vocabulary::A => 0,
            Vocabulary::B => 1 << 32,
        };
        self.seed_for(stage) ^ v
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.train;
        if t.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if !(t.lr0 > t.lr_min && t.lr_min >= 0.0) {
            return Err(Error::Config(format!("need lr0 > lr_min >= 0, got {} and {}", t.lr0, t.lr_min)));
        }
        if !(0.0..1.0).contains(&t.momentum) {
            return Err(Error::Config(format!("momentum {} outside [0, 1)", t.momentum)));
        }
        let a = self.infer.switches.alpha;
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
        }
        LisParams::new(self.infer.lis.t, self.infer.lis.k, self.infer.lis.w)?;
        let th = self.infer.thresholds;
        if !(0.0..=1.0).contains(&th.human) || !(0.0..=1.0).contains(&th.object) {
            return Err(Error::Config("detection thresholds must be in [0, 1]".into()));
        }
        if !(self.infer.gamma >= 0.0) {
            return Err(Error::Config("gamma must be non-negative".into()));
        }
        self.synth.validate()?;
        self.transfer_mode().validate(self.mode)
    }
}
