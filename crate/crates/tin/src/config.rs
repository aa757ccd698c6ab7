//! TOML run configuration. Every key is optional and defaults to
//! [`RunConfig::default`]; command-line flags override the file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tin_core::classifier::{FusionRule, TrainingMode};
use tin_core::config::RunConfig;
use tin_core::data::FeatureMode;
use tin_core::hoi::PairingThresholds;
use tin_core::suppression::{LisParams, Switches};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Joint,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionName {
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartFeatureSource {
    /// Projected from the human feature vector.
    Derived,
    /// Read from the manifest.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetSection {
    pub feature_dim: usize,
    pub part_dim: usize,
    pub hidden: usize,
    pub classifier_hidden: usize,
    pub shared_part_classifier: bool,
    pub fusion: FusionName,
    pub part_features: PartFeatureSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub lr0: f64,
    pub lr_min: f64,
    pub momentum: f64,
    pub period_epochs: usize,
    pub period_mult: f64,
    pub neg_ratio: usize,
    /// Zero steps once per image.
    pub pairs_per_step: usize,
    pub sum_batch_loss: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferSection {
    pub nis: bool,
    pub lis: bool,
    pub alpha: f64,
    pub lis_t: f64,
    pub lis_k: f64,
    pub lis_w: f64,
    pub human_threshold: f64,
    pub object_threshold: f64,
    pub gamma: f64,
    pub iou_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub train_images: usize,
    pub test_images: usize,
    pub humans: [usize; 2],
    pub objects: [usize; 2],
    pub noise: f64,
    pub tau: f64,
    pub margin: f64,
    pub p_active: f64,
    pub p_near: f64,
    pub duplicate_rate: f64,
    pub clutter_max: usize,
}

/// On-disk form of [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub mode: ModeName,
    pub d_train: Vec<String>,
    pub c_train: String,
    pub net: NetSection,
    pub train: TrainSection,
    pub infer: InferSection,
    pub synth: SynthSection,
}

impl From<&RunConfig> for ConfigFile {
    fn from(c: &RunConfig) -> Self {
        Self {
            seed: c.seed,
            mode: match c.mode {
                TrainingMode::Joint => ModeName::Joint,
                TrainingMode::Transfer => ModeName::Transfer,
            },
            d_train: c.d_train.clone(),
            c_train: c.c_train.clone(),
            net: NetSection {
                feature_dim: c.net.feature_dim,
                part_dim: c.net.part_dim,
                hidden: c.net.hidden,
                classifier_hidden: c.net.classifier_hidden,
                shared_part_classifier: c.net.shared_part_classifier,
                fusion: match c.fusion {
                    FusionRule::Mean => FusionName::Mean,
                    FusionRule::Sum => FusionName::Sum,
                },
                part_features: match c.feature_mode {
                    FeatureMode::Synthetic => PartFeatureSource::Derived,
                    FeatureMode::File => PartFeatureSource::File,
                },
            },
            train: TrainSection {
                epochs: c.train.epochs,
                lr0: c.train.lr0,
                lr_min: c.train.lr_min,
                momentum: c.train.momentum,
                period_epochs: c.train.period_epochs,
                period_mult: c.train.period_mult,
                neg_ratio: c.train.neg_ratio,
                pairs_per_step: c.train.pairs_per_step.unwrap_or(0),
                sum_batch_loss: c.train.sum_batch_loss,
            },
            infer: InferSection {
                nis: c.infer.switches.nis,
                lis: c.infer.switches.lis,
                alpha: c.infer.switches.alpha,
                lis_t: c.infer.lis.t,
                lis_k: c.infer.lis.k,
                lis_w: c.infer.lis.w,
                human_threshold: c.infer.thresholds.human,
                object_threshold: c.infer.thresholds.object,
                gamma: c.infer.gamma,
                iou_min: c.infer.iou_min,
            },
            synth: SynthSection {
                train_images: c.synth.images,
                test_images: c.test_images,
                humans: [c.synth.humans.0, c.synth.humans.1],
                objects: [c.synth.objects.0, c.synth.objects.1],
                noise: c.synth.noise,
                tau: c.synth.tau,
                margin: c.synth.margin,
                p_active: c.synth.p_active,
                p_near: c.synth.p_near,
                duplicate_rate: c.synth.duplicate_rate,
                clutter_max: c.synth.clutter_max,
            },
        }
    }
}

impl ConfigFile {
    /// Builds and validates the run configuration.
    pub fn to_run_config(&self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let (n, t, i, s) = (&self.net, &self.train, &self.infer, &self.synth);
        let lis = LisParams::new(i.lis_t, i.lis_k, i.lis_w)?;
        let cfg = RunConfig {
            seed: self.seed,
            mode: match self.mode {
                ModeName::Joint => TrainingMode::Joint,
                ModeName::Transfer => TrainingMode::Transfer,
            },
            net: tin_core::net::NetConfig {
                feature_dim: n.feature_dim,
                part_dim: n.part_dim,
                hidden: n.hidden,
                classifier_hidden: n.classifier_hidden,
                shared_part_classifier: n.shared_part_classifier,
                ..d.net
            },
            fusion: match n.fusion {
                FusionName::Mean => FusionRule::Mean,
                FusionName::Sum => FusionRule::Sum,
            },
            feature_mode: match n.part_features {
                PartFeatureSource::Derived => FeatureMode::Synthetic,
                PartFeatureSource::File => FeatureMode::File,
            },
            train: tin_core::data::TrainConfig {
                epochs: t.epochs,
                lr0: t.lr0,
                lr_min: t.lr_min,
                momentum: t.momentum,
                period_epochs: t.period_epochs,
                period_mult: t.period_mult,
                neg_ratio: t.neg_ratio,
                pairs_per_step: (t.pairs_per_step > 0).then_some(t.pairs_per_step),
                sum_batch_loss: t.sum_batch_loss,
                ..d.train
            },
            infer: tin_core::data::InferConfig {
                switches: Switches {
                    nis: i.nis,
                    lis: i.lis,
                    alpha: i.alpha,
                },
                lis,
                thresholds: PairingThresholds {
                    human: i.human_threshold,
                    object: i.object_threshold,
                },
                gamma: i.gamma,
                iou_min: i.iou_min,
            },
            synth: tin_core::data::SyntheticSpec {
                images: s.train_images,
                humans: (s.humans[0], s.humans[1]),
                objects: (s.objects[0], s.objects[1]),
                noise: s.noise,
                tau: s.tau,
                margin: s.margin,
                p_active: s.p_active,
                p_near: s.p_near,
                duplicate_rate: s.duplicate_rate,
                clutter_max: s.clutter_max,
                ..d.synth
            },
            test_images: s.test_images,
            d_train: self.d_train.clone(),
            c_train: self.c_train.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

macro_rules! section_default {
    ($($ty:ident => $field:ident),*) => {$(
        impl Default for $ty {
            fn default() -> Self {
                ConfigFile::default().$field
            }
        }
    )*};
}

impl Default for ConfigFile {
    fn default() -> Self {
        (&RunConfig::default()).into()
    }
}

section_default!(NetSection => net, TrainSection => train, InferSection => infer, SynthSection => synth);

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Flag values that replace file settings when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<ModeName>,
    pub d_train: Option<Vec<String>>,
    pub c_train: Option<String>,
    pub alpha: Option<f64>,
    pub no_nis: bool,
    pub no_lis: bool,
    pub shared_part_classifier: bool,
    pub epochs: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, f: &mut ConfigFile) {
        if let Some(s) = self.seed {
            f.seed = s;
        }
        if let Some(m) = self.mode {
            f.mode = m;
        }
        if let Some(d) = &self.d_train {
            f.d_train = d.clone();
        }
        if let Some(c) = &self.c_train {
            f.c_train = c.clone();
        }
        if let Some(a) = self.alpha {
            f.infer.alpha = a;
        }
        if let Some(e) = self.epochs {
            f.train.epochs = e;
        }
        f.infer.nis &= !self.no_nis;
        f.infer.lis &= !self.no_lis;
        f.net.shared_part_classifier |= self.shared_part_classifier;
    }
}
