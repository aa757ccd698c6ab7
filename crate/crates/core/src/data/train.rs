use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::FeatureProvider;
use super::manifest::DatasetManifest;
use crate::classifier::{share_trunks, ClassifierConfig, FusionRule, HoiClassifier, TrainingMode};
use crate::hoi::{balance_sampling, HoiCategoryTable, PairCandidate, PairingThresholds};
use crate::net::{Discriminator, NetConfig};
use crate::nn::{LrSchedule, ParamId, ParamStore, Sgd};
use crate::{Error, Result};

/// Discriminator plus classifier over one parameter store.
#[derive(Debug, Clone, PartialEq)]
pub struct TinModel {
    pub store: ParamStore,
    pub d: Discriminator,
    pub c: HoiClassifier,
    /// Label space of the classifier.
    pub categories: HoiCategoryTable,
    pub mode: TrainingMode,
}

impl TinModel {
    pub fn new(
        net: NetConfig,
        fusion: FusionRule,
        categories: HoiCategoryTable,
        mode: TrainingMode,
        seed: u64,
    ) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::Config("classifier needs at least one category".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let d = Discriminator::new(&mut store, "d", net, &mut rng)?;
        let c_cfg = ClassifierConfig {
            feature_dim: net.feature_dim,
            hidden: net.hidden,
            num_categories: categories.len(),
            fusion,
            spatial: net.spatial,
        };
        let c = HoiClassifier::new(&mut store, "c", c_cfg, share_trunks(&d, mode), &mut rng)?;
        Ok(Self {
            store,
            d,
            c,
            categories,
            mode,
        })
    }

    /// Parameters updated by classifier-only training.
    pub fn c_params(&self) -> Vec<ParamId> {
        self.c.own_params()
    }

    pub fn d_params(&self) -> Vec<ParamId> {
        self.d.params()
    }

    /// Multi-hot target over the classifier categories.
    pub fn targets(&self, hois: &[u32]) -> Vec<f64> {
        let mut t = vec![0.0; self.categories.len()];
        for &id in hois {
            if let Some(i) = self.categories.index_of(id) {
                t[i] = 1.0;
            }
        }
        t
    }
}

/// Optimization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub lr_min: f64,
    pub momentum: f64,
    /// First restart period, in epochs.
    pub period_epochs: usize,
    pub period_mult: f64,
    /// Negatives sampled per positive in each image.
    pub neg_ratio: usize,
    /// Sum (rather than average) the per-pair losses of an image.
    pub sum_batch_loss: bool,
    /// Pairs per optimizer step; `None` steps once per image.
    pub pairs_per_step: Option<usize>,
    pub seed: u64,
    pub thresholds: PairingThresholds,
    pub gamma: f64,
    pub iou_min: f64,
}

/// Per-pair steps at a higher rate with one cosine period over the run;
/// suited to the small synthetic datasets.
impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25,
            lr0: 1e-3,
            lr_min: 1e-6,
            momentum: 0.9,
            period_epochs: 25,
            period_mult: 2.0,
            neg_ratio: 4,
            sum_batch_loss: true,
            pairs_per_step: Some(1),
            seed: 0,
            thresholds: PairingThresholds::default(),
            gamma: 0.6,
            iou_min: 0.5,
        }
    }
}

impl TrainConfig {
    /// Large-scale settings: one step per image at `lr0 = 1e-4`, restarting
    /// every 5 epochs.
    pub fn large_scale() -> Self {
        Self {
            lr0: 1e-4,
            period_epochs: 5,
            pairs_per_step: None,
            ..Self::default()
        }
    }
}

/// The labelled edges of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedImage {
    pub index: usize,
    pub pairs: Vec<PairCandidate>,
    pub labels: Vec<bool>,
}

/// A dataset with its edges paired and labelled once up front.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset<'a> {
    pub manifest: &'a DatasetManifest,
    pub images: Vec<PreparedImage>,
}

impl<'a> PreparedDataset<'a> {
    pub fn new(manifest: &'a DatasetManifest, cfg: &TrainConfig) -> Self {
        let images = manifest
            .images
            .iter()
            .enumerate()
            .map(|(index, img)| {
                let pairs = img.labelled_pairs(&manifest.categories, cfg.thresholds, cfg.gamma, cfg.iou_min);
                let labels = pairs.iter().map(|p| p.gt_interactive == Some(true)).collect();
                PreparedImage { index, pairs, labels }
            })
            .collect();
        Self { manifest, images }
    }

    pub fn num_pairs(&self) -> usize {
        self.images.iter().map(|i| i.pairs.len()).sum()
    }
}

/// Mean per-pair losses over one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss_d: f64,
    /// Instance, aggregated-part and consistency terms of `loss_d`.
    pub loss_d_terms: [f64; 3],
    pub loss_c: f64,
    /// Number of sampled pairs.
    pub samples: usize,
    /// Learning rate at the last step of the epoch.
    pub lr: f64,
}

impl EpochLog {
    pub fn total(&self) -> f64 {
        self.loss_d + self.loss_c
    }
}

#[derive(Clone, Copy)]
enum Phase {
    Joint,
    DOnly,
    COnly,
}

fn run_loop<F>(
    model: &mut TinModel,
    sets: &[&PreparedDataset<'_>],
    provider: &FeatureProvider,
    cfg: &TrainConfig,
    phase: Phase,
    mut on_epoch: F,
) -> Result<Vec<EpochLog>>
where
    F: FnMut(&EpochLog),
{
    let order: Vec<(usize, usize)> = sets
        .iter()
        .enumerate()
        .flat_map(|(s, set)| (0..set.images.len()).map(move |i| (s, i)))
        .filter(|&(s, i)| !sets[s].images[i].pairs.is_empty())
        .collect();
    if order.is_empty() {
        return Err(Error::Config("no training pairs".into()));
    }
    let steps_per_epoch = order.len();
    let schedule = LrSchedule::new(cfg.lr0, cfg.lr_min, cfg.period_epochs.max(1) * steps_per_epoch, cfg.period_mult)?;
    let ids = match phase {
        Phase::Joint => {
            let mut ids = model.d_params();
            ids.extend(model.c_params());
            ids
        }
        Phase::DOnly => model.d_params(),
        Phase::COnly => model.c_params(),
    };
    let mut sgd = Sgd::new(&model.store, cfg.momentum);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut logs = Vec::with_capacity(cfg.epochs);
    let mut t = 0usize;
    for epoch in 0..cfg.epochs {
        let mut epoch_order = order.clone();
        epoch_order.shuffle(&mut shuffle_rng);
        let (mut sum_d, mut sum_c, mut samples, mut lr) = (0.0, 0.0, 0usize, cfg.lr0);
        let mut terms = [0.0; 3];
        for (s, i) in epoch_order {
            let set = sets[s];
            let prep = &set.images[i];
            let image = &set.manifest.images[prep.index];
            let batch_seed = cfg.seed ^ ((epoch as u64) << 40) ^ ((s as u64) << 32) ^ i as u64;
            let batch = balance_sampling(&prep.labels, cfg.neg_ratio, batch_seed);
            let weight = if cfg.sum_batch_loss { 1.0 } else { 1.0 / batch.len() as f64 };
            let chunk = cfg.pairs_per_step.unwrap_or(batch.len()).max(1);
            for part in batch.chunks(chunk) {
                model.store.zero_grad();
                for &k in part {
                    let pair = &prep.pairs[k];
                    let bundle = provider.bundle(image, pair)?;
                    if matches!(phase, Phase::Joint | Phase::DOnly) {
                        let l = model.d.train_step(&mut model.store, &bundle, prep.labels[k], weight);
                        sum_d += l.total;
                        terms[0] += l.l_h;
                        terms[1] += l.l_hp;
                        terms[2] += l.l_c;
                    }
                    if matches!(phase, Phase::Joint | Phase::COnly) {
                        let targets = model.targets(pair.gt_hois.as_deref().unwrap_or(&[]));
                        sum_c += model.c.train_step(&mut model.store, &bundle, &targets, weight);
                    }
                }
                lr = schedule.lr(t);
                sgd.step_only(&mut model.store, lr, &ids);
            }
            t += 1;
            samples += batch.len();
        }
        let n = samples.max(1) as f64;
        let log = EpochLog {
            epoch,
            loss_d: sum_d / n,
            loss_d_terms: terms.map(|v| v / n),
            loss_c: sum_c / n,
            samples,
            lr,
        };
        if !(log.loss_d.is_finite() && log.loss_c.is_finite()) {
            return Err(Error::Config(format!("training diverged at epoch {epoch}")));
        }
        on_epoch(&log);
        logs.push(log);
    }
    Ok(logs)
}

/// One loop over `L_C + L_D` on a single dataset.
pub fn train_joint<F: FnMut(&EpochLog)>(
    model: &mut TinModel,
    data: &PreparedDataset<'_>,
    provider: &FeatureProvider,
    cfg: &TrainConfig,
    on_epoch: F,
) -> Result<Vec<EpochLog>> {
    if model.mode != TrainingMode::Joint {
        return Err(Error::Config("joint training needs a model built in joint mode".into()));
    }
    check_vocabulary(model, data.manifest)?;
    run_loop(model, &[data], provider, cfg, Phase::Joint, on_epoch)
}

/// Trains only the discriminator, on binary labels from every dataset.
pub fn train_discriminator<F: FnMut(&EpochLog)>(
    model: &mut TinModel,
    sets: &[&PreparedDataset<'_>],
    provider: &FeatureProvider,
    cfg: &TrainConfig,
    on_epoch: F,
) -> Result<Vec<EpochLog>> {
    run_loop(model, sets, provider, cfg, Phase::DOnly, on_epoch)
}

/// Trains only the classifier's own parameters.
pub fn train_classifier<F: FnMut(&EpochLog)>(
    model: &mut TinModel,
    data: &PreparedDataset<'_>,
    provider: &FeatureProvider,
    cfg: &TrainConfig,
    on_epoch: F,
) -> Result<Vec<EpochLog>> {
    check_vocabulary(model, data.manifest)?;
    run_loop(model, &[data], provider, cfg, Phase::COnly, on_epoch)
}

fn check_vocabulary(model: &TinModel, manifest: &DatasetManifest) -> Result<()> {
    if model.categories != manifest.categories {
        return Err(Error::Config(format!(
            "classifier categories do not match dataset {}",
            manifest.name
        )));
    }
    Ok(())
}

/// Which datasets train which network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMode {
    pub d_train_sets: Vec<String>,
    pub c_train_set: String,
    pub test_set: String,
}

impl TransferMode {
    pub fn validate(&self, mode: TrainingMode) -> Result<()> {
        if self.c_train_set != self.test_set {
            return Err(Error::Config(format!(
                "the classifier is dataset-specific: trained on {} but tested on {}",
                self.c_train_set, self.test_set
            )));
        }
        if self.d_train_sets.is_empty() {
            return Err(Error::Config("no discriminator training set".into()));
        }
        if mode == TrainingMode::Joint && self.d_train_sets != [self.c_train_set.clone()] {
            return Err(Error::Config(format!(
                "joint mode trains both networks on one dataset, got D on {:?} and C on {}",
                self.d_train_sets, self.c_train_set
            )));
        }
        Ok(())
    }
}
