//! The late-fusion HOI classifier.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::sigmoid;
use crate::net::{Discriminator, FeatureBundle, InstanceTrunk, SpatialConfig, SpatialStream, SpatialTrace, TrunkTrace};
use crate::nn::{multilabel_bce, multilabel_bce_grad, Dense, ParamId, ParamStore};
use crate::{Error, Result};

/// How the discriminator and the classifier are trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingMode {
    /// One loop over `L_C + L_D` with shared human/object trunks.
    #[default]
    Joint,
    /// Separate training; the two networks share no parameters.
    Transfer,
}

/// How the human and object logits are combined before the spatial gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionRule {
    /// `sigmoid((z_h + z_o) / 2)`.
    #[default]
    Mean,
    /// `sigmoid(z_h + z_o)`.
    Sum,
}

impl FusionRule {
    fn scale(self) -> f64 {
        match self {
            FusionRule::Mean => 0.5,
            FusionRule::Sum => 1.0,
        }
    }
}

/// Multiplies the fused human/object probability by the spatial probability,
/// per category.
pub fn late_fusion(z_h: &[f64], z_o: &[f64], z_sp: &[f64], rule: FusionRule) -> Result<Vec<f64>> {
    if z_h.len() != z_o.len() || z_h.len() != z_sp.len() {
        return Err(Error::LengthMismatch {
            op: "late_fusion",
            expected: z_h.len(),
            got: if z_o.len() != z_h.len() { z_o.len() } else { z_sp.len() },
        });
    }
    let c = rule.scale();
    Ok(z_h
        .iter()
        .zip(z_o)
        .zip(z_sp)
        .map(|((h, o), s)| sigmoid(c * (h + o)) * sigmoid(*s))
        .collect())
}

/// Mean per-category cross-entropy of the fused scores.
pub fn loss_c(s_c: &[f64], targets: &[f64]) -> f64 {
    multilabel_bce(s_c, targets)
}

/// The D trunks that C reuses in joint mode, or `None` in transfer mode.
pub fn share_trunks(d: &Discriminator, mode: TrainingMode) -> Option<(InstanceTrunk, InstanceTrunk)> {
    match mode {
        TrainingMode::Joint => Some((d.human, d.object)),
        TrainingMode::Transfer => None,
    }
}

/// Widths of the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub feature_dim: usize,
    pub hidden: usize,
    pub num_categories: usize,
    pub fusion: FusionRule,
    pub spatial: SpatialConfig,
}

/// Per-stream logits over categories.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLogits {
    pub z_h: Vec<f64>,
    pub z_o: Vec<f64>,
    pub z_sp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CForward {
    pub logits: StreamLogits,
    /// Fused scores in `[0, 1]`.
    pub s_c: Vec<f64>,
    f_h: Vec<f64>,
    f_o: Vec<f64>,
    f_sp: Vec<f64>,
    human: TrunkTrace,
    object: TrunkTrace,
    spatial: SpatialTrace,
}

/// Human, object and two-plane spatial streams, each ending in a linear
/// layer over categories.
#[derive(Debug, Clone, PartialEq)]
pub struct HoiClassifier {
    pub human: InstanceTrunk,
    pub object: InstanceTrunk,
    pub spatial: SpatialStream,
    pub head_h: Dense,
    pub head_o: Dense,
    pub head_sp: Dense,
    pub config: ClassifierConfig,
    shared: bool,
}

impl HoiClassifier {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        prefix: &str,
        config: ClassifierConfig,
        shared: Option<(InstanceTrunk, InstanceTrunk)>,
        rng: &mut R,
    ) -> Result<Self> {
        let (f, w, k) = (config.feature_dim, config.hidden, config.num_categories);
        if f == 0 || w == 0 || k == 0 {
            return Err(Error::Config(format!("zero width in {config:?}")));
        }
        let is_shared = shared.is_some();
        let (human, object) = match shared {
            Some((h, o)) => {
                for t in [&h, &o] {
                    if t.inputs() != f || t.width() != w {
                        return Err(Error::Config(format!(
                            "shared trunk is {}->{}, classifier wants {f}->{w}",
                            t.inputs(),
                            t.width()
                        )));
                    }
                }
                (h, o)
            }
            None => (
                InstanceTrunk::new(store, &format!("{prefix}.human"), f, w, rng),
                InstanceTrunk::new(store, &format!("{prefix}.object"), f, w, rng),
            ),
        };
        let spatial = SpatialStream::new(store, &format!("{prefix}.spatial"), 2, &config.spatial, w, rng)?;
        Ok(Self {
            human,
            object,
            spatial,
            head_h: Dense::new(store, &format!("{prefix}.head_h"), w, k, rng),
            head_o: Dense::new(store, &format!("{prefix}.head_o"), w, k, rng),
            head_sp: Dense::new(store, &format!("{prefix}.head_sp"), w, k, rng),
            config,
            shared: is_shared,
        })
    }

    /// Whether the human/object trunks belong to a discriminator.
    pub fn shares_trunks(&self) -> bool {
        self.shared
    }

    pub fn forward(&self, store: &ParamStore, bundle: &FeatureBundle) -> CForward {
        let (f_h, human) = self.human.forward(store, &bundle.human);
        let (f_o, object) = self.object.forward(store, &bundle.object);
        let (f_sp, spatial) = self.spatial.forward(store, bundle.maps.channels(2));
        let logits = StreamLogits {
            z_h: self.head_h.forward(store, &f_h),
            z_o: self.head_o.forward(store, &f_o),
            z_sp: self.head_sp.forward(store, &f_sp),
        };
        let s_c = late_fusion(&logits.z_h, &logits.z_o, &logits.z_sp, self.config.fusion).expect("equal head widths");
        CForward {
            logits,
            s_c,
            f_h,
            f_o,
            f_sp,
            human,
            object,
            spatial,
        }
    }

    /// Per-stream logits over categories.
    pub fn stream_scores(&self, store: &ParamStore, bundle: &FeatureBundle) -> StreamLogits {
        self.forward(store, bundle).logits
    }

    /// Backpropagates `d loss / d S_C`.
    pub fn backward(&self, store: &mut ParamStore, bundle: &FeatureBundle, fwd: &CForward, d_s: &[f64]) {
        let c = self.config.fusion.scale();
        let l = &fwd.logits;
        let k = d_s.len();
        let mut d_zh = Vec::with_capacity(k);
        let mut d_zsp = Vec::with_capacity(k);
        for i in 0..k {
            let a = sigmoid(c * (l.z_h[i] + l.z_o[i]));
            let g = sigmoid(l.z_sp[i]);
            d_zh.push(d_s[i] * g * a * (1.0 - a) * c);
            d_zsp.push(d_s[i] * a * g * (1.0 - g));
        }
        let d_fh = self.head_h.backward(store, &fwd.f_h, &d_zh, true);
        let d_fo = self.head_o.backward(store, &fwd.f_o, &d_zh, true);
        let d_fsp = self.head_sp.backward(store, &fwd.f_sp, &d_zsp, true);
        self.human.backward(store, &bundle.human, &fwd.human, &d_fh);
        self.object.backward(store, &bundle.object, &fwd.object, &d_fo);
        self.spatial.backward(store, bundle.maps.channels(2), &fwd.spatial, &d_fsp);
    }

    /// Forward, loss and backward for one pair with multi-hot `targets`.
    pub fn train_step(&self, store: &mut ParamStore, bundle: &FeatureBundle, targets: &[f64], weight: f64) -> f64 {
        let fwd = self.forward(store, bundle);
        let loss = loss_c(&fwd.s_c, targets);
        let mut d = multilabel_bce_grad(&fwd.s_c, targets);
        for v in d.iter_mut() {
            *v *= weight;
        }
        self.backward(store, bundle, &fwd, &d);
        loss
    }

    /// Parameters owned by the classifier, excluding shared trunks.
    pub fn own_params(&self) -> Vec<ParamId> {
        let mut ids = Vec::new();
        if !self.shared {
            ids.extend(self.human.params());
            ids.extend(self.object.params());
        }
        ids.extend(self.spatial.params());
        for h in [&self.head_h, &self.head_o, &self.head_sp] {
            ids.extend(h.params());
        }
        ids
    }

    /// Every parameter the classifier reads.
    pub fn params(&self) -> Vec<ParamId> {
        let mut ids = self.human.params();
        ids.extend(self.object.params());
        ids.extend(self.spatial.params());
        for h in [&self.head_h, &self.head_o, &self.head_sp] {
            ids.extend(h.params());
        }
        ids
    }
}
