//! Synthetic scenes with a known interactiveness rule.
//!
//! A pair of real detections `(h, o)` is interactive iff the center distance
//! divided by the human box diagonal is below `tau` and the human's
//! activation for one of the part groups designated by the object's class is
//! positive. Each category is one (class, group) verb, so the part pattern of
//! every category is known by construction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::{DatasetManifest, GtIndexPair, ImageRecord};
use crate::hoi::{iou, BBox, Detection, HoiCategory, HoiCategoryTable, Keypoint, PartGroup, PoseKeypoints, NUM_KEYPOINTS};
use crate::math::{cos, sin, sqrt};
use crate::{Error, Result};

pub const IMAGE_WIDTH: f64 = 640.0;
pub const IMAGE_HEIGHT: f64 = 480.0;

pub const OBJECT_CLASSES: [&str; 5] = ["person", "ball", "bicycle", "cup", "bench"];

/// Feature layout: group activations first, then the class one-hot, then a
/// fixed random projection of both. Noise is added to all but the
/// activations.
pub const ACTIVATION_OFFSET: usize = 0;
pub const CLASS_OFFSET: usize = 6;
pub const MIN_FEATURE_DIM: usize = CLASS_OFFSET + OBJECT_CLASSES.len();

/// Seed of the projection; shared by every vocabulary so that features mean
/// the same thing across datasets.
const ENCODING_SEED: u64 = 0x5eed_f00d;

/// The two verbs of each object class and the part group each depends on.
pub const VERB_GROUPS: [[PartGroup; 2]; 5] = [
    [PartGroup::UpperArms, PartGroup::Head],
    [PartGroup::Feet, PartGroup::Hands],
    [PartGroup::Hip, PartGroup::Hands],
    [PartGroup::Hands, PartGroup::Head],
    [PartGroup::Thighs, PartGroup::Feet],
];

/// Two label spaces over the same rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vocabulary {
    A,
    B,
}

impl Vocabulary {
    pub const ALL: [Vocabulary; 2] = [Vocabulary::A, Vocabulary::B];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Vocabulary::A => "A",
            Vocabulary::B => "B",
        }
    }

    fn verbs(self) -> [[&'static str; 2]; 5] {
        match self {
            Vocabulary::A => [
                ["hug", "talk_to"],
                ["kick", "throw"],
                ["ride", "push"],
                ["hold", "drink_with"],
                ["sit_on", "stand_on"],
            ],
            Vocabulary::B => [
                ["embrace", "greet"],
                ["dribble", "catch"],
                ["mount", "walk"],
                ["fill", "sip"],
                ["lie_on", "jump_over"],
            ],
        }
    }

    fn id_base(self) -> u32 {
        match self {
            Vocabulary::A => 0,
            Vocabulary::B => 100,
        }
    }

    /// Classes that carry a "no interaction" category.
    pub fn no_interaction_classes(self) -> [u32; 2] {
        match self {
            Vocabulary::A => [1, 3],
            Vocabulary::B => [0, 2],
        }
    }

    /// Category id of verb `v` (0 or 1) of class `c`.
    pub fn verb_id(self, class: u32, v: usize) -> u32 {
        self.id_base() + 2 * class + v as u32
    }

    pub fn no_interaction_id(self, class: u32) -> Option<u32> {
        let k = self.no_interaction_classes().iter().position(|&c| c == class)?;
        Some(self.id_base() + 2 * OBJECT_CLASSES.len() as u32 + k as u32)
    }

    pub fn categories(self) -> HoiCategoryTable {
        let mut cats = Vec::new();
        for (c, verbs) in self.verbs().iter().enumerate() {
            for (v, name) in verbs.iter().enumerate() {
                cats.push(HoiCategory {
                    id: self.verb_id(c as u32, v),
                    verb: name.to_string(),
                    object: c as u32,
                    no_interaction: false,
                });
            }
        }
        for c in self.no_interaction_classes() {
            cats.push(HoiCategory {
                id: self.no_interaction_id(c).expect("flagged class"),
                verb: "no_interaction".to_string(),
                object: c,
                no_interaction: true,
            });
        }
        HoiCategoryTable::new(cats).expect("ids are unique")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub images: usize,
    pub first_image_id: u64,
    pub humans: (usize, usize),
    pub objects: (usize, usize),
    pub feature_dim: usize,
    /// Standard deviation of the additive feature noise.
    pub noise: f64,
    /// Interaction distance, in human box diagonals.
    pub tau: f64,
    /// Distances in `(tau - margin, tau + margin)` are never generated.
    pub margin: f64,
    /// Probability that a group activation is positive.
    pub p_active: f64,
    /// Probability that an object is placed within reach of some human.
    pub p_near: f64,
    /// Per-detection probability of a low-grade duplicate.
    pub duplicate_rate: f64,
    /// Maximum number of low-score clutter detections per image.
    pub clutter_max: usize,
    pub vocabulary: Vocabulary,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            images: 1000,
            first_image_id: 0,
            humans: (1, 3),
            objects: (2, 4),
            feature_dim: 32,
            noise: 0.3,
            tau: 0.5,
            margin: 0.15,
            p_active: 0.35,
            p_near: 0.85,
            duplicate_rate: 0.15,
            clutter_max: 1,
            vocabulary: Vocabulary::A,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.feature_dim < MIN_FEATURE_DIM {
            return bad(format!("feature_dim must be at least {MIN_FEATURE_DIM}"));
        }
        if self.humans.0 > self.humans.1 || self.objects.0 > self.objects.1 || self.humans.1 == 0 {
            return bad(format!("bad count ranges {:?} {:?}", self.humans, self.objects));
        }
        for (name, p) in [
            ("p_active", self.p_active),
            ("p_near", self.p_near),
            ("duplicate_rate", self.duplicate_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1]"));
            }
        }
        if !(self.noise >= 0.0 && self.tau >= 0.0 && self.margin >= 0.0) {
            return bad("noise, tau and margin must be non-negative".to_string());
        }
        Ok(())
    }

    pub fn dataset_name(&self) -> String {
        self.vocabulary.name().to_string()
    }
}

/// Generator-side facts that the manifest does not record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneTruth {
    /// False for duplicates and clutter.
    pub real: Vec<bool>,
    /// Group activations of real humans, by detection index.
    pub activations: BTreeMap<usize, [f64; 6]>,
}

/// Normalized center distance `|c_h - c_o| / diag(h)`.
pub fn reach(human: &BBox, object: &BBox) -> f64 {
    let (hx, hy) = human.center();
    let (ox, oy) = object.center();
    sqrt((hx - ox) * (hx - ox) + (hy - oy) * (hy - oy)) / human.diagonal()
}

/// Category ids the rule assigns to a pair of real detections.
pub fn rule_hois(
    vocab: Vocabulary,
    tau: f64,
    human: &Detection,
    activations: &[f64; 6],
    object: &Detection,
) -> Vec<u32> {
    if !(reach(&human.bbox, &object.bbox) < tau) {
        return Vec::new();
    }
    let class = object.class_id;
    let mut hois: Vec<u32> = VERB_GROUPS[class as usize]
        .iter()
        .enumerate()
        .filter(|(_, g)| activations[g.index()] > 0.0)
        .map(|(v, _)| vocab.verb_id(class, v))
        .collect();
    if hois.is_empty() {
        hois.extend(vocab.no_interaction_id(class));
    }
    hois
}

/// Whether the rule makes the pair interactive.
pub fn rule_interactive(tau: f64, human: &Detection, activations: &[f64; 6], object: &Detection) -> bool {
    reach(&human.bbox, &object.bbox) < tau
        && VERB_GROUPS[object.class_id as usize].iter().any(|g| activations[g.index()] > 0.0)
}

/// Upright skeleton template, as fractions of the box.
const TEMPLATE: [(f64, f64); NUM_KEYPOINTS] = [
    (0.50, 0.08),
    (0.46, 0.06),
    (0.54, 0.06),
    (0.42, 0.08),
    (0.58, 0.08),
    (0.34, 0.22),
    (0.66, 0.22),
    (0.28, 0.38),
    (0.72, 0.38),
    (0.26, 0.52),
    (0.74, 0.52),
    (0.40, 0.52),
    (0.60, 0.52),
    (0.40, 0.74),
    (0.60, 0.74),
    (0.40, 0.95),
    (0.60, 0.95),
];

/// Template pose inside `b`, jittered, with a few undetected joints.
pub fn template_pose<R: Rng + ?Sized>(rng: &mut R, b: &BBox) -> PoseKeypoints {
    PoseKeypoints::new(core::array::from_fn(|i| {
        let (fx, fy) = TEMPLATE[i];
        let jx = rng.random_range(-0.03..0.03);
        let jy = rng.random_range(-0.02..0.02);
        let confidence = if rng.random_bool(0.08) {
            0.0
        } else {
            rng.random_range(0.3..1.0)
        };
        Keypoint {
            x: b.x1 + (fx + jx) * b.width(),
            y: b.y1 + (fy + jy) * b.height(),
            confidence,
        }
    }))
}

struct Placed {
    bbox: BBox,
    class: u32,
}

struct Scene<'a> {
    spec: &'a SyntheticSpec,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    /// Row per extra feature dimension, over the `MIN_FEATURE_DIM` latents.
    projection: Vec<[f64; MIN_FEATURE_DIM]>,
}

fn projection(feature_dim: usize) -> Vec<[f64; MIN_FEATURE_DIM]> {
    let mut rng = ChaCha8Rng::seed_from_u64(ENCODING_SEED);
    let normal = Normal::new(0.0, 1.0 / sqrt(MIN_FEATURE_DIM as f64)).expect("valid");
    (MIN_FEATURE_DIM..feature_dim)
        .map(|_| core::array::from_fn(|_| normal.sample(&mut rng)))
        .collect()
}

const PLACEMENT_TRIES: usize = 64;

/// Real boxes overlap less than this, so no edge can borrow another
/// pair's annotation through IoU matching.
const MAX_REAL_IOU: f64 = 0.4;

impl Scene<'_> {
    fn box_at(&self, cx: f64, cy: f64, w: f64, h: f64) -> Option<BBox> {
        let b = BBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0).ok()?;
        (b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= IMAGE_WIDTH && b.y2 <= IMAGE_HEIGHT).then_some(b)
    }

    fn in_band(&self, r: f64) -> bool {
        r > self.spec.tau - self.spec.margin && r < self.spec.tau + self.spec.margin
    }

    /// True if `b` keeps every distance to the placed humans outside the
    /// ambiguous band, in both directions when `b` is itself a human.
    fn clear_of_band(&self, b: &BBox, humans: &[BBox], is_human: bool) -> bool {
        humans
            .iter()
            .all(|h| !self.in_band(reach(h, b)) && !(is_human && self.in_band(reach(b, h))))
    }

    fn near_center(&mut self, anchor: &BBox) -> (f64, f64) {
        let radius = (self.spec.tau - self.spec.margin).max(0.0) * anchor.diagonal() * 0.95;
        let r = radius * sqrt(self.rng.random_range(0.0..1.0));
        let t = self.rng.random_range(0.0..core::f64::consts::TAU);
        let (ax, ay) = anchor.center();
        (ax + r * cos(t), ay + r * sin(t))
    }

    fn separated(b: &BBox, placed: &[BBox]) -> bool {
        placed.iter().all(|p| iou(p, b) < MAX_REAL_IOU)
    }

    fn place_human(&mut self, humans: &[BBox]) -> Option<BBox> {
        for _ in 0..PLACEMENT_TRIES {
            let w = self.rng.random_range(60.0..130.0);
            let h = w * self.rng.random_range(1.7..2.3);
            let near = !humans.is_empty() && self.rng.random_bool(0.35);
            let (cx, cy) = if near {
                let a = humans[self.rng.random_range(0..humans.len())];
                self.near_center(&a)
            } else {
                (self.rng.random_range(0.0..IMAGE_WIDTH), self.rng.random_range(0.0..IMAGE_HEIGHT))
            };
            if let Some(b) = self.box_at(cx, cy, w, h) {
                if self.clear_of_band(&b, humans, true) && Self::separated(&b, humans) {
                    return Some(b);
                }
            }
        }
        None
    }

    fn place_object(&mut self, humans: &[BBox], placed: &[BBox]) -> Option<BBox> {
        let near = self.rng.random_bool(self.spec.p_near);
        let anchor = humans[self.rng.random_range(0..humans.len())];
        for _ in 0..PLACEMENT_TRIES {
            let s = self.rng.random_range(30.0..90.0);
            let aspect = self.rng.random_range(0.7..1.4);
            let (cx, cy) = if near {
                self.near_center(&anchor)
            } else {
                (self.rng.random_range(0.0..IMAGE_WIDTH), self.rng.random_range(0.0..IMAGE_HEIGHT))
            };
            if let Some(b) = self.box_at(cx, cy, s * aspect, s) {
                if self.clear_of_band(&b, humans, false) && Self::separated(&b, placed) {
                    return Some(b);
                }
            }
        }
        None
    }

    fn activations(&mut self) -> [f64; 6] {
        core::array::from_fn(|_| {
            let m = self.rng.random_range(0.5..1.5);
            if self.rng.random_bool(self.spec.p_active) {
                m
            } else {
                -m
            }
        })
    }

    fn features(&mut self, class: u32, acts: Option<&[f64; 6]>) -> Vec<f64> {
        let mut latent = [0.0; MIN_FEATURE_DIM];
        if let Some(a) = acts {
            latent[ACTIVATION_OFFSET..ACTIVATION_OFFSET + 6].copy_from_slice(a);
        }
        latent[CLASS_OFFSET + class as usize] = 1.0;
        let mut f = latent.to_vec();
        f.extend(self.projection.iter().map(|row| row.iter().zip(&latent).map(|(w, z)| w * z).sum::<f64>()));
        for v in &mut f[CLASS_OFFSET..] {
            *v += self.noise.sample(&mut self.rng);
        }
        f
    }

    /// A poorly localized copy of `b`: IoU below 0.5 with every real box.
    fn duplicate_box(&mut self, b: &BBox, real: &[BBox]) -> Option<BBox> {
        for _ in 0..PLACEMENT_TRIES {
            let sx = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let sy = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let dx = sx * self.rng.random_range(0.3..0.6) * b.width();
            let dy = sy * self.rng.random_range(0.3..0.6) * b.height();
            let (cx, cy) = b.center();
            if let Some(d) = self.box_at(cx + dx, cy + dy, b.width(), b.height()) {
                if real.iter().all(|r| iou(r, &d) < 0.5) {
                    return Some(d);
                }
            }
        }
        None
    }

    fn image(&mut self, image_id: u64) -> (ImageRecord, SceneTruth) {
        let spec = self.spec;
        let n_h = self.rng.random_range(spec.humans.0..=spec.humans.1);
        let n_o = self.rng.random_range(spec.objects.0..=spec.objects.1);
        let mut human_boxes = Vec::new();
        for _ in 0..n_h {
            if let Some(b) = self.place_human(&human_boxes) {
                human_boxes.push(b);
            }
        }
        let mut placed: Vec<Placed> = human_boxes.iter().map(|&bbox| Placed { bbox, class: 0 }).collect();
        if !human_boxes.is_empty() {
            for _ in 0..n_o {
                let class = self.rng.random_range(1..OBJECT_CLASSES.len() as u32);
                let boxes: Vec<BBox> = placed.iter().map(|p| p.bbox).collect();
                if let Some(bbox) = self.place_object(&human_boxes, &boxes) {
                    placed.push(Placed { bbox, class });
                }
            }
        }

        let mut detections = Vec::new();
        let mut keypoints = Vec::new();
        let mut features = BTreeMap::new();
        let mut truth = SceneTruth::default();
        for (i, p) in placed.iter().enumerate() {
            let is_human = p.class == 0;
            let score = self.rng.random_range(0.95..=1.0);
            detections.push(Detection::new(p.bbox, p.class, score, is_human).expect("valid"));
            let acts = is_human.then(|| self.activations());
            if let Some(a) = acts {
                truth.activations.insert(i, a);
                keypoints.push(template_pose(&mut self.rng, &p.bbox));
            }
            features.insert(i, self.features(p.class, acts.as_ref()));
            truth.real.push(true);
        }

        let mut gt_pairs = Vec::new();
        for (hi, acts) in &truth.activations {
            for oi in 0..detections.len() {
                if oi == *hi {
                    continue;
                }
                let hois = rule_hois(spec.vocabulary, spec.tau, &detections[*hi], acts, &detections[oi]);
                if !hois.is_empty() {
                    gt_pairs.push(GtIndexPair {
                        human: *hi,
                        object: oi,
                        hois,
                    });
                }
            }
        }

        let real_boxes: Vec<BBox> = placed.iter().map(|p| p.bbox).collect();
        for (i, p) in placed.iter().enumerate() {
            if !self.rng.random_bool(spec.duplicate_rate) {
                continue;
            }
            let Some(bbox) = self.duplicate_box(&p.bbox, &real_boxes) else {
                continue;
            };
            let is_human = p.class == 0;
            let score = self.rng.random_range(0.4..0.75);
            let noisy: Vec<f64> = features[&i].iter().map(|v| v + self.noise.sample(&mut self.rng)).collect();
            features.insert(detections.len(), noisy);
            detections.push(Detection::new(bbox, p.class, score, is_human).expect("valid"));
            if is_human {
                keypoints.push(template_pose(&mut self.rng, &bbox));
            }
            truth.real.push(false);
        }

        let clutter = self.rng.random_range(0..=spec.clutter_max);
        for _ in 0..clutter {
            let class = self.rng.random_range(0..OBJECT_CLASSES.len() as u32);
            let s = self.rng.random_range(20.0..80.0);
            let cx = self.rng.random_range(s..IMAGE_WIDTH - s);
            let cy = self.rng.random_range(s..IMAGE_HEIGHT - s);
            let Some(bbox) = self.box_at(cx, cy, s, s) else { continue };
            let is_human = class == 0;
            let score = self.rng.random_range(0.05..0.35);
            features.insert(detections.len(), self.features(class, None));
            detections.push(Detection::new(bbox, class, score, is_human).expect("valid"));
            if is_human {
                keypoints.push(template_pose(&mut self.rng, &bbox));
            }
            truth.real.push(false);
        }

        (
            ImageRecord {
                image_id,
                detections,
                keypoints,
                gt_pairs,
                features,
                part_features: BTreeMap::new(),
            },
            truth,
        )
    }
}

/// Generates a dataset and the per-image generator truth.
pub fn synthetic_generate(spec: &SyntheticSpec, seed: u64) -> Result<(DatasetManifest, Vec<SceneTruth>)> {
    spec.validate()?;
    let mut scene = Scene {
        spec,
        rng: ChaCha8Rng::seed_from_u64(seed),
        noise: Normal::new(0.0, spec.noise).map_err(|e| Error::Config(format!("noise: {e}")))?,
        projection: projection(spec.feature_dim),
    };
    let mut images = Vec::with_capacity(spec.images);
    let mut truth = Vec::with_capacity(spec.images);
    for i in 0..spec.images {
        let (img, t) = scene.image(spec.first_image_id + i as u64);
        images.push(img);
        truth.push(t);
    }
    let manifest = DatasetManifest {
        name: spec.dataset_name(),
        categories: spec.vocabulary.categories(),
        images,
    };
    manifest.validate()?;
    Ok((manifest, truth))
}
