use alloc::vec::Vec;

use super::features::FeatureProvider;
use super::manifest::DatasetManifest;
use super::train::TinModel;
use crate::eval::{interactiveness_ap, part_pattern_table, role_map, EvalRecord, MapReport, PatternRow};
use crate::hoi::{BBox, PairingThresholds, NUM_PARTS};
use crate::suppression::{edge_scores, LisParams, NisReport, Switches};
use crate::Result;

/// Everything computed for one edge at test time.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPrediction {
    pub image_id: u64,
    /// Detection indices.
    pub h: usize,
    pub o: usize,
    pub human: BBox,
    pub object: BBox,
    pub s_part: [f64; NUM_PARTS],
    pub p_part: [f64; NUM_PARTS],
    /// Instance logit.
    pub s_inst: f64,
    pub p_inst: f64,
    /// Maximum part logit.
    pub s_agg: f64,
    /// LIS-modulated interactiveness probability.
    pub s_lis: f64,
    /// Survived NIS.
    pub retained: bool,
    /// Classifier scores over every category, before composition.
    pub s_c: Vec<f64>,
    /// Emitted `(category id, final score)` pairs.
    pub scores: Vec<(u32, f64)>,
    /// Binary ground truth of the edge.
    pub interactive: bool,
    pub gt_hois: Vec<u32>,
}

/// Test-time settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferConfig {
    pub switches: Switches,
    pub lis: LisParams,
    pub thresholds: PairingThresholds,
    pub gamma: f64,
    pub iou_min: f64,
}

impl Default for InferConfig {
    fn default() -> Self {
        Self {
            switches: Switches::default(),
            lis: LisParams::default(),
            thresholds: PairingThresholds::default(),
            gamma: 0.6,
            iou_min: 0.5,
        }
    }
}

/// Runs both networks over every edge and composes the final scores.
/// Each edge emits only categories defined over its object's class.
pub fn infer_dataset(
    model: &TinModel,
    data: &DatasetManifest,
    provider: &FeatureProvider,
    cfg: &InferConfig,
) -> Result<Vec<PairPrediction>> {
    let no_interaction: Vec<bool> = model.categories.iter().map(|c| c.no_interaction).collect();
    let alpha = cfg.switches.effective_alpha();
    let mut out = Vec::new();
    for img in &data.images {
        let pairs = img.labelled_pairs(&data.categories, cfg.thresholds, cfg.gamma, cfg.iou_min);
        for pair in &pairs {
            let bundle = provider.bundle(img, pair)?;
            let s = model.d.forward(&model.store, &bundle).scores;
            let s_c = model.c.forward(&model.store, &bundle).s_c;
            let s_lis = cfg.switches.s_lis(s.p_inst, pair.human.score, pair.object.score, &cfg.lis);
            let retained = s_lis >= alpha;
            let candidates: Vec<usize> = model
                .categories
                .iter()
                .enumerate()
                .filter(|(_, c)| c.object == pair.object.class_id)
                .map(|(i, _)| i)
                .collect();
            let scores = edge_scores(&s_c, s_lis, retained, &candidates, &no_interaction, &cfg.switches)
                .into_iter()
                .map(|(i, v)| (model.categories.get(i).expect("index").id, v))
                .collect();
            out.push(PairPrediction {
                image_id: img.image_id,
                h: pair.human_idx,
                o: pair.object_idx,
                human: pair.human.bbox,
                object: pair.object.bbox,
                s_part: s.s_part,
                p_part: s.p_part,
                s_inst: s.s_inst,
                p_inst: s.p_inst,
                s_agg: s.s_agg,
                s_lis,
                retained,
                s_c,
                scores,
                interactive: pair.gt_interactive == Some(true),
                gt_hois: pair.gt_hois.clone().unwrap_or_default(),
            });
        }
    }
    Ok(out)
}

/// Metrics of one test run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub role: MapReport,
    pub interactiveness_ap: f64,
    pub nis: NisReport,
    pub patterns: Vec<PatternRow>,
}

/// Ground-truth records of a dataset, one per (pair, category).
pub fn gt_records(data: &DatasetManifest) -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for img in &data.images {
        for g in &img.gt_pairs {
            for &category in &g.hois {
                out.push(EvalRecord {
                    image_id: img.image_id,
                    category,
                    human: img.detections[g.human].bbox,
                    object: img.detections[g.object].bbox,
                    score: 0.0,
                });
            }
        }
    }
    out
}

/// Annotated pairs carrying an interactive category, as one class.
pub fn interactive_gt_records(data: &DatasetManifest) -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for img in &data.images {
        for g in &img.gt_pairs {
            if g.hois.iter().any(|&c| !data.categories.is_no_interaction(c)) {
                out.push(EvalRecord {
                    image_id: img.image_id,
                    category: 0,
                    human: img.detections[g.human].bbox,
                    object: img.detections[g.object].bbox,
                    score: 0.0,
                });
            }
        }
    }
    out
}

pub fn prediction_records(preds: &[PairPrediction]) -> Vec<EvalRecord> {
    preds
        .iter()
        .flat_map(|p| {
            p.scores.iter().map(move |&(category, score)| EvalRecord {
                image_id: p.image_id,
                category,
                human: p.human,
                object: p.object,
                score,
            })
        })
        .collect()
}

/// Role mAP, interactiveness AP (ranked by `s_lis`), NIS counts and the
/// part pattern of every interactive category.
pub fn evaluate(data: &DatasetManifest, preds: &[PairPrediction], iou_min: f64) -> EvalSummary {
    let role = role_map(&prediction_records(preds), &gt_records(data), iou_min);
    let binary: Vec<EvalRecord> = preds
        .iter()
        .map(|p| EvalRecord {
            image_id: p.image_id,
            category: 0,
            human: p.human,
            object: p.object,
            score: p.s_lis,
        })
        .collect();
    let interactiveness = interactiveness_ap(&binary, &interactive_gt_records(data), iou_min);
    let mut nis = NisReport::default();
    for p in preds {
        nis.add(p.retained, p.interactive);
    }
    let patterns = part_pattern_table(preds.iter().flat_map(|p| {
        p.gt_hois
            .iter()
            .filter(|&&c| !data.categories.is_no_interaction(c))
            .map(move |&c| (c, &p.p_part))
    }));
    EvalSummary {
        role,
        interactiveness_ap: interactiveness,
        nis,
        patterns,
    }
}
