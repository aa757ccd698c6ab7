use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::hoi::{
    derive_binary_label, derive_hoi_labels, exhaustive_pairing, Detection, GtPair, HoiCategoryTable, PairCandidate,
    PairingThresholds, PoseKeypoints, NUM_PARTS,
};
use crate::{Error, Result};

/// An annotated pair, by detection index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtIndexPair {
    pub human: usize,
    pub object: usize,
    pub hois: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub image_id: u64,
    pub detections: Vec<Detection>,
    /// One pose per human detection, in detection order.
    pub keypoints: Vec<PoseKeypoints>,
    pub gt_pairs: Vec<GtIndexPair>,
    /// Instance feature vectors by detection index.
    pub features: BTreeMap<usize, Vec<f64>>,
    /// Explicit part features by human detection index.
    pub part_features: BTreeMap<usize, [Vec<f64>; NUM_PARTS]>,
}

impl ImageRecord {
    /// Pose of the human at detection index `det`.
    pub fn pose_of(&self, det: usize) -> Option<PoseKeypoints> {
        if !self.detections.get(det)?.is_human {
            return None;
        }
        let rank = self.detections[..det].iter().filter(|d| d.is_human).count();
        self.keypoints.get(rank).copied()
    }

    /// Ground truth with boxes resolved.
    pub fn gt_boxes(&self) -> Vec<GtPair> {
        self.gt_pairs
            .iter()
            .map(|g| GtPair {
                human: self.detections[g.human].bbox,
                object: self.detections[g.object].bbox,
                hois: g.hois.clone(),
            })
            .collect()
    }

    /// Dense pairing with poses attached and labels derived from the
    /// ground truth.
    pub fn labelled_pairs(
        &self,
        table: &HoiCategoryTable,
        thresholds: PairingThresholds,
        gamma: f64,
        iou_min: f64,
    ) -> Vec<PairCandidate> {
        let mut graph = exhaustive_pairing(&self.detections, thresholds);
        graph.attach_poses(|i| self.pose_of(i), gamma);
        let gt = self.gt_boxes();
        for e in graph.edges.iter_mut() {
            e.gt_interactive = Some(derive_binary_label(e, &gt, table, iou_min));
            e.gt_hois = Some(derive_hoi_labels(e, &gt, iou_min).into_iter().collect());
        }
        graph.edges
    }
}

/// A named dataset: categories plus image records.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub categories: HoiCategoryTable,
    pub images: Vec<ImageRecord>,
}

impl DatasetManifest {
    /// Checks referential integrity.
    pub fn validate(&self) -> Result<()> {
        for img in &self.images {
            let n = img.detections.len();
            let humans = img.detections.iter().filter(|d| d.is_human).count();
            if img.keypoints.len() != humans {
                return Err(Error::Integrity(format!(
                    "image {}: {} keypoint sets for {humans} humans",
                    img.image_id,
                    img.keypoints.len()
                )));
            }
            for (k, g) in img.gt_pairs.iter().enumerate() {
                if g.human >= n || g.object >= n {
                    return Err(Error::Integrity(format!(
                        "image {}: gt pair {k} ({}, {}) references a missing detection (have {n})",
                        img.image_id, g.human, g.object
                    )));
                }
                if !img.detections[g.human].is_human {
                    return Err(Error::Integrity(format!(
                        "image {}: gt pair {k} has non-human detection {} as human",
                        img.image_id, g.human
                    )));
                }
                if let Some(c) = g.hois.iter().find(|&&c| !self.categories.contains(c)) {
                    return Err(Error::Integrity(format!(
                        "image {}: gt pair {k} uses unknown category {c}",
                        img.image_id
                    )));
                }
            }
            if let Some(&i) = img.features.keys().find(|&&i| i >= n) {
                return Err(Error::Integrity(format!(
                    "image {}: features for missing detection {i}",
                    img.image_id
                )));
            }
            if let Some(&i) = img.part_features.keys().find(|&&i| i >= n || !img.detections[i].is_human) {
                return Err(Error::Integrity(format!(
                    "image {}: part features for non-human detection {i}",
                    img.image_id
                )));
            }
        }
        Ok(())
    }

    pub fn num_pairs_annotated(&self) -> usize {
        self.images.iter().map(|i| i.gt_pairs.len()).sum()
    }
}
