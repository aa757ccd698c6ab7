use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::categories::HoiCategoryTable;
use super::geometry::{iou, BBox};
use super::graph::PairCandidate;

/// An annotated human-object pair with its HOI category ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GtPair {
    pub human: BBox,
    pub object: BBox,
    pub hois: Vec<u32>,
}

fn matches(pair: &PairCandidate, gt: &GtPair, iou_min: f64) -> bool {
    iou(&pair.human.bbox, &gt.human) >= iou_min && iou(&pair.object.bbox, &gt.object) >= iou_min
}

/// True iff some annotated pair matches both boxes at `iou_min` and carries
/// at least one category that is not a "no interaction" category.
pub fn derive_binary_label(
    pair: &PairCandidate,
    gt_pairs: &[GtPair],
    table: &HoiCategoryTable,
    iou_min: f64,
) -> bool {
    gt_pairs.iter().any(|gt| {
        matches(pair, gt, iou_min) && gt.hois.iter().any(|&c| !table.is_no_interaction(c))
    })
}

/// Union of the categories of every annotated pair matching the candidate.
pub fn derive_hoi_labels(pair: &PairCandidate, gt_pairs: &[GtPair], iou_min: f64) -> BTreeSet<u32> {
    gt_pairs
        .iter()
        .filter(|gt| matches(pair, gt, iou_min))
        .flat_map(|gt| gt.hois.iter().copied())
        .collect()
}
