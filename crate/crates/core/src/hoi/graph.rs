use alloc::vec::Vec;

use super::geometry::{union_box, BBox, Detection};
use super::parts::{build_part_boxes, Part, PartBox, NUM_PARTS};
use super::pose::PoseKeypoints;

/// Minimum detection scores for entering the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingThresholds {
    pub human: f64,
    pub object: f64,
}

impl Default for PairingThresholds {
    fn default() -> Self {
        Self {
            human: 0.6,
            object: 0.4,
        }
    }
}

/// One edge of the human-object graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCandidate {
    /// Index of the human in the image's detection list.
    pub human_idx: usize,
    pub object_idx: usize,
    pub human: Detection,
    pub object: Detection,
    pub part_boxes: [PartBox; NUM_PARTS],
    pub union: BBox,
    pub pose: Option<PoseKeypoints>,
    pub gt_interactive: Option<bool>,
    pub gt_hois: Option<Vec<u32>>,
}

impl PairCandidate {
    pub fn new(human_idx: usize, human: Detection, object_idx: usize, object: Detection) -> Self {
        let (cx, cy) = human.bbox.center();
        Self {
            human_idx,
            object_idx,
            human,
            object,
            part_boxes: Part::ALL.map(|p| PartBox::missing(p, cx, cy)),
            union: union_box(&human.bbox, &object.bbox),
            pose: None,
            gt_interactive: None,
            gt_hois: None,
        }
    }

    /// Attaches the human's pose and derives its part boxes.
    pub fn with_pose(mut self, pose: Option<PoseKeypoints>, gamma: f64) -> Self {
        if let Some(kp) = &pose {
            self.part_boxes = build_part_boxes(kp, gamma);
        }
        self.pose = pose;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HoiGraph {
    pub nodes: Vec<Detection>,
    pub edges: Vec<PairCandidate>,
}

impl HoiGraph {
    /// Attaches poses (looked up by human detection index) to every edge.
    pub fn attach_poses<F>(&mut self, mut pose_of: F, gamma: f64)
    where
        F: FnMut(usize) -> Option<PoseKeypoints>,
    {
        for e in self.edges.iter_mut() {
            if let Some(kp) = pose_of(e.human_idx) {
                e.part_boxes = build_part_boxes(&kp, gamma);
                e.pose = Some(kp);
            }
        }
    }
}

/// Dense pairing: every retained human with every retained detection other
/// than itself. Humans can be the object of another human's interaction.
///
/// Edges are ordered by human index, then object index.
pub fn exhaustive_pairing(detections: &[Detection], thresholds: PairingThresholds) -> HoiGraph {
    let mut edges = Vec::new();
    for (hi, h) in detections.iter().enumerate() {
        if !h.is_human || h.score < thresholds.human {
            continue;
        }
        for (oi, o) in detections.iter().enumerate() {
            if oi == hi || o.score < thresholds.object {
                continue;
            }
            edges.push(PairCandidate::new(hi, *h, oi, *o));
        }
    }
    HoiGraph {
        nodes: detections.to_vec(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(x: f64, score: f64, is_human: bool) -> Detection {
        Detection::new(
            BBox::new(x, 0.0, x + 10.0, 20.0).unwrap(),
            if is_human { 0 } else { 3 },
            score,
            is_human,
        )
        .unwrap()
    }

    fn t(h: f64, o: f64) -> PairingThresholds {
        PairingThresholds { human: h, object: o }
    }

    #[test]
    fn humans_times_objects() {
        let dets = [
            det(0.0, 0.9, true),
            det(10.0, 0.8, true),
            det(20.0, 0.9, false),
            det(30.0, 0.5, false),
            det(40.0, 0.45, false),
        ];
        let g = exhaustive_pairing(&dets, t(0.6, 0.4));
        // each human pairs with 3 objects plus the other human
        assert_eq!(g.edges.len(), 2 * 4);
        let non_human = g.edges.iter().filter(|e| !e.object.is_human).count();
        assert_eq!(non_human, 6);
        assert!(g.edges.iter().all(|e| e.human_idx != e.object_idx));
        assert!(g
            .edges
            .iter()
            .all(|e| e.union.contains(&e.human.bbox) && e.union.contains(&e.object.bbox)));
    }

    #[test]
    fn low_scoring_human_is_dropped() {
        let dets = [
            det(0.0, 0.7, true),
            det(10.0, 0.5, true),
            det(20.0, 0.9, false),
            det(30.0, 0.9, false),
            det(40.0, 0.9, false),
        ];
        // The 0.5 human is still a valid object for the 0.7 human.
        let g = exhaustive_pairing(&dets, t(0.6, 0.4));
        assert_eq!(g.edges.iter().filter(|e| !e.object.is_human).count(), 3);
        assert!(g.edges.iter().all(|e| e.human_idx == 0));
    }

    #[test]
    fn empty_graph_is_allowed() {
        assert!(exhaustive_pairing(&[], t(0.6, 0.4)).edges.is_empty());
        let only_objects = [det(0.0, 0.9, false), det(5.0, 0.9, false)];
        assert!(exhaustive_pairing(&only_objects, t(0.6, 0.4)).edges.is_empty());
    }

    fn arb_scene() -> impl Strategy<Value = Vec<Detection>> {
        proptest::collection::vec((0.0..1.0f64, any::<bool>()), 0..9).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, h))| det(i as f64 * 7.0, s, h))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn matches_double_loop(dets in arb_scene(), th in 0.0..1.0f64, to in 0.0..1.0f64) {
            let g = exhaustive_pairing(&dets, t(th, to));
            let mut expected = Vec::new();
            for i in 0..dets.len() {
                for j in 0..dets.len() {
                    if i != j && dets[i].is_human && dets[i].score >= th && dets[j].score >= to {
                        expected.push((i, j));
                    }
                }
            }
            let got: Vec<_> = g.edges.iter().map(|e| (e.human_idx, e.object_idx)).collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn lowering_thresholds_never_removes_edges(
            dets in arb_scene(),
            th in 0.0..1.0f64, to in 0.0..1.0f64,
            dh in 0.0..0.5f64, dobj in 0.0..0.5f64,
        ) {
            let strict = exhaustive_pairing(&dets, t(th + dh, to + dobj));
            let loose = exhaustive_pairing(&dets, t(th, to));
            let loose_set: Vec<_> = loose.edges.iter().map(|e| (e.human_idx, e.object_idx)).collect();
            for e in &strict.edges {
                prop_assert!(loose_set.contains(&(e.human_idx, e.object_idx)));
            }
        }
    }
}
