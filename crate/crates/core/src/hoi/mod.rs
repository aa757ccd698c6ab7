//! Domain types and graph construction for human-object pairs.

mod categories;
mod geometry;
mod graph;
mod labels;
mod parts;
mod pose;
mod sampling;

pub use categories::{HoiCategory, HoiCategoryTable};
pub use geometry::{iou, union_box, BBox, Detection};
pub use graph::{exhaustive_pairing, HoiGraph, PairCandidate, PairingThresholds};
pub use labels::{derive_binary_label, derive_hoi_labels, GtPair};
pub use parts::{build_part_boxes, Part, PartBox, PartGroup, JOINT_CONFIDENCE_MIN, NUM_PARTS};
pub use pose::{Keypoint, PoseKeypoints, NUM_KEYPOINTS};
pub use sampling::balance_sampling;
