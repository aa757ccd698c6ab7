use super::geometry::BBox;
use super::pose::*;
use crate::math::sqrt;

pub const NUM_PARTS: usize = 10;

/// Joints below this confidence are treated as undetected.
pub const JOINT_CONFIDENCE_MIN: f64 = 0.05;

/// The ten body parts, in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Head,
    LeftUpperArm,
    RightUpperArm,
    LeftHand,
    RightHand,
    Hip,
    LeftThigh,
    RightThigh,
    LeftFoot,
    RightFoot,
}

enum Anchor {
    Joint(usize),
    Pelvis,
}

impl Part {
    pub const ALL: [Part; NUM_PARTS] = [
        Part::Head,
        Part::LeftUpperArm,
        Part::RightUpperArm,
        Part::LeftHand,
        Part::RightHand,
        Part::Hip,
        Part::LeftThigh,
        Part::RightThigh,
        Part::LeftFoot,
        Part::RightFoot,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Part> {
        Part::ALL.get(i).copied()
    }

    pub fn group(self) -> PartGroup {
        match self {
            Part::Head => PartGroup::Head,
            Part::LeftUpperArm | Part::RightUpperArm => PartGroup::UpperArms,
            Part::LeftHand | Part::RightHand => PartGroup::Hands,
            Part::Hip => PartGroup::Hip,
            Part::LeftThigh | Part::RightThigh => PartGroup::Thighs,
            Part::LeftFoot | Part::RightFoot => PartGroup::Feet,
        }
    }

    fn anchor(self) -> Anchor {
        match self {
            Part::Head => Anchor::Joint(NOSE),
            Part::LeftUpperArm => Anchor::Joint(LEFT_ELBOW),
            Part::RightUpperArm => Anchor::Joint(RIGHT_ELBOW),
            Part::LeftHand => Anchor::Joint(LEFT_WRIST),
            Part::RightHand => Anchor::Joint(RIGHT_WRIST),
            Part::Hip => Anchor::Pelvis,
            Part::LeftThigh => Anchor::Joint(LEFT_KNEE),
            Part::RightThigh => Anchor::Joint(RIGHT_KNEE),
            Part::LeftFoot => Anchor::Joint(LEFT_ANKLE),
            Part::RightFoot => Anchor::Joint(RIGHT_ANKLE),
        }
    }
}

/// Left/right-merged part groups, in part-pattern table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartGroup {
    Feet,
    Thighs,
    Hip,
    UpperArms,
    Hands,
    Head,
}

impl PartGroup {
    pub const ALL: [PartGroup; 6] = [
        PartGroup::Feet,
        PartGroup::Thighs,
        PartGroup::Hip,
        PartGroup::UpperArms,
        PartGroup::Hands,
        PartGroup::Head,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PartGroup::Feet => "feet",
            PartGroup::Thighs => "thighs",
            PartGroup::Hip => "hip",
            PartGroup::UpperArms => "upper_arms",
            PartGroup::Hands => "hands",
            PartGroup::Head => "head",
        }
    }

    pub fn parts(self) -> &'static [Part] {
        match self {
            PartGroup::Feet => &[Part::LeftFoot, Part::RightFoot],
            PartGroup::Thighs => &[Part::LeftThigh, Part::RightThigh],
            PartGroup::Hip => &[Part::Hip],
            PartGroup::UpperArms => &[Part::LeftUpperArm, Part::RightUpperArm],
            PartGroup::Hands => &[Part::LeftHand, Part::RightHand],
            PartGroup::Head => &[Part::Head],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartBox {
    pub part: Part,
    pub bbox: BBox,
    /// False when the anchoring joint (or the body scale) is undetected.
    /// Invalid parts carry a 1-px square at the joint.
    pub valid: bool,
}

impl PartBox {
    fn invalid_at(part: Part, x: f64, y: f64) -> Self {
        Self {
            part,
            bbox: BBox {
                x1: x - 0.5,
                y1: y - 0.5,
                x2: x + 0.5,
                y2: y + 0.5,
            },
            valid: false,
        }
    }

    /// Placeholder for pairs whose human has no pose.
    pub fn missing(part: Part, x: f64, y: f64) -> Self {
        Self::invalid_at(part, x, y)
    }
}

/// Ten square part boxes centered on their anchoring joints. The side is
/// `gamma` times the neck-pelvis distance.
pub fn build_part_boxes(kp: &PoseKeypoints, gamma: f64) -> [PartBox; NUM_PARTS] {
    let neck = kp.neck();
    let pelvis = kp.pelvis();
    let (dx, dy) = (neck.x - pelvis.x, neck.y - pelvis.y);
    let side = gamma * sqrt(dx * dx + dy * dy);
    let scale_ok = neck.confidence >= JOINT_CONFIDENCE_MIN
        && pelvis.confidence >= JOINT_CONFIDENCE_MIN
        && side.is_finite()
        && side > 0.0;

    Part::ALL.map(|part| {
        let joint = match part.anchor() {
            Anchor::Joint(j) => kp.points[j],
            Anchor::Pelvis => pelvis,
        };
        if !scale_ok || joint.confidence < JOINT_CONFIDENCE_MIN {
            return PartBox::invalid_at(part, joint.x, joint.y);
        }
        match BBox::square(joint.x, joint.y, side) {
            Ok(bbox) => PartBox {
                part,
                bbox,
                valid: true,
            },
            Err(_) => PartBox::invalid_at(part, joint.x, joint.y),
        }
    })
}
