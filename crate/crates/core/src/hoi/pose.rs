/// COCO keypoint count.
pub const NUM_KEYPOINTS: usize = 17;

pub const NOSE: usize = 0;
pub const LEFT_SHOULDER: usize = 5;
pub const RIGHT_SHOULDER: usize = 6;
pub const LEFT_ELBOW: usize = 7;
pub const RIGHT_ELBOW: usize = 8;
pub const LEFT_WRIST: usize = 9;
pub const RIGHT_WRIST: usize = 10;
pub const LEFT_HIP: usize = 11;
pub const RIGHT_HIP: usize = 12;
pub const LEFT_KNEE: usize = 13;
pub const RIGHT_KNEE: usize = 14;
pub const LEFT_ANKLE: usize = 15;
pub const RIGHT_ANKLE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub const fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    fn midpoint(a: &Keypoint, b: &Keypoint) -> Keypoint {
        Keypoint {
            x: (a.x + b.x) / 2.0,
            y: (a.y + b.y) / 2.0,
            confidence: a.confidence.min(b.confidence),
        }
    }
}

/// Seventeen body keypoints in COCO order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseKeypoints {
    pub points: [Keypoint; NUM_KEYPOINTS],
}

impl PoseKeypoints {
    pub fn new(points: [Keypoint; NUM_KEYPOINTS]) -> Self {
        Self { points }
    }

    /// Neck, synthesized as the shoulder midpoint. Its confidence is the
    /// weaker of the two shoulders.
    pub fn neck(&self) -> Keypoint {
        Keypoint::midpoint(&self.points[LEFT_SHOULDER], &self.points[RIGHT_SHOULDER])
    }

    /// Pelvis, synthesized as the hip midpoint.
    pub fn pelvis(&self) -> Keypoint {
        Keypoint::midpoint(&self.points[LEFT_HIP], &self.points[RIGHT_HIP])
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        let mut out = *self;
        for p in out.points.iter_mut() {
            p.x += dx;
            p.y += dy;
        }
        out
    }
}
