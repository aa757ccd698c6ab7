//! 64x64 interaction-pattern maps.
//!
//! The union box of a pair is mapped affinely onto the grid. Plane 0 marks
//! the human box, plane 1 the object box and plane 2 holds the skeleton
//! drawn with one gray level per limb segment.

use alloc::vec;
use alloc::vec::Vec;

use crate::hoi::{BBox, PairCandidate, PoseKeypoints, JOINT_CONFIDENCE_MIN};
use crate::math::{ceil, floor};

pub const MAP_SIZE: usize = 64;
pub const PLANE_LEN: usize = MAP_SIZE * MAP_SIZE;

/// Skeleton segments over COCO keypoint indices. The position in this list
/// is the segment's gray index.
pub const SKELETON: [(usize, usize); 17] = [
    (0, 1),
    (0, 2),
    (1, 3),
    (2, 4),
    (0, 5),
    (0, 6),
    (5, 7),
    (7, 9),
    (6, 8),
    (8, 10),
    (5, 11),
    (6, 12),
    (11, 13),
    (13, 15),
    (12, 14),
    (14, 16),
    (11, 12),
];

/// Gray value of skeleton segment `i`: 0.15, 0.20, ..., 0.95.
pub fn segment_gray(i: usize) -> f64 {
    (15.0 + 5.0 * i as f64) / 100.0
}

/// Human, object and pose planes, each 64x64 row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MapStack {
    data: Vec<f64>,
}

impl MapStack {
    pub const CHANNELS: usize = 3;

    pub fn new(human: &[f64], object: &[f64], pose: &[f64]) -> Self {
        let mut data = Vec::with_capacity(3 * PLANE_LEN);
        data.extend_from_slice(human);
        data.extend_from_slice(object);
        data.extend_from_slice(pose);
        debug_assert_eq!(data.len(), 3 * PLANE_LEN);
        Self { data }
    }

    pub fn for_pair(pair: &PairCandidate) -> Self {
        let [h, o] = spatial_maps(pair);
        let pose = match &pair.pose {
            Some(kp) => pose_map(kp, &pair.union),
            None => vec![0.0; PLANE_LEN],
        };
        Self::new(&h, &o, &pose)
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.data[c * PLANE_LEN..(c + 1) * PLANE_LEN]
    }

    /// First `channels` planes as one contiguous `[c, 64, 64]` buffer.
    pub fn channels(&self, channels: usize) -> &[f64] {
        &self.data[..channels * PLANE_LEN]
    }
}

struct GridMap {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl GridMap {
    fn new(union: &BBox) -> Self {
        Self {
            x0: union.x1,
            y0: union.y1,
            sx: MAP_SIZE as f64 / union.width(),
            sy: MAP_SIZE as f64 / union.height(),
        }
    }

    fn x(&self, x: f64) -> f64 {
        (x - self.x0) * self.sx
    }

    fn y(&self, y: f64) -> f64 {
        (y - self.y0) * self.sy
    }
}

/// Pixel indices along one axis whose centers lie in `[lo, hi]`, clamped to
/// the grid. A span that covers no center falls back to the pixel holding
/// its midpoint.
fn covered(lo: f64, hi: f64) -> (usize, usize) {
    let last = (MAP_SIZE - 1) as f64;
    let first = ceil(lo - 0.5).max(0.0);
    let end = floor(hi - 0.5).min(last);
    if first <= end {
        (first as usize, end as usize)
    } else {
        let mid = floor((lo + hi) / 2.0).clamp(0.0, last) as usize;
        (mid, mid)
    }
}

fn fill_box(plane: &mut [f64], grid: &GridMap, b: &BBox) {
    let (c0, c1) = covered(grid.x(b.x1), grid.x(b.x2));
    let (r0, r1) = covered(grid.y(b.y1), grid.y(b.y2));
    for r in r0..=r1 {
        plane[r * MAP_SIZE + c0..=r * MAP_SIZE + c1].fill(1.0);
    }
}

/// Binary human and object planes over the pair's union box.
pub fn spatial_maps(pair: &PairCandidate) -> [Vec<f64>; 2] {
    let grid = GridMap::new(&pair.union);
    let mut human = vec![0.0; PLANE_LEN];
    let mut object = vec![0.0; PLANE_LEN];
    fill_box(&mut human, &grid, &pair.human.bbox);
    fill_box(&mut object, &grid, &pair.object.bbox);
    [human, object]
}

/// Integer line from `p0` to `p1` (both inclusive), clipped to the grid.
fn draw_line(plane: &mut [f64], p0: (i64, i64), p1: (i64, i64), value: f64) {
    let (mut x, mut y) = p0;
    let dx = (p1.0 - x).abs();
    let dy = -(p1.1 - y).abs();
    let sx = if x < p1.0 { 1 } else { -1 };
    let sy = if y < p1.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let n = MAP_SIZE as i64;
    loop {
        if (0..n).contains(&x) && (0..n).contains(&y) {
            plane[(y * n + x) as usize] = value;
        }
        if x == p1.0 && y == p1.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Far-off joints are not drawn; keeps line traversal bounded.
const MAX_GRID_COORD: f64 = 4096.0;

/// Skeleton plane: 1-px lines, one gray level per segment, later segments
/// overwrite earlier ones. Segments touching an undetected joint are skipped.
pub fn pose_map(kp: &PoseKeypoints, union: &BBox) -> Vec<f64> {
    let grid = GridMap::new(union);
    let mut plane = vec![0.0; PLANE_LEN];
    let to_grid = |j: usize| {
        let p = kp.points[j];
        let (gx, gy) = (floor(grid.x(p.x)), floor(grid.y(p.y)));
        if gx.abs() > MAX_GRID_COORD || gy.abs() > MAX_GRID_COORD || !gx.is_finite() || !gy.is_finite() {
            None
        } else {
            Some((gx as i64, gy as i64))
        }
    };
    for (i, &(a, b)) in SKELETON.iter().enumerate() {
        if kp.points[a].confidence < JOINT_CONFIDENCE_MIN || kp.points[b].confidence < JOINT_CONFIDENCE_MIN {
            continue;
        }
        if let (Some(p0), Some(p1)) = (to_grid(a), to_grid(b)) {
            draw_line(&mut plane, p0, p1, segment_gray(i));
        }
    }
    plane
}
