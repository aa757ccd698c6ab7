use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::hoi::{BBox, Detection, Keypoint, PairCandidate, PoseKeypoints, NUM_KEYPOINTS, NUM_PARTS};
use crate::net::FeatureBundle;
use crate::nn::ParamStore;
use crate::raster::MapStack;

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_box(rng: &mut ChaCha8Rng) -> BBox {
    let x1 = rng.random_range(0.0..400.0);
    let y1 = rng.random_range(0.0..300.0);
    BBox::new(x1, y1, x1 + rng.random_range(20.0..200.0), y1 + rng.random_range(20.0..200.0)).unwrap()
}

pub fn random_pose(rng: &mut ChaCha8Rng, b: &BBox) -> PoseKeypoints {
    PoseKeypoints::new(core::array::from_fn::<_, NUM_KEYPOINTS, _>(|_| Keypoint {
        x: rng.random_range(b.x1..b.x2),
        y: rng.random_range(b.y1..b.y2),
        confidence: if rng.random_bool(0.85) { rng.random_range(0.2..1.0) } else { 0.0 },
    }))
}

pub fn random_pair(rng: &mut ChaCha8Rng) -> PairCandidate {
    let hb = random_box(rng);
    let h = Detection::new(hb, 0, rng.random_range(0.6..1.0), true).unwrap();
    let o = Detection::new(random_box(rng), rng.random_range(0..5), rng.random_range(0.4..1.0), false).unwrap();
    let pose = random_pose(rng, &hb);
    PairCandidate::new(0, h, 1, o).with_pose(Some(pose), 0.6)
}

pub fn random_bundle(rng: &mut ChaCha8Rng, feature_dim: usize, part_dim: usize) -> FeatureBundle {
    let pair = random_pair(rng);
    FeatureBundle {
        human: rand_vec(rng, feature_dim),
        object: rand_vec(rng, feature_dim),
        parts: core::array::from_fn::<_, NUM_PARTS, _>(|i| {
            if pair.part_boxes[i].valid {
                rand_vec(rng, part_dim)
            } else {
                alloc::vec![0.0; part_dim]
            }
        }),
        maps: MapStack::for_pair(&pair),
    }
}

/// Replaces every bias (all-zero at init) with small random values so that
/// no ReLU sits exactly on its kink.
pub fn jitter_params(store: &mut ParamStore, rng: &mut ChaCha8Rng) {
    for p in store.iter_mut() {
        if p.name.ends_with(".b") {
            for v in p.value.data_mut() {
                *v = rng.random_range(-0.1..0.1);
            }
        }
    }
}
