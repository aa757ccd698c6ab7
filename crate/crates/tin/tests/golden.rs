//! Raster planes against golden dumps written by `golden/oracle.py`.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;
use tin::report::format_plane;
use tin_core::hoi::{BBox, Detection, Keypoint, PairCandidate, PoseKeypoints};
use tin_core::raster::MapStack;

#[derive(Deserialize)]
struct Fixture {
    name: String,
    human: [f64; 4],
    object: [f64; 4],
    keypoints: Vec<[f64; 3]>,
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn maps(f: &Fixture) -> MapStack {
    let bbox = |b: [f64; 4]| BBox::new(b[0], b[1], b[2], b[3]).unwrap();
    let pts: [Keypoint; 17] = std::array::from_fn(|j| {
        let [x, y, c] = f.keypoints[j];
        Keypoint::new(x, y, c)
    });
    let pair = PairCandidate::new(
        0,
        Detection::new(bbox(f.human), 0, 0.9, true).unwrap(),
        1,
        Detection::new(bbox(f.object), 1, 0.9, false).unwrap(),
    )
    .with_pose(Some(PoseKeypoints::new(pts)), 0.6);
    MapStack::for_pair(&pair)
}

#[test]
fn planes_match_golden_files_byte_for_byte() {
    let fixtures: Vec<Fixture> =
        serde_json::from_str(&fs::read_to_string(golden_dir().join("fixtures.json")).unwrap()).unwrap();
    assert_eq!(fixtures.len(), 5);
    for f in &fixtures {
        let m = maps(f);
        for (c, kind) in ["human", "object", "pose"].iter().enumerate() {
            let path = golden_dir().join(format!("{}.{kind}.txt", f.name));
            let want = fs::read(&path).unwrap();
            let got = format_plane(m.plane(c));
            assert!(got.as_bytes() == want.as_slice(), "{} differs", path.display());
        }
    }
}

#[test]
fn dump_layout() {
    let plane = vec![0.125; 64 * 64];
    let s = format_plane(&plane);
    assert_eq!(s.lines().count(), 64);
    assert!(s.lines().all(|l| l.split(' ').count() == 64 && l.split(' ').all(|v| v == "0.12")));
    assert!(s.ends_with('\n'));
}
