//! JSON-lines dataset manifests: a header line with the dataset name and
//! category table, then one image record per line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tin_core::data::{DatasetManifest, GtIndexPair, ImageRecord};
use tin_core::hoi::{BBox, Detection, HoiCategory, HoiCategoryTable, Keypoint, PoseKeypoints, NUM_KEYPOINTS, NUM_PARTS};

use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    dataset: String,
    categories: Vec<CategoryLine>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryLine {
    id: u32,
    verb: String,
    object: u32,
    no_interaction: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionLine {
    #[serde(rename = "box")]
    bbox: [f64; 4],
    class: u32,
    score: f64,
    is_human: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GtLine {
    h: usize,
    o: usize,
    hois: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageLine {
    image_id: u64,
    detections: Vec<DetectionLine>,
    keypoints: Vec<[[f64; 3]; NUM_KEYPOINTS]>,
    gt_pairs: Vec<GtLine>,
    #[serde(default)]
    features: BTreeMap<usize, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    part_features: BTreeMap<usize, Vec<Vec<f64>>>,
}

fn image_line(img: &ImageRecord) -> ImageLine {
    ImageLine {
        image_id: img.image_id,
        detections: img
            .detections
            .iter()
            .map(|d| DetectionLine {
                bbox: d.bbox.to_array(),
                class: d.class_id,
                score: d.score,
                is_human: d.is_human,
            })
            .collect(),
        keypoints: img
            .keypoints
            .iter()
            .map(|k| k.points.map(|p| [p.x, p.y, p.confidence]))
            .collect(),
        gt_pairs: img
            .gt_pairs
            .iter()
            .map(|g| GtLine {
                h: g.human,
                o: g.object,
                hois: g.hois.clone(),
            })
            .collect(),
        features: img.features.clone(),
        part_features: img
            .part_features
            .iter()
            .map(|(&k, v)| (k, v.to_vec()))
            .collect(),
    }
}

fn image_record(line: ImageLine) -> std::result::Result<ImageRecord, String> {
    let detections = line
        .detections
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let [x1, y1, x2, y2] = d.bbox;
            BBox::new(x1, y1, x2, y2)
                .and_then(|b| Detection::new(b, d.class, d.score, d.is_human))
                .map_err(|e| format!("detection {i}: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let keypoints = line
        .keypoints
        .iter()
        .map(|k| PoseKeypoints::new(k.map(|[x, y, c]| Keypoint::new(x, y, c))))
        .collect();
    let part_features = line
        .part_features
        .into_iter()
        .map(|(k, v)| {
            let n = v.len();
            <[Vec<f64>; NUM_PARTS]>::try_from(v)
                .map(|parts| (k, parts))
                .map_err(|_| format!("part_features {k}: expected {NUM_PARTS} vectors, got {n}"))
        })
        .collect::<std::result::Result<BTreeMap<_, _>, _>>()?;
    Ok(ImageRecord {
        image_id: line.image_id,
        detections,
        keypoints,
        gt_pairs: line
            .gt_pairs
            .into_iter()
            .map(|g| GtIndexPair {
                human: g.h,
                object: g.o,
                hois: g.hois,
            })
            .collect(),
        features: line.features,
        part_features,
    })
}

/// Parses a manifest. `source_name` labels error messages.
pub fn parse_manifest<R: BufRead>(reader: R, source_name: &str) -> Result<DatasetManifest> {
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (n, header) = lines.next().ok_or_else(|| err(1, "empty manifest".into()))?;
    let header: HeaderLine = serde_json::from_str(&header.map_err(|e| err(n, e.to_string()))?)
        .map_err(|e| err(n, format!("header: {e}")))?;
    let categories = HoiCategoryTable::new(
        header
            .categories
            .into_iter()
            .map(|c| HoiCategory {
                id: c.id,
                verb: c.verb,
                object: c.object,
                no_interaction: c.no_interaction,
            })
            .collect(),
    )
    .map_err(|e| err(n, e.to_string()))?;
    let mut images = Vec::new();
    for (n, line) in lines {
        let line = line.map_err(|e| err(n, e.to_string()))?;
        let parsed: ImageLine = serde_json::from_str(&line).map_err(|e| err(n, e.to_string()))?;
        let id = parsed.image_id;
        let record = image_record(parsed).map_err(|m| err(n, format!("image {id}: {m}")))?;
        images.push(record);
    }
    let manifest = DatasetManifest {
        name: header.dataset,
        categories,
        images,
    };
    manifest.validate()?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse_manifest(BufReader::new(file), &path.display().to_string())
}

pub fn write_manifest_to<W: Write>(mut w: W, m: &DatasetManifest) -> std::io::Result<()> {
    let header = HeaderLine {
        dataset: m.name.clone(),
        categories: m
            .categories
            .iter()
            .map(|c| CategoryLine {
                id: c.id,
                verb: c.verb.clone(),
                object: c.object,
                no_interaction: c.no_interaction,
            })
            .collect(),
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for img in &m.images {
        serde_json::to_writer(&mut w, &image_line(img))?;
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_manifest(path: &Path, m: &DatasetManifest) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    write_manifest_to(BufWriter::new(file), m).map_err(Error::io(path))
}
