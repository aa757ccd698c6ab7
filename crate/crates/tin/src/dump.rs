//! Per-pair output files: the prediction dump and the discriminator
//! scores dump.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tin_core::data::{DatasetManifest, InferConfig, PairPrediction};
use tin_core::hoi::NUM_PARTS;

use crate::{Error, Result};

/// One line of the prediction dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionLine {
    pub image_id: u64,
    pub h: usize,
    pub o: usize,
    pub s_inst: f64,
    pub s_lis: f64,
    /// Final score by category id.
    pub scores: BTreeMap<u32, f64>,
}

/// Discriminator outputs of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DScoreLine {
    pub image_id: u64,
    pub h: usize,
    pub o: usize,
    pub s_part: [f64; NUM_PARTS],
    pub p_part: [f64; NUM_PARTS],
    pub s_inst: f64,
    pub p_inst: f64,
    pub s_agg: f64,
    pub s_lis: f64,
    pub retained: bool,
}

impl From<&PairPrediction> for PredictionLine {
    fn from(p: &PairPrediction) -> Self {
        Self {
            image_id: p.image_id,
            h: p.h,
            o: p.o,
            s_inst: p.s_inst,
            s_lis: p.s_lis,
            scores: p.scores.iter().copied().collect(),
        }
    }
}

impl From<&PairPrediction> for DScoreLine {
    fn from(p: &PairPrediction) -> Self {
        Self {
            image_id: p.image_id,
            h: p.h,
            o: p.o,
            s_part: p.s_part,
            p_part: p.p_part,
            s_inst: p.s_inst,
            p_inst: p.p_inst,
            s_agg: p.s_agg,
            s_lis: p.s_lis,
            retained: p.retained,
        }
    }
}

pub fn write_predictions(path: &Path, preds: &[PairPrediction]) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    for p in preds {
        serde_json::to_writer(&mut w, &PredictionLine::from(p))?;
        writeln!(w).map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionLine>> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_d_scores(path: &Path, preds: &[PairPrediction]) -> Result<()> {
    let lines: Vec<DScoreLine> = preds.iter().map(DScoreLine::from).collect();
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &lines)?;
    writeln!(w).map_err(Error::io(path))?;
    w.flush().map_err(Error::io(path))
}

pub fn read_d_scores(path: &Path) -> Result<Vec<DScoreLine>> {
    let file = File::open(path).map_err(Error::io(path))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Rebuilds evaluable predictions from the two dumps, taking boxes and
/// labels from the test manifest. Classifier scores before composition are
/// not dumped and come back empty.
pub fn rebuild_predictions(
    test: &DatasetManifest,
    preds: &[PredictionLine],
    d_scores: &[DScoreLine],
    cfg: &InferConfig,
) -> Result<Vec<PairPrediction>> {
    let scores: HashMap<(u64, usize, usize), &DScoreLine> = d_scores.iter().map(|d| ((d.image_id, d.h, d.o), d)).collect();
    let mut edges = HashMap::new();
    for img in &test.images {
        for e in img.labelled_pairs(&test.categories, cfg.thresholds, cfg.gamma, cfg.iou_min) {
            edges.insert((img.image_id, e.human_idx, e.object_idx), e);
        }
    }
    preds
        .iter()
        .map(|p| {
            let key = (p.image_id, p.h, p.o);
            let missing = |what: &str| {
                Error::Config(format!(
                    "image {} pair ({}, {}) has no {what}",
                    p.image_id, p.h, p.o
                ))
            };
            let e = edges.get(&key).ok_or_else(|| missing("edge in the test manifest"))?;
            let d = scores.get(&key).ok_or_else(|| missing("discriminator scores"))?;
            Ok(PairPrediction {
                image_id: p.image_id,
                h: p.h,
                o: p.o,
                human: e.human.bbox,
                object: e.object.bbox,
                s_part: d.s_part,
                p_part: d.p_part,
                s_inst: d.s_inst,
                p_inst: d.p_inst,
                s_agg: d.s_agg,
                s_lis: d.s_lis,
                retained: d.retained,
                s_c: Vec::new(),
                scores: p.scores.iter().map(|(&c, &s)| (c, s)).collect(),
                interactive: e.gt_interactive == Some(true),
                gt_hois: e.gt_hois.clone().unwrap_or_default(),
            })
        })
        .collect()
}
