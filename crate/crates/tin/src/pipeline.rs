//! The five pipeline stages over a working directory.
//!
//! Files, relative to the data or run directory:
//!
//! | stage   | writes |
//! |---------|--------|
//! | synth   | `{name}_train.jsonl`, `{name}_test.jsonl` |
//! | train   | `model.ckpt`, `loss.csv`, `config.toml` |
//! | infer   | `predictions.jsonl`, `d_scores.json`, `suppression.txt` |
//! | eval    | `eval.txt`, `eval.json` |
//! | inspect | `lis_curve.csv`, `patterns.txt` |

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use tin_core::classifier::TrainingMode;
use tin_core::config::{RunConfig, Stage};
use tin_core::data::{
    evaluate, infer_dataset, synthetic_generate, train_classifier, train_discriminator, train_joint, DatasetManifest, EpochLog,
    EvalSummary, FeatureProvider, PairPrediction, PreparedDataset, TinModel, Vocabulary,
};
use tin_core::eval::part_pattern_table;

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::ConfigFile;
use crate::dump::{read_d_scores, read_predictions, rebuild_predictions, write_d_scores, write_predictions};
use crate::manifest::{read_manifest, write_manifest};
use crate::report::{eval_json, eval_table, lis_curve, pattern_table, suppression_table, write_lis_curve, write_loss_csv};
use crate::{Error, Result};

pub const CHECKPOINT: &str = "model.ckpt";
pub const LOSSES: &str = "loss.csv";
pub const RESOLVED_CONFIG: &str = "config.toml";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const D_SCORES: &str = "d_scores.json";
pub const SUPPRESSION: &str = "suppression.txt";
pub const EVAL_TABLE: &str = "eval.txt";
pub const EVAL_JSON: &str = "eval.json";
pub const LIS_CURVE: &str = "lis_curve.csv";
pub const PATTERNS: &str = "patterns.txt";
/// Points of the dumped LIS curve.
pub const LIS_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

pub fn manifest_path(dir: &Path, name: &str, split: Split) -> PathBuf {
    let s = match split {
        Split::Train => "train",
        Split::Test => "test",
    };
    dir.join(format!("{name}_{s}.jsonl"))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(Error::io(path))
}

/// Datasets the run touches, in first-use order.
fn dataset_names(cfg: &RunConfig) -> Vec<String> {
    let mut seen = BTreeSet::new();
    cfg.d_train
        .iter()
        .chain(std::iter::once(&cfg.c_train))
        .filter(|n| seen.insert(n.as_str()))
        .cloned()
        .collect()
}

/// Generates the train and test split of every synthetic dataset the run
/// names. Returns the written paths.
pub fn synth(cfg: &RunConfig, data_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(data_dir)?;
    let mut written = Vec::new();
    for name in dataset_names(cfg) {
        let vocab = Vocabulary::from_name(&name)
            .ok_or_else(|| Error::Config(format!("no synthetic generator for dataset {name:?}; use A or B")))?;
        for (split, test) in [(Split::Train, false), (Split::Test, true)] {
            let (m, _) = synthetic_generate(&cfg.synth_spec(vocab, test), cfg.synth_seed(vocab, test))?;
            let path = manifest_path(data_dir, &name, split);
            write_manifest(&path, &m)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Empty model for the run, labelled with the classifier dataset's
/// categories.
pub fn build_model(cfg: &RunConfig, c_data: &DatasetManifest) -> Result<TinModel> {
    let stage = match cfg.mode {
        TrainingMode::Joint => Stage::InitJoint,
        TrainingMode::Transfer => Stage::InitTransfer,
    };
    Ok(TinModel::new(cfg.net, cfg.fusion, c_data.categories.clone(), cfg.mode, cfg.seed_for(stage))?)
}

/// Per-epoch losses tagged with the phase that produced them.
pub type LossLog = Vec<(&'static str, EpochLog)>;

/// Trains in memory. Joint mode runs one loop on the classifier dataset;
/// transfer mode trains D on every `d_train` set, then C alone.
pub fn train_model(
    cfg: &RunConfig,
    d_sets: &[DatasetManifest],
    c_set: &DatasetManifest,
    mut progress: impl FnMut(&str, &EpochLog),
) -> Result<(TinModel, LossLog)> {
    let provider = FeatureProvider::new(cfg.feature_spec())?;
    let tc = cfg.train_config();
    let mut model = build_model(cfg, c_set)?;
    let mut log = Vec::new();
    let c_prep = PreparedDataset::new(c_set, &tc);
    match cfg.mode {
        TrainingMode::Joint => {
            train_joint(&mut model, &c_prep, &provider, &tc, |l| {
                progress("joint", l);
                log.push(("joint", *l));
            })?;
        }
        TrainingMode::Transfer => {
            let preps: Vec<PreparedDataset<'_>> = d_sets.iter().map(|m| PreparedDataset::new(m, &tc)).collect();
            let refs: Vec<&PreparedDataset<'_>> = preps.iter().collect();
            train_discriminator(&mut model, &refs, &provider, &tc, |l| {
                progress("discriminator", l);
                log.push(("discriminator", *l));
            })?;
            train_classifier(&mut model, &c_prep, &provider, &tc, |l| {
                progress("classifier", l);
                log.push(("classifier", *l));
            })?;
        }
    }
    Ok((model, log))
}

/// Reads the training manifests, trains, and writes the checkpoint, the
/// loss CSV and the resolved configuration into `run_dir`.
pub fn train(cfg: &RunConfig, data_dir: &Path, run_dir: &Path, progress: impl FnMut(&str, &EpochLog)) -> Result<LossLog> {
    ensure_dir(run_dir)?;
    let d_sets = cfg
        .d_train
        .iter()
        .map(|n| read_manifest(&manifest_path(data_dir, n, Split::Train)))
        .collect::<Result<Vec<_>>>()?;
    let c_set = read_manifest(&manifest_path(data_dir, &cfg.c_train, Split::Train))?;
    let (model, log) = train_model(cfg, &d_sets, &c_set, progress)?;
    save_checkpoint(&run_dir.join(CHECKPOINT), &model.store)?;
    write_loss_csv(&run_dir.join(LOSSES), &log)?;
    write_text(&run_dir.join(RESOLVED_CONFIG), &ConfigFile::from(cfg).to_toml())?;
    Ok(log)
}

pub fn load_model(cfg: &RunConfig, test: &DatasetManifest, run_dir: &Path) -> Result<TinModel> {
    let mut model = build_model(cfg, test)?;
    load_checkpoint(&run_dir.join(CHECKPOINT), &mut model.store)?;
    Ok(model)
}

/// Scores the classifier dataset's test split with a trained model.
pub fn infer_model(cfg: &RunConfig, model: &TinModel, test: &DatasetManifest) -> Result<Vec<PairPrediction>> {
    let provider = FeatureProvider::new(cfg.feature_spec())?;
    Ok(infer_dataset(model, test, &provider, &cfg.infer)?)
}

/// Writes the prediction dump, the discriminator scores and the
/// suppression table.
pub fn infer(cfg: &RunConfig, data_dir: &Path, run_dir: &Path) -> Result<Vec<PairPrediction>> {
    let test = read_manifest(&manifest_path(data_dir, &cfg.c_train, Split::Test))?;
    let model = load_model(cfg, &test, run_dir)?;
    let preds = infer_model(cfg, &model, &test)?;
    write_predictions(&run_dir.join(PREDICTIONS), &preds)?;
    write_d_scores(&run_dir.join(D_SCORES), &preds)?;
    let nis = preds.iter().fold(tin_core::suppression::NisReport::default(), |mut r, p| {
        r.add(p.retained, p.interactive);
        r
    });
    let alpha = cfg.infer.switches.effective_alpha();
    write_text(&run_dir.join(SUPPRESSION), &suppression_table(&nis, alpha))?;
    Ok(preds)
}

fn load_dumped(cfg: &RunConfig, data_dir: &Path, run_dir: &Path) -> Result<(DatasetManifest, Vec<PairPrediction>)> {
    let test = read_manifest(&manifest_path(data_dir, &cfg.c_train, Split::Test))?;
    let lines = read_predictions(&run_dir.join(PREDICTIONS))?;
    let scores = read_d_scores(&run_dir.join(D_SCORES))?;
    let preds = rebuild_predictions(&test, &lines, &scores, &cfg.infer)?;
    Ok((test, preds))
}

/// Evaluates the dumps in `run_dir` and writes the text and JSON reports.
pub fn eval(cfg: &RunConfig, data_dir: &Path, run_dir: &Path) -> Result<EvalSummary> {
    let (test, preds) = load_dumped(cfg, data_dir, run_dir)?;
    let summary = evaluate(&test, &preds, cfg.infer.iou_min);
    write_text(&run_dir.join(EVAL_TABLE), &eval_table(&test.name, &summary, &test.categories))?;
    write_text(&run_dir.join(EVAL_JSON), &eval_json(&test.name, &summary, &test.categories))?;
    Ok(summary)
}

/// Dumps the LIS curve and, when discriminator scores exist in `run_dir`,
/// the part-pattern table.
pub fn inspect(cfg: &RunConfig, data_dir: &Path, run_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(run_dir)?;
    let curve = run_dir.join(LIS_CURVE);
    write_lis_curve(&curve, &lis_curve(&cfg.infer.lis, LIS_POINTS))?;
    let mut written = vec![curve];
    if run_dir.join(PREDICTIONS).exists() && run_dir.join(D_SCORES).exists() {
        let (test, preds) = load_dumped(cfg, data_dir, run_dir)?;
        let rows = part_pattern_table(preds.iter().flat_map(|p| {
            p.gt_hois
                .iter()
                .filter(|&&c| !test.categories.is_no_interaction(c))
                .map(move |&c| (c, &p.p_part))
        }));
        let path = run_dir.join(PATTERNS);
        write_text(&path, &pattern_table(&rows, &test.categories))?;
        written.push(path);
    }
    Ok(written)
}

/// Loads a configuration file if given, else the defaults.
pub fn config_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => crate::config::load_config(p),
        None => Ok(ConfigFile::default()),
    }
}
