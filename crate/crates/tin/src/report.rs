//! Human-readable tables, the JSON evaluation report and CSV series.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use tin_core::data::{EpochLog, EvalSummary};
use tin_core::eval::PatternRow;
use tin_core::hoi::{HoiCategoryTable, PartGroup};
use tin_core::raster::MAP_SIZE;
use tin_core::suppression::{lis_p, LisParams, NisReport};

use crate::{Error, Result};

fn label(categories: &HoiCategoryTable, id: u32) -> String {
    match categories.by_id(id) {
        Some(c) => format!("{} {}", c.verb, c.object),
        None => format!("#{id}"),
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

/// Edge counts before and after non-interaction suppression.
pub fn suppression_table(r: &NisReport, alpha: f64) -> String {
    let mut s = String::new();
    writeln!(s, "alpha {alpha:.3}").unwrap();
    writeln!(s, "{:<16}{:>10}{:>12}{:>10}", "edges", "total", "suppressed", "kept").unwrap();
    for (name, total, gone) in [
        ("interactive", r.interactive, r.suppressed_interactive),
        ("non-interactive", r.non_interactive, r.suppressed_non_interactive),
        ("all", r.total, r.suppressed),
    ] {
        writeln!(s, "{name:<16}{total:>10}{gone:>12}{:>10}", total - gone).unwrap();
    }
    writeln!(s, "reduction {}%", opt(r.reduction_percent(), 2)).unwrap();
    writeln!(s, "interactive retention {}", opt(r.interactive_retention(), 4)).unwrap();
    s
}

/// Min-max scaled part interactiveness, one row per category.
pub fn pattern_table(rows: &[PatternRow], categories: &HoiCategoryTable) -> String {
    let mut s = format!("{:<20}{:>7}", "category", "pairs");
    for g in PartGroup::ALL {
        write!(s, "{:>11}", g.name()).unwrap();
    }
    s.push('\n');
    for r in rows {
        write!(s, "{:<20}{:>7}", label(categories, r.category), r.pairs).unwrap();
        for v in r.values {
            write!(s, "{v:>11.3}").unwrap();
        }
        if r.degenerate {
            s.push_str("  (flat)");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Serialize)]
struct CategoryAp {
    id: u32,
    verb: String,
    object: u32,
    ap: f64,
}

#[derive(Debug, Serialize)]
struct PatternJson {
    category: u32,
    pairs: usize,
    degenerate: bool,
    #[serde(flatten)]
    values: std::collections::BTreeMap<&'static str, f64>,
}

#[derive(Debug, Serialize)]
struct EvalJson {
    dataset: String,
    per_category: Vec<CategoryAp>,
    map: f64,
    interactiveness_ap: f64,
    reduction_percent: Option<f64>,
    interactive_retention: Option<f64>,
    edges: usize,
    suppressed: usize,
    patterns: Vec<PatternJson>,
}

pub fn eval_json(dataset: &str, e: &EvalSummary, categories: &HoiCategoryTable) -> String {
    let report = EvalJson {
        dataset: dataset.to_string(),
        per_category: e
            .role
            .per_category
            .iter()
            .map(|(&id, &ap)| {
                let c = categories.by_id(id);
                CategoryAp {
                    id,
                    verb: c.map(|c| c.verb.clone()).unwrap_or_default(),
                    object: c.map_or(0, |c| c.object),
                    ap,
                }
            })
            .collect(),
        map: e.role.mean,
        interactiveness_ap: e.interactiveness_ap,
        reduction_percent: e.nis.reduction_percent(),
        interactive_retention: e.nis.interactive_retention(),
        edges: e.nis.total,
        suppressed: e.nis.suppressed,
        patterns: e
            .patterns
            .iter()
            .map(|r| PatternJson {
                category: r.category,
                pairs: r.pairs,
                degenerate: r.degenerate,
                values: PartGroup::ALL.iter().map(|&g| (g.name(), r.value(g))).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

pub fn eval_table(dataset: &str, e: &EvalSummary, categories: &HoiCategoryTable) -> String {
    let mut s = format!("dataset {dataset}\n{:<20}{:>10}\n", "category", "AP");
    for (&id, ap) in &e.role.per_category {
        writeln!(s, "{:<20}{ap:>10.4}", label(categories, id)).unwrap();
    }
    writeln!(s, "{:<20}{:>10.4}", "mAP", e.role.mean).unwrap();
    writeln!(s, "{:<20}{:>10.4}", "interactiveness AP", e.interactiveness_ap).unwrap();
    writeln!(s, "{:<20}{:>10}", "reduction %", opt(e.nis.reduction_percent(), 2)).unwrap();
    s.push('\n');
    s.push_str(&pattern_table(&e.patterns, categories));
    s
}

/// `(x, P(x))` on `n` evenly spaced points of `[0, 1]`.
pub fn lis_curve(p: &LisParams, n: usize) -> Vec<(f64, f64)> {
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 / last;
            (x, lis_p(x, p))
        })
        .collect()
}

pub fn write_lis_curve(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "p"])?;
    for (x, p) in points {
        w.write_record([x.to_string(), p.to_string()])?;
    }
    w.flush().map_err(Error::io(path))
}

/// One row per epoch; `stage` names the training phase.
pub fn write_loss_csv(path: &Path, rows: &[(&str, EpochLog)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["stage", "epoch", "loss_d", "l_inst", "l_agg", "l_consistency", "loss_c", "samples", "lr"])?;
    for (stage, l) in rows {
        w.write_record([
            stage.to_string(),
            l.epoch.to_string(),
            l.loss_d.to_string(),
            l.loss_d_terms[0].to_string(),
            l.loss_d_terms[1].to_string(),
            l.loss_d_terms[2].to_string(),
            l.loss_c.to_string(),
            l.samples.to_string(),
            l.lr.to_string(),
        ])?;
    }
    w.flush().map_err(Error::io(path))
}

/// One plane as 64 lines of 64 space-separated values with two decimals.
pub fn format_plane(plane: &[f64]) -> String {
    assert_eq!(plane.len(), MAP_SIZE * MAP_SIZE, "plane size");
    let mut s = String::with_capacity(plane.len() * 5);
    for row in plane.chunks(MAP_SIZE) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}
