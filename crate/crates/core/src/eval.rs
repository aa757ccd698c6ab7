//! Role mAP, interactiveness AP, NIS reduction and the part-pattern table.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::hoi::{iou, BBox, PartGroup, NUM_PARTS};
use crate::suppression::NisReport;

/// One scored (or ground-truth) human-object-category triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    pub image_id: u64,
    pub category: u32,
    pub human: BBox,
    pub object: BBox,
    /// Ignored for ground truth.
    pub score: f64,
}

/// Per-category AP and their mean.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapReport {
    /// Categories with at least one ground-truth pair.
    pub per_category: BTreeMap<u32, f64>,
    pub mean: f64,
}

/// All-point interpolated AP from TP flags in ranked order.
pub fn average_precision(tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut rec = Vec::with_capacity(tp.len() + 2);
    let mut prec = Vec::with_capacity(tp.len() + 2);
    rec.push(0.0);
    prec.push(0.0);
    let mut hits = 0usize;
    for (i, &t) in tp.iter().enumerate() {
        if t {
            hits += 1;
        }
        rec.push(hits as f64 / n_gt as f64);
        prec.push(hits as f64 / (i + 1) as f64);
    }
    rec.push(1.0);
    prec.push(0.0);
    for i in (0..prec.len() - 1).rev() {
        prec[i] = prec[i].max(prec[i + 1]);
    }
    (1..rec.len()).map(|i| (rec[i] - rec[i - 1]) * prec[i]).sum()
}

/// Greedy TP assignment: predictions in descending score order (input order
/// on ties) each claim the unmatched gt pair with the best min-IoU, if that
/// reaches `iou_min` on both boxes.
fn match_category(preds: &[&EvalRecord], gts: &[&EvalRecord], iou_min: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score));
    let mut used = vec![false; gts.len()];
    let mut tp = Vec::with_capacity(preds.len());
    for &i in &order {
        let p = preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if used[j] || g.image_id != p.image_id {
                continue;
            }
            let q = iou(&p.human, &g.human).min(iou(&p.object, &g.object));
            if q >= iou_min && best.is_none_or(|(_, b)| q > b) {
                best = Some((j, q));
            }
        }
        if let Some((j, _)) = best {
            used[j] = true;
        }
        tp.push(best.is_some());
    }
    tp
}

/// Role mAP: a detection counts only if both its boxes match.
pub fn role_map(predictions: &[EvalRecord], gt: &[EvalRecord], iou_min: f64) -> MapReport {
    let mut gt_by_cat: BTreeMap<u32, Vec<&EvalRecord>> = BTreeMap::new();
    for g in gt {
        gt_by_cat.entry(g.category).or_default().push(g);
    }
    let mut pred_by_cat: BTreeMap<u32, Vec<&EvalRecord>> = BTreeMap::new();
    for p in predictions {
        if gt_by_cat.contains_key(&p.category) {
            pred_by_cat.entry(p.category).or_default().push(p);
        }
    }
    let mut per_category = BTreeMap::new();
    for (cat, gts) in &gt_by_cat {
        let preds = pred_by_cat.get(cat).map(Vec::as_slice).unwrap_or(&[]);
        let tp = match_category(preds, gts, iou_min);
        per_category.insert(*cat, average_precision(&tp, gts.len()));
    }
    let mean = if per_category.is_empty() {
        0.0
    } else {
        per_category.values().sum::<f64>() / per_category.len() as f64
    };
    MapReport { per_category, mean }
}

/// Binary interactiveness AP: `role_map` over a single category.
pub fn interactiveness_ap(predictions: &[EvalRecord], gt: &[EvalRecord], iou_min: f64) -> f64 {
    let relabel = |r: &EvalRecord| EvalRecord { category: 0, ..*r };
    let p: Vec<EvalRecord> = predictions.iter().map(relabel).collect();
    let g: Vec<EvalRecord> = gt.iter().map(relabel).collect();
    if g.is_empty() {
        return 0.0;
    }
    role_map(&p, &g, iou_min).mean
}

/// Percentage of non-interactive edges removed by NIS.
pub fn reduction_stats(retained: &[bool], labels: &[bool]) -> Option<f64> {
    NisReport::tally(retained, labels).reduction_percent()
}

/// Min-max scaled average part interactiveness of one HOI category, in
/// [`PartGroup`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternRow {
    pub category: u32,
    pub values: [f64; 6],
    /// Number of positive pairs averaged.
    pub pairs: usize,
    /// All six averages were equal; `values` are then all zero.
    pub degenerate: bool,
}

impl PatternRow {
    pub fn value(&self, g: PartGroup) -> f64 {
        self.values[g.index()]
    }
}

/// Averages `p_part` per category over the given positive pairs, merges
/// left/right parts and rescales each row to `[0, 1]`. Categories without
/// pairs are skipped.
pub fn part_pattern_table<'a, I>(samples: I) -> Vec<PatternRow>
where
    I: IntoIterator<Item = (u32, &'a [f64; NUM_PARTS])>,
{
    let mut sums: BTreeMap<u32, ([f64; NUM_PARTS], usize)> = BTreeMap::new();
    for (cat, p) in samples {
        let e = sums.entry(cat).or_insert(([0.0; NUM_PARTS], 0));
        for (a, b) in e.0.iter_mut().zip(p) {
            *a += b;
        }
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(category, (sum, n))| {
            let mean = sum.map(|s| s / n as f64);
            let groups = PartGroup::ALL.map(|g| {
                let parts = g.parts();
                parts.iter().map(|p| mean[p.index()]).sum::<f64>() / parts.len() as f64
            });
            let (values, degenerate) = min_max_scale(groups);
            PatternRow {
                category,
                values,
                pairs: n,
                degenerate,
            }
        })
        .collect()
}

fn min_max_scale(v: [f64; 6]) -> ([f64; 6], bool) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return ([0.0; 6], true);
    }
    let mut out = v.map(|x| (x - lo) / (hi - lo));
    // pin the extremes exactly
    for (o, x) in out.iter_mut().zip(v) {
        if x == hi {
            *o = 1.0;
        } else if x == lo {
            *o = 0.0;
        }
    }
    (out, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rec(image_id: u64, category: u32, h: [f64; 4], o: [f64; 4], score: f64) -> EvalRecord {
        EvalRecord {
            image_id,
            category,
            human: BBox::new(h[0], h[1], h[2], h[3]).unwrap(),
            object: BBox::new(o[0], o[1], o[2], o[3]).unwrap(),
            score,
        }
    }

    const H: [f64; 4] = [0.0, 0.0, 10.0, 10.0];
    const O: [f64; 4] = [20.0, 0.0, 30.0, 10.0];

    #[test]
    fn exact_and_missed() {
        let g = [rec(1, 3, H, O, 0.0)];
        assert_eq!(role_map(&[rec(1, 3, H, O, 0.9)], &g, 0.5).mean, 1.0);
        // object IoU 0.4: intersection 4/7 of width 10 vs union
        let o = [20.0 + 30.0 / 7.0, 0.0, 30.0 + 30.0 / 7.0, 10.0];
        let q = iou(&BBox::new(o[0], o[1], o[2], o[3]).unwrap(), &BBox::new(O[0], O[1], O[2], O[3]).unwrap());
        assert!((q - 0.4).abs() < 1e-9);
        assert_eq!(role_map(&[rec(1, 3, H, o, 0.9)], &g, 0.5).mean, 0.0);
        assert_eq!(role_map(&[rec(2, 3, H, O, 0.9)], &g, 0.5).mean, 0.0);
        assert_eq!(role_map(&[rec(1, 4, H, O, 0.9)], &g, 0.5).mean, 0.0);
    }

    #[test]
    fn duplicate_prediction_is_false_positive() {
        let g = [rec(1, 0, H, O, 0.0)];
        let p = [rec(1, 0, H, O, 0.9), rec(1, 0, H, O, 0.8)];
        assert_eq!(role_map(&p, &g, 0.5).mean, 1.0);
        let p = [rec(1, 0, H, O, 0.7), rec(1, 0, [50.0, 50.0, 60.0, 60.0], O, 0.8)];
        assert_eq!(role_map(&p, &g, 0.5).mean, 0.5);
    }

    #[test]
    fn mean_skips_categories_without_gt() {
        let g = [rec(1, 0, H, O, 0.0), rec(1, 1, H, O, 0.0)];
        let p = [rec(1, 0, H, O, 0.9), rec(1, 5, H, O, 0.9)];
        let r = role_map(&p, &g, 0.5);
        assert_eq!(r.per_category.len(), 2);
        assert_eq!(r.mean, 0.5);
    }

    #[test]
    fn interactiveness_reversed_scores() {
        // two positives ranked below two negatives: TPs at ranks 3 and 4
        let g = [rec(1, 0, H, O, 0.0), rec(2, 0, H, O, 0.0)];
        let far = [100.0, 100.0, 110.0, 110.0];
        let p = [
            rec(1, 0, H, O, 0.1),
            rec(2, 0, H, O, 0.2),
            rec(1, 0, far, O, 0.8),
            rec(2, 0, far, O, 0.9),
        ];
        let ap = interactiveness_ap(&p, &g, 0.5);
        // precision 1/3 then 1/2; the envelope lifts the first to 1/2
        assert!((ap - 0.5).abs() < 1e-12);
        let perfect = [rec(1, 0, H, O, 0.9), rec(2, 0, H, O, 0.8), rec(1, 0, far, O, 0.1)];
        assert_eq!(interactiveness_ap(&perfect, &g, 0.5), 1.0);
    }

    /// Independent AP: ranks by repeated selection, matches by scanning all
    /// gt in index order, then integrates `max_{j >= k} precision_j` over
    /// the true positives.
    fn oracle_ap(preds: &[EvalRecord], gts: &[EvalRecord], cat: u32) -> f64 {
        let gts: Vec<&EvalRecord> = gts.iter().filter(|g| g.category == cat).collect();
        let mut left: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].category == cat).collect();
        let mut used = vec![false; gts.len()];
        let mut flags = Vec::new();
        while !left.is_empty() {
            let mut pick = 0;
            for k in 1..left.len() {
                if preds[left[k]].score > preds[left[pick]].score {
                    pick = k;
                }
            }
            let p = &preds[left.remove(pick)];
            let mut best = None;
            let mut best_q = -1.0;
            for (j, g) in gts.iter().enumerate() {
                let ok = !used[j] && g.image_id == p.image_id;
                let q = iou(&p.human, &g.human).min(iou(&p.object, &g.object));
                if ok && q >= 0.5 && q > best_q {
                    best = Some(j);
                    best_q = q;
                }
            }
            if let Some(j) = best {
                used[j] = true;
            }
            flags.push(best.is_some());
        }
        let mut hits = 0.0;
        let prec: Vec<f64> = flags
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                if t {
                    hits += 1.0;
                }
                hits / (i + 1) as f64
            })
            .collect();
        let mut ap = 0.0;
        for k in 0..flags.len() {
            if flags[k] {
                ap += prec[k..].iter().copied().fold(0.0, f64::max) / gts.len() as f64;
            }
        }
        ap
    }

    fn jitter(rng: &mut ChaCha8Rng, b: [f64; 4]) -> [f64; 4] {
        let d = rng.random_range(0.0..6.0);
        let dx = rng.random_range(-d..d);
        let dy = rng.random_range(-d..d);
        [b[0] + dx, b[1] + dy, b[2] + dx, b[3] + dy]
    }

    #[test]
    fn matches_bruteforce_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n_gt = rng.random_range(1..=3);
            let n_pred = rng.random_range(0..=6);
            let gts: Vec<EvalRecord> = (0..n_gt)
                .map(|_| rec(rng.random_range(0..2), 0, jitter(&mut rng, H), jitter(&mut rng, O), 0.0))
                .collect();
            let preds: Vec<EvalRecord> = (0..n_pred)
                .map(|_| {
                    let g = gts[rng.random_range(0..n_gt)];
                    let score = (rng.random_range(0..5) as f64) / 4.0;
                    let h = jitter(&mut rng, g.human.to_array());
                    let o = jitter(&mut rng, g.object.to_array());
                    rec(g.image_id, 0, h, o, score)
                })
                .collect();
            let got = role_map(&preds, &gts, 0.5).mean;
            let want = oracle_ap(&preds, &gts, 0);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn ap_invariant_to_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gts: Vec<EvalRecord> = (0..3).map(|i| rec(i, 0, H, O, 0.0)).collect();
        let preds: Vec<EvalRecord> = (0..6)
            .map(|i| rec(i % 4, 0, jitter(&mut rng, H), jitter(&mut rng, O), rng.random_range(0.0..1.0)))
            .collect();
        let moved: Vec<EvalRecord> = preds
            .iter()
            .map(|p| EvalRecord {
                score: crate::math::exp(3.0 * p.score) - 7.0,
                ..*p
            })
            .collect();
        assert_eq!(role_map(&preds, &gts, 0.5), role_map(&moved, &gts, 0.5));
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduction_stats(&[true, true], &[false, true]), Some(0.0));
        assert_eq!(reduction_stats(&[false, true], &[false, true]), Some(100.0));
        assert_eq!(reduction_stats(&[false, true, true, false], &[false, false, false, true]), Some(100.0 / 3.0));
        assert_eq!(reduction_stats(&[true], &[true]), None);
    }

    #[test]
    fn pattern_rows() {
        let mut p = [0.2; NUM_PARTS];
        p[3] = 0.9;
        p[4] = 0.7;
        let flat = [0.5; NUM_PARTS];
        let mut two = [0.1; NUM_PARTS];
        two[0] = 0.6;
        let rows = part_pattern_table([(7, &p), (7, &p), (2, &flat), (4, &two)]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].category, 2);
        assert!(rows[0].degenerate && rows[0].values == [0.0; 6]);
        let two_row = &rows[1];
        assert_eq!(two_row.value(PartGroup::Head), 1.0);
        assert!(two_row.values.iter().all(|&v| v == 0.0 || v == 1.0));
        let r = &rows[2];
        assert_eq!(r.pairs, 2);
        assert_eq!(r.value(PartGroup::Hands), 1.0);
        assert_eq!(r.values.iter().copied().fold(f64::MAX, f64::min), 0.0);
    }
}
