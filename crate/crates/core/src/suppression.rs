//! Low-grade instance suppression (LIS), non-interaction suppression (NIS)
//! and final score composition.

use alloc::format;
use alloc::vec::Vec;

use crate::math::exp;
use crate::{Error, Result};

/// Constants of the logistic `P(x) = T / (1 + e^(k - w x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LisParams {
    pub t: f64,
    pub k: f64,
    pub w: f64,
}

impl Default for LisParams {
    fn default() -> Self {
        Self {
            t: 8.4,
            k: 12.0,
            w: 10.0,
        }
    }
}

impl LisParams {
    pub fn new(t: f64, k: f64, w: f64) -> Result<Self> {
        if !(t > 0.0 && w > 0.0 && k.is_finite() && t.is_finite() && w.is_finite()) {
            return Err(Error::Config(format!("LIS needs T > 0 and w > 0, got T={t} k={k} w={w}")));
        }
        Ok(Self { t, k, w })
    }
}

/// `T / (1 + e^(k - w x))`.
pub fn lis_p(x: f64, p: &LisParams) -> f64 {
    p.t / (1.0 + exp(p.k - p.w * x))
}

/// Detection-quality weight of a pair, `P(s_h) * P(s_o)`.
pub fn lis_weight(s_h: f64, s_o: f64, p: &LisParams) -> f64 {
    lis_p(s_h, p) * lis_p(s_o, p)
}

/// Scales an interactiveness probability by the LIS weight.
pub fn modulate(p_inst: f64, weight: f64) -> f64 {
    p_inst * weight
}

/// Ablation switches for the suppression stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switches {
    pub nis: bool,
    pub lis: bool,
    /// NIS threshold on the modulated score.
    pub alpha: f64,
}

impl Default for Switches {
    fn default() -> Self {
        Self {
            nis: true,
            lis: true,
            alpha: 0.1,
        }
    }
}

impl Switches {
    /// Modulated interactiveness `s'`; with LIS off the weight is 1.
    pub fn s_lis(&self, p_inst: f64, s_h: f64, s_o: f64, lis: &LisParams) -> f64 {
        let weight = if self.lis { lis_weight(s_h, s_o, lis) } else { 1.0 };
        modulate(p_inst, weight)
    }

    /// Whether `s'` multiplies the classifier scores. Only the fully
    /// disabled configuration falls back to the bare classifier.
    pub fn applies_interactiveness(&self) -> bool {
        self.nis || self.lis
    }

    pub fn effective_alpha(&self) -> f64 {
        if self.nis {
            self.alpha
        } else {
            0.0
        }
    }
}

/// Per-edge retention mask: an edge survives iff `s' >= alpha`.
pub fn nis_filter(s_lis: &[f64], alpha: f64) -> Vec<bool> {
    s_lis.iter().map(|&s| s >= alpha).collect()
}

/// `S = S_C * s'`.
pub fn final_score(s_c: &[f64], s_prime: f64) -> Vec<f64> {
    s_c.iter().map(|v| v * s_prime).collect()
}

/// Final category scores for one edge. `candidates` are the category indices
/// eligible for the edge. A suppressed edge keeps only the no-interaction
/// ones, at their unmodulated classifier score. Returns
/// `(category index, score)` in candidate order.
pub fn edge_scores(
    s_c: &[f64],
    s_prime: f64,
    retained: bool,
    candidates: &[usize],
    no_interaction: &[bool],
    switches: &Switches,
) -> Vec<(usize, f64)> {
    let scale = if switches.applies_interactiveness() { s_prime } else { 1.0 };
    candidates
        .iter()
        .filter(|&&c| retained || no_interaction[c])
        .map(|&c| (c, if retained { s_c[c] * scale } else { s_c[c] }))
        .collect()
}

/// Edge counts before and after NIS, split by the binary labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NisReport {
    pub total: usize,
    pub interactive: usize,
    pub non_interactive: usize,
    pub suppressed: usize,
    pub suppressed_interactive: usize,
    pub suppressed_non_interactive: usize,
}

impl NisReport {
    /// Tallies a retention mask against per-edge labels.
    pub fn tally(retained: &[bool], labels: &[bool]) -> Self {
        debug_assert_eq!(retained.len(), labels.len());
        let mut r = Self::default();
        for (&keep, &pos) in retained.iter().zip(labels) {
            r.add(keep, pos);
        }
        r
    }

    pub fn add(&mut self, retained: bool, interactive: bool) {
        self.total += 1;
        if interactive {
            self.interactive += 1;
        } else {
            self.non_interactive += 1;
        }
        if !retained {
            self.suppressed += 1;
            if interactive {
                self.suppressed_interactive += 1;
            } else {
                self.suppressed_non_interactive += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &NisReport) {
        self.total += other.total;
        self.interactive += other.interactive;
        self.non_interactive += other.non_interactive;
        self.suppressed += other.suppressed;
        self.suppressed_interactive += other.suppressed_interactive;
        self.suppressed_non_interactive += other.suppressed_non_interactive;
    }

    /// Percentage of non-interactive edges removed; `None` without any.
    pub fn reduction_percent(&self) -> Option<f64> {
        (self.non_interactive > 0).then(|| 100.0 * self.suppressed_non_interactive as f64 / self.non_interactive as f64)
    }

    /// Fraction of interactive edges that survive; `None` without any.
    pub fn interactive_retention(&self) -> Option<f64> {
        (self.interactive > 0).then(|| 1.0 - self.suppressed_interactive as f64 / self.interactive as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let p = LisParams::default();
        assert!((lis_p(0.0, &p) - 8.4 / (1.0 + 12f64.exp())).abs() < 1e-12);
        assert!((lis_p(0.0, &p) - 5.1608e-5).abs() < 1e-8);
        assert!((lis_p(0.5, &p) - 8.4 / (1.0 + 7f64.exp())).abs() < 1e-12);
        assert!((lis_p(0.5, &p) - 7.653e-3).abs() < 1e-6);
        assert_eq!(lis_weight(0.0, 0.0, &p), lis_p(0.0, &p) * lis_p(0.0, &p));
    }

    #[test]
    fn strictly_increasing_on_grid() {
        let p = LisParams::default();
        let ys: Vec<f64> = (0..1000).map(|i| lis_p(i as f64 / 999.0, &p)).collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LisParams::new(0.0, 12.0, 10.0).is_err());
        assert!(LisParams::new(8.4, 12.0, -1.0).is_err());
        assert!(LisParams::new(8.4, 12.0, 10.0).is_ok());
    }

    #[test]
    fn modulation_and_final_score() {
        assert_eq!(modulate(0.3, 1.0), 0.3);
        assert_eq!(modulate(0.3, 0.0), 0.0);
        assert_eq!(final_score(&[0.8, 0.2], 0.5), [0.4, 0.1]);
        assert_eq!(final_score(&[0.8, 0.2], 1.0), [0.8, 0.2]);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(nis_filter(&[0.05, 0.2], 0.1), [false, true]);
        assert_eq!(nis_filter(&[0.0, 0.2], 0.0), [true, true]);
    }

    #[test]
    fn suppressed_edges_keep_no_interaction_categories() {
        let sw = Switches::default();
        let s_c = [0.9, 0.5, 0.7];
        let flags = [false, true, false];
        let out = edge_scores(&s_c, 0.05, false, &[0, 1, 2], &flags, &sw);
        assert_eq!(out, [(1, 0.5)]);
        let out = edge_scores(&s_c, 0.5, true, &[0, 2], &flags, &sw);
        assert_eq!(out, [(0, 0.45), (2, 0.35)]);
    }

    #[test]
    fn ablation_identities() {
        let lis = LisParams::default();
        let off = Switches {
            nis: false,
            lis: false,
            alpha: 0.1,
        };
        assert_eq!(edge_scores(&[0.9, 0.3], 0.2, true, &[0, 1], &[false; 2], &off), [(0, 0.9), (1, 0.3)]);
        let no_lis = Switches { lis: false, ..Switches::default() };
        assert_eq!(no_lis.s_lis(0.37, 0.2, 0.9, &lis), 0.37);
        let zero = Switches { alpha: 0.0, ..Switches::default() };
        let no_nis = Switches { nis: false, ..Switches::default() };
        for s in [0.0, 1e-9, 0.3] {
            assert_eq!(nis_filter(&[s], zero.effective_alpha()), nis_filter(&[s], no_nis.effective_alpha()));
        }
    }

    #[test]
    fn report_counts() {
        let r = NisReport::tally(&[true, false, false, true, false], &[true, true, false, false, false]);
        assert_eq!(r.total, 5);
        assert_eq!(r.suppressed_non_interactive, 2);
        assert_eq!(r.suppressed_interactive, 1);
        assert!((r.reduction_percent().unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(NisReport::tally(&[true], &[true]).reduction_percent(), None);
        assert_eq!(NisReport::tally(&[true, true], &[false, false]).reduction_percent(), Some(0.0));
        assert_eq!(NisReport::tally(&[false, false], &[false, false]).reduction_percent(), Some(100.0));
    }

    proptest! {
        #[test]
        fn weight_symmetric_and_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, d in 0.001f64..0.5) {
            let p = LisParams::default();
            prop_assert_eq!(lis_weight(a, b, &p), lis_weight(b, a, &p));
            prop_assert!(lis_weight((a + d).min(1.0), b, &p) >= lis_weight(a, b, &p));
            let top = p.t / (1.0 + (p.k - p.w).exp());
            prop_assert!(lis_p(a, &p) > 0.0 && lis_p(a, &p) <= top);
        }

        #[test]
        fn filter_monotone_in_alpha(s in proptest::collection::vec(0.0f64..1.0, 0..30), lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let a = nis_filter(&s, hi);
            let b = nis_filter(&s, lo);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
        }

        #[test]
        fn scaling_preserves_per_pair_argmax(s_c in proptest::collection::vec(0.0f64..1.0, 1..10), k in 1e-6f64..1.0) {
            let a = crate::math::argmax(&s_c).1;
            prop_assert_eq!(crate::math::argmax(&final_score(&s_c, k)).1, a);
        }
    }
}
