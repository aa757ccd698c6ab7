use crate::math::ln;

/// Probability clamp used by the cross-entropy losses.
pub const PROB_EPS: f64 = 1e-7;

fn clamped(p: f64) -> bool {
    !(PROB_EPS..=1.0 - PROB_EPS).contains(&p)
}

/// Binary cross-entropy of probability `p` against label `y`.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * ln(p) + (1.0 - y) * ln(1.0 - p))
}

/// `d bce / d p`; zero where the clamp is active.
pub fn bce_grad(p: f64, y: f64) -> f64 {
    if clamped(p) {
        return 0.0;
    }
    -y / p + (1.0 - y) / (1.0 - p)
}

/// `d bce(sigmoid(s), y) / d s` given `p = sigmoid(s)`; zero where the
/// clamp is active.
pub fn bce_logit_grad(p: f64, y: f64) -> f64 {
    if clamped(p) {
        return 0.0;
    }
    p - y
}

/// Mean squared error.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    s / a.len() as f64
}

/// Gradient of [`mse`] with respect to `a` (negate for `b`).
pub fn mse_grad(a: &[f64], b: &[f64]) -> alloc::vec::Vec<f64> {
    let n = a.len() as f64;
    a.iter().zip(b).map(|(x, y)| 2.0 * (x - y) / n).collect()
}

/// Mean per-category binary cross-entropy.
pub fn multilabel_bce(probs: &[f64], targets: &[f64]) -> f64 {
    debug_assert_eq!(probs.len(), targets.len());
    let s: f64 = probs.iter().zip(targets).map(|(&p, &y)| bce(p, y)).sum();
    s / probs.len() as f64
}

pub fn multilabel_bce_grad(probs: &[f64], targets: &[f64]) -> alloc::vec::Vec<f64> {
    let n = probs.len() as f64;
    probs.iter().zip(targets).map(|(&p, &y)| bce_grad(p, y) / n).collect()
}
