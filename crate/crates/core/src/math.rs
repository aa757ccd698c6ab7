//! Floating-point helpers usable without `std`.

pub use libm::{ceil, cos, exp, fabs as abs, floor, log as ln, sin, sqrt};

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Maximum and the lowest index attaining it.
pub fn argmax(xs: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &x) in xs.iter().enumerate() {
        if i == 0 || x > best.0 {
            best = (x, i);
        }
    }
    best
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
