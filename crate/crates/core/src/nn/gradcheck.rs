/// `|a - n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Maximum relative error between `analytic` and central differences of
/// `f` around `point`, over every coordinate.
pub fn grad_check<F>(f: F, analytic: &[f64], point: &[f64], eps: f64) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let coords: alloc::vec::Vec<usize> = (0..point.len()).collect();
    grad_check_coords(f, analytic, point, eps, &coords)
}

/// [`grad_check`] restricted to the listed coordinates.
pub fn grad_check_coords<F>(mut f: F, analytic: &[f64], point: &[f64], eps: f64, coords: &[usize]) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(analytic.len(), point.len());
    let mut x = point.to_vec();
    let mut worst = 0.0f64;
    for &i in coords {
        let orig = x[i];
        x[i] = orig + eps;
        let up = f(&x);
        x[i] = orig - eps;
        let down = f(&x);
        x[i] = orig;
        let numeric = (up - down) / (2.0 * eps);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let err = grad_check(|x| x[0] * x[0], &[6.0], &[3.0], 1e-5);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant_function() {
        assert_eq!(grad_check(|_| 4.0, &[0.0, 0.0], &[1.0, -2.0], 1e-5), 0.0);
    }

    #[test]
    fn detects_wrong_gradient() {
        assert!(grad_check(|x| x[0] * x[0], &[5.0], &[3.0], 1e-5) > 0.05);
    }
}
