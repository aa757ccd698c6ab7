use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::params::{ParamId, ParamStore};
use super::tensor::Tensor;
use crate::math::sqrt;
use crate::{Error, Result};

fn he_normal<R: Rng + ?Sized>(rng: &mut R, n: usize, fan_in: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, sqrt(2.0 / fan_in as f64)).expect("positive std");
    (0..n).map(|_| normal.sample(rng)).collect()
}

// ---------------------------------------------------------------------------
// dense

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn dense_forward(x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let n = x.len();
    b.iter().enumerate().map(|(i, &bi)| bi + dot(&w[i * n..(i + 1) * n], x)).collect()
}

/// Accumulates `dW`, `db`; writes `dx` when requested.
fn dense_backward(x: &[f64], w: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>) {
    let n = x.len();
    for (i, &g) in dy.iter().enumerate() {
        db[i] += g;
        if g == 0.0 {
            continue;
        }
        for (d, &xj) in dw[i * n..(i + 1) * n].iter_mut().zip(x) {
            *d += g * xj;
        }
    }
    if let Some(dx) = dx {
        dx.fill(0.0);
        for (i, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for (d, &wij) in dx.iter_mut().zip(&w[i * n..(i + 1) * n]) {
                *d += g * wij;
            }
        }
    }
}

fn check_shape(op: &'static str, t: &Tensor, expected: &[usize]) -> Result<()> {
    if t.shape() != expected {
        return Err(Error::ShapeMismatch {
            op,
            expected: expected.to_vec(),
            got: t.shape().to_vec(),
        });
    }
    Ok(())
}

/// `y = W x + b` for `x: [n]`, `W: [m, n]`, `b: [m]`.
pub fn dense_apply(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let n = x.len();
    let m = b.len();
    check_shape("dense", x, &[n])?;
    check_shape("dense", b, &[m])?;
    check_shape("dense", w, &[m, n])?;
    Tensor::from_vec(&[m], dense_forward(x.data(), w.data(), b.data()))
}

/// Gradients `(dx, dW, db)` of a dense layer given the upstream `dy`.
pub fn dense_apply_backward(x: &Tensor, w: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, m) = (x.len(), dy.len());
    check_shape("dense backward", w, &[m, n])?;
    let mut dx = Tensor::zeros(&[n]);
    let mut dw = Tensor::zeros(&[m, n]);
    let mut db = Tensor::zeros(&[m]);
    dense_backward(x.data(), w.data(), dy.data(), dw.data_mut(), db.data_mut(), Some(dx.data_mut()));
    Ok((dx, dw, db))
}

/// Fully connected layer: weights `[outputs, inputs]`, bias `[outputs]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub inputs: usize,
    pub outputs: usize,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let w = he_normal(rng, inputs * outputs, inputs);
        let w = store.add(format!("{name}.w"), Tensor::from_vec(&[outputs, inputs], w).expect("sized"));
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[outputs]));
        Self { w, b, inputs, outputs }
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inputs);
        dense_forward(x, store.value(self.w), store.value(self.b))
    }

    /// Accumulates parameter gradients; returns `dx` (empty unless `want_dx`).
    pub fn backward(&self, store: &mut ParamStore, x: &[f64], dy: &[f64], want_dx: bool) -> Vec<f64> {
        let mut dx = if want_dx { vec![0.0; self.inputs] } else { Vec::new() };
        let (w, dw, db) = store.layer_mut(self.w, self.b);
        dense_backward(x, w, dy, dw, db, want_dx.then_some(dx.as_mut_slice()));
        dx
    }

    pub fn params(&self) -> [ParamId; 2] {
        [self.w, self.b]
    }
}

// ---------------------------------------------------------------------------
// conv2d

/// Cross-correlation geometry for a `[channels, height, width]` input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub in_channels: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvGeometry {
    pub fn out_h(&self) -> usize {
        (self.in_h + 2 * self.padding - self.kernel_h) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.in_w + 2 * self.padding - self.kernel_w) / self.stride + 1
    }

    pub fn out_len(&self) -> usize {
        self.out_channels * self.out_h() * self.out_w()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        if self.stride == 0 || self.kernel_h == 0 || self.kernel_w == 0 {
            return bad(format!("zero stride or kernel in {self:?}"));
        }
        if self.in_channels == 0 || self.out_channels == 0 {
            return bad(format!("zero channels in {self:?}"));
        }
        if self.in_h + 2 * self.padding < self.kernel_h || self.in_w + 2 * self.padding < self.kernel_w {
            return bad(format!("kernel larger than padded input in {self:?}"));
        }
        Ok(())
    }

    fn kernel_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_h * self.kernel_w
    }
}

fn conv_forward(g: &ConvGeometry, x: &[f64], k: &[f64], b: &[f64]) -> Vec<f64> {
    let (oh, ow) = (g.out_h(), g.out_w());
    let (kh, kw, s, p) = (g.kernel_h, g.kernel_w, g.stride, g.padding);
    let mut out = vec![0.0; g.out_channels * oh * ow];
    // Output positions whose input tap `off` (kernel index) lands inside `len`.
    let valid = |off: usize, len: usize, n_out: usize| {
        let lo = p.saturating_sub(off).div_ceil(s);
        let hi = (len + p).checked_sub(off).map_or(0, |v| v.div_ceil(s)).min(n_out);
        (lo, hi.max(lo))
    };
    for o in 0..g.out_channels {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.fill(b[o]);
        for c in 0..g.in_channels {
            let xc = &x[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
            for ky in 0..kh {
                let (y_lo, y_hi) = valid(ky, g.in_h, oh);
                for kx in 0..kw {
                    let wv = k[((o * g.in_channels + c) * kh + ky) * kw + kx];
                    let (x_lo, x_hi) = valid(kx, g.in_w, ow);
                    for oy in y_lo..y_hi {
                        let xrow = &xc[(oy * s + ky - p) * g.in_w..];
                        let orow = &mut plane[oy * ow..(oy + 1) * ow];
                        for ox in x_lo..x_hi {
                            orow[ox] += wv * xrow[ox * s + kx - p];
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv_backward(
    g: &ConvGeometry,
    x: &[f64],
    k: &[f64],
    dy: &[f64],
    dk: &mut [f64],
    db: &mut [f64],
    mut dx: Option<&mut [f64]>,
) {
    let (oh, ow) = (g.out_h(), g.out_w());
    let (kh, kw, s, p) = (g.kernel_h, g.kernel_w, g.stride, g.padding as isize);
    if let Some(dx) = dx.as_deref_mut() {
        dx.fill(0.0);
    }
    for o in 0..g.out_channels {
        for oy in 0..oh {
            for ox in 0..ow {
                let grad = dy[(o * oh + oy) * ow + ox];
                if grad == 0.0 {
                    continue;
                }
                db[o] += grad;
                for c in 0..g.in_channels {
                    for ky in 0..kh {
                        let iy = (oy * s + ky) as isize - p;
                        if iy < 0 || iy >= g.in_h as isize {
                            continue;
                        }
                        let xrow = (c * g.in_h + iy as usize) * g.in_w;
                        let krow = ((o * g.in_channels + c) * kh + ky) * kw;
                        for kx in 0..kw {
                            let ix = (ox * s + kx) as isize - p;
                            if ix >= 0 && ix < g.in_w as isize {
                                dk[krow + kx] += grad * x[xrow + ix as usize];
                                if let Some(dx) = dx.as_deref_mut() {
                                    dx[xrow + ix as usize] += grad * k[krow + kx];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn conv_geometry_of(x: &Tensor, k: &Tensor, stride: usize, padding: usize) -> Result<ConvGeometry> {
    let (xs, ks) = (x.shape(), k.shape());
    if xs.len() != 3 || ks.len() != 4 || ks[1] != xs[0] {
        return Err(Error::ShapeMismatch {
            op: "conv2d",
            expected: vec![xs.first().copied().unwrap_or(0)],
            got: ks.to_vec(),
        });
    }
    let g = ConvGeometry {
        in_channels: xs[0],
        in_h: xs[1],
        in_w: xs[2],
        out_channels: ks[0],
        kernel_h: ks[2],
        kernel_w: ks[3],
        stride,
        padding,
    };
    g.validate()?;
    Ok(g)
}

/// Cross-correlation of `x: [c, h, w]` with `k: [oc, c, kh, kw]` plus bias.
pub fn conv2d_apply(x: &Tensor, k: &Tensor, b: &Tensor, stride: usize, padding: usize) -> Result<Tensor> {
    let g = conv_geometry_of(x, k, stride, padding)?;
    check_shape("conv2d bias", b, &[g.out_channels])?;
    Tensor::from_vec(
        &[g.out_channels, g.out_h(), g.out_w()],
        conv_forward(&g, x.data(), k.data(), b.data()),
    )
}

/// Gradients `(dx, dk, db)` of [`conv2d_apply`].
pub fn conv2d_apply_backward(
    x: &Tensor,
    k: &Tensor,
    dy: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<(Tensor, Tensor, Tensor)> {
    let g = conv_geometry_of(x, k, stride, padding)?;
    check_shape("conv2d backward", dy, &[g.out_channels, g.out_h(), g.out_w()])?;
    let mut dx = Tensor::zeros(x.shape());
    let mut dk = Tensor::zeros(k.shape());
    let mut db = Tensor::zeros(&[g.out_channels]);
    conv_backward(&g, x.data(), k.data(), dy.data(), dk.data_mut(), db.data_mut(), Some(dx.data_mut()));
    Ok((dx, dk, db))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conv2d {
    pub k: ParamId,
    pub b: ParamId,
    pub geometry: ConvGeometry,
}

impl Conv2d {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, geometry: ConvGeometry, rng: &mut R) -> Result<Self> {
        geometry.validate()?;
        let g = geometry;
        let fan_in = g.in_channels * g.kernel_h * g.kernel_w;
        let k = he_normal(rng, g.kernel_len(), fan_in);
        let shape = [g.out_channels, g.in_channels, g.kernel_h, g.kernel_w];
        let k = store.add(format!("{name}.k"), Tensor::from_vec(&shape, k).expect("sized"));
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[g.out_channels]));
        Ok(Self { k, b, geometry })
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> Vec<f64> {
        conv_forward(&self.geometry, x, store.value(self.k), store.value(self.b))
    }

    pub fn backward(&self, store: &mut ParamStore, x: &[f64], dy: &[f64], want_dx: bool) -> Vec<f64> {
        let mut dx = if want_dx { vec![0.0; x.len()] } else { Vec::new() };
        let (k, dk, db) = store.layer_mut(self.k, self.b);
        conv_backward(&self.geometry, x, k, dy, dk, db, want_dx.then_some(dx.as_mut_slice()));
        dx
    }

    pub fn params(&self) -> [ParamId; 2] {
        [self.k, self.b]
    }
}

// ---------------------------------------------------------------------------
// pooling and activations

/// Output of [`maxpool2d`]: pooled values and the flat input index chosen
/// for each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
    pub out_h: usize,
    pub out_w: usize,
}

/// Non-overlapping `window x window` max-pooling over `[c, h, w]`.
/// Trailing rows/columns that do not fill a window are dropped; ties go to
/// the lowest flat index.
pub fn maxpool2d(x: &[f64], channels: usize, h: usize, w: usize, window: usize) -> Pooled {
    let (oh, ow) = (h / window, w / window);
    let mut values = Vec::with_capacity(channels * oh * ow);
    let mut argmax = Vec::with_capacity(channels * oh * ow);
    for c in 0..channels {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = f64::NEG_INFINITY;
                let mut best_i = usize::MAX;
                for ky in 0..window {
                    let row = (c * h + oy * window + ky) * w + ox * window;
                    for (kx, &v) in x[row..row + window].iter().enumerate() {
                        if best_i == usize::MAX || v > best {
                            best = v;
                            best_i = row + kx;
                        }
                    }
                }
                values.push(best);
                argmax.push(best_i);
            }
        }
    }
    Pooled {
        values,
        argmax,
        out_h: oh,
        out_w: ow,
    }
}

/// Routes each upstream gradient to its argmax input only.
pub fn maxpool2d_backward(dy: &[f64], argmax: &[usize], input_len: usize) -> Vec<f64> {
    let mut dx = vec![0.0; input_len];
    for (&g, &i) in dy.iter().zip(argmax) {
        dx[i] += g;
    }
    dx
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Gradient of [`relu`] given its input (subgradient 0 at 0).
pub fn relu_backward(x: &[f64], dy: &[f64]) -> Vec<f64> {
    x.iter().zip(dy).map(|(&v, &g)| if v > 0.0 { g } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn t(shape: &[usize], v: Vec<f64>) -> Tensor {
        Tensor::from_vec(shape, v).unwrap()
    }

    #[test]
    fn dense_identity_and_zero() {
        let x = t(&[3], vec![1.0, -2.0, 0.5]);
        let eye = t(&[3, 3], vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(dense_apply(&x, &eye, &Tensor::zeros(&[3])).unwrap(), x);
        let b = t(&[2], vec![0.25, -4.0]);
        assert_eq!(dense_apply(&x, &Tensor::zeros(&[2, 3]), &b).unwrap(), b);
        assert!(matches!(
            dense_apply(&x, &Tensor::zeros(&[2, 4]), &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn dense_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, m) = (5, 4);
        let x = rand_vec(&mut rng, n);
        let w = rand_vec(&mut rng, m * n);
        let b = rand_vec(&mut rng, m);
        let r = rand_vec(&mut rng, m);
        // L = r . (W x + b)
        let loss = |x: &[f64], w: &[f64], b: &[f64]| -> f64 {
            dense_forward(x, w, b).iter().zip(&r).map(|(a, c)| a * c).sum()
        };
        let (dx, dw, db) = dense_apply_backward(&t(&[n], x.clone()), &t(&[m, n], w.clone()), &t(&[m], r.clone())).unwrap();
        assert!(grad_check(|p| loss(p, &w, &b), dx.data(), &x, 1e-5) < 1e-4);
        assert!(grad_check(|p| loss(&x, p, &b), dw.data(), &w, 1e-5) < 1e-4);
        assert!(grad_check(|p| loss(&x, &w, p), db.data(), &b, 1e-5) < 1e-4);
    }

    #[test]
    fn conv_identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = t(&[1, 4, 5], rand_vec(&mut rng, 20));
        let k = t(&[1, 1, 1, 1], vec![1.0]);
        assert_eq!(conv2d_apply(&x, &k, &Tensor::zeros(&[1]), 1, 0).unwrap(), x);
    }

    #[test]
    fn conv_all_ones_gives_nines() {
        let x = t(&[1, 5, 5], vec![1.0; 25]);
        let k = t(&[1, 1, 3, 3], vec![1.0; 9]);
        let y = conv2d_apply(&x, &k, &Tensor::zeros(&[1]), 1, 0).unwrap();
        assert_eq!(y.shape(), &[1, 3, 3]);
        assert!(y.data().iter().all(|&v| v == 9.0));
        // zero padding leaves 4 at the corners
        let y = conv2d_apply(&x, &k, &Tensor::zeros(&[1]), 1, 1).unwrap();
        assert_eq!(y.shape(), &[1, 5, 5]);
        assert_eq!(y.data()[0], 4.0);
        assert_eq!(y.data()[12], 9.0);
    }

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(stride, padding, kh) in &[(1, 0, 3), (2, 1, 3), (3, 2, 4), (4, 0, 4), (1, 1, 2)] {
            let (c, h, w, oc) = (2, 9, 8, 3);
            let x = rand_vec(&mut rng, c * h * w);
            let k = rand_vec(&mut rng, oc * c * kh * kh);
            let b = rand_vec(&mut rng, oc);
            let y = conv2d_apply(&t(&[c, h, w], x.clone()), &t(&[oc, c, kh, kh], k.clone()), &t(&[oc], b.clone()), stride, padding)
                .unwrap();
            let (oh, ow) = (y.shape()[1], y.shape()[2]);
            for o in 0..oc {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut want = b[o];
                        for ci in 0..c {
                            for ky in 0..kh {
                                for kx in 0..kh {
                                    let iy = (oy * stride + ky) as isize - padding as isize;
                                    let ix = (ox * stride + kx) as isize - padding as isize;
                                    if (0..h as isize).contains(&iy) && (0..w as isize).contains(&ix) {
                                        want += k[((o * c + ci) * kh + ky) * kh + kx] * x[(ci * h + iy as usize) * w + ix as usize];
                                    }
                                }
                            }
                        }
                        let got = y.data()[(o * oh + oy) * ow + ox];
                        assert!((got - want).abs() < 1e-12, "{stride} {padding} {kh}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn conv_rejects_bad_geometry() {
        let x = t(&[1, 2, 2], vec![0.0; 4]);
        let k = t(&[1, 1, 3, 3], vec![0.0; 9]);
        assert!(matches!(
            conv2d_apply(&x, &k, &Tensor::zeros(&[1]), 1, 0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(conv2d_apply(&x, &k, &Tensor::zeros(&[1]), 0, 1).is_err());
        let k2 = t(&[1, 2, 1, 1], vec![0.0; 2]);
        assert!(conv2d_apply(&x, &k2, &Tensor::zeros(&[1]), 1, 0).is_err());
    }

    #[test]
    fn conv_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(stride, padding) in &[(1, 0), (2, 1), (3, 0)] {
            let xs = [2, 7, 6];
            let ks = [3, 2, 3, 2];
            let x = rand_vec(&mut rng, 84);
            let k = rand_vec(&mut rng, 36);
            let b = rand_vec(&mut rng, 3);
            let y = conv2d_apply(&t(&xs, x.clone()), &t(&ks, k.clone()), &t(&[3], b.clone()), stride, padding).unwrap();
            let r = rand_vec(&mut rng, y.len());
            let loss = |x: &[f64], k: &[f64], b: &[f64]| -> f64 {
                let y = conv2d_apply(&t(&xs, x.to_vec()), &t(&ks, k.to_vec()), &t(&[3], b.to_vec()), stride, padding).unwrap();
                y.data().iter().zip(&r).map(|(a, c)| a * c).sum()
            };
            let (dx, dk, db) =
                conv2d_apply_backward(&t(&xs, x.clone()), &t(&ks, k.clone()), &t(y.shape(), r.clone()), stride, padding).unwrap();
            assert!(grad_check(|p| loss(p, &k, &b), dx.data(), &x, 1e-5) < 1e-4);
            assert!(grad_check(|p| loss(&x, p, &b), dk.data(), &k, 1e-5) < 1e-4);
            assert!(grad_check(|p| loss(&x, &k, p), db.data(), &b, 1e-5) < 1e-4);
        }
    }

    #[test]
    fn maxpool_tie_and_mask() {
        let p = maxpool2d(&[2.0; 16], 1, 4, 4, 2);
        assert_eq!(p.values, vec![2.0; 4]);
        assert_eq!(p.argmax, vec![0, 2, 8, 10]);

        let p = maxpool2d(&[1.0, 5.0, 3.0, 2.0], 1, 1, 4, 1);
        assert_eq!(p.values, vec![1.0, 5.0, 3.0, 2.0]);
        let p = maxpool2d(&[1.0, 5.0, 3.0, 2.0], 1, 2, 2, 2);
        assert_eq!(p.values, vec![5.0]);
        assert_eq!(maxpool2d_backward(&[1.0], &p.argmax, 4), vec![0.0, 1.0, 0.0, 0.0]);

        // remainder rows/cols dropped
        let p = maxpool2d(&[0.0; 25], 1, 5, 5, 2);
        assert_eq!((p.out_h, p.out_w), (2, 2));
    }

    #[test]
    fn maxpool_matches_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (c, h, w, k) = (2, 7, 9, 3);
            let x = rand_vec(&mut rng, c * h * w);
            let p = maxpool2d(&x, c, h, w, k);
            let mut i = 0;
            for ch in 0..c {
                for oy in 0..h / k {
                    for ox in 0..w / k {
                        let mut cells = Vec::new();
                        for y in oy * k..oy * k + k {
                            for xx in ox * k..ox * k + k {
                                cells.push((ch * h + y) * w + xx);
                            }
                        }
                        let best = cells.iter().map(|&j| x[j]).fold(f64::NEG_INFINITY, f64::max);
                        assert_eq!(p.values[i], best);
                        assert_eq!(x[p.argmax[i]], best);
                        i += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn maxpool_gradient_away_from_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = rand_vec(&mut rng, 2 * 6 * 6);
        let r = rand_vec(&mut rng, 2 * 3 * 3);
        let p = maxpool2d(&x, 2, 6, 6, 2);
        let dx = maxpool2d_backward(&r, &p.argmax, x.len());
        let loss = |x: &[f64]| -> f64 { maxpool2d(x, 2, 6, 6, 2).values.iter().zip(&r).map(|(a, b)| a * b).sum() };
        assert!(grad_check(loss, &dx, &x, 1e-7) < 1e-4);
    }

    #[test]
    fn layer_structs_accumulate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut store = ParamStore::new();
        let d = Dense::new(&mut store, "fc", 3, 2, &mut rng);
        let x = [0.5, -1.0, 2.0];
        let dx1 = d.backward(&mut store, &x, &[1.0, 0.0], true);
        let g1 = store.grad(d.w).to_vec();
        d.backward(&mut store, &x, &[1.0, 0.0], false);
        let g2 = store.grad(d.w).to_vec();
        assert_eq!(dx1.len(), 3);
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(2.0 * a, *b);
        }
        assert_eq!(store.grad(d.b), &[2.0, 0.0]);
    }
}
