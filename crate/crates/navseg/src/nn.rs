//! Dense f64 layers with hand-written backward passes.
//!
//! Everything trains in 64-bit so analytic gradients can be held to
//! finite-difference checks at 1e-3 relative error. Feature maps are
//! channel-major `[c, h, w]`; convolutions go through im2col and the
//! ndarray GEMM.

use ndarray::{Array1, Array2, Array3, Axis};
use rand_chacha::ChaCha8Rng;

use crate::rng;

/// Gradient of a (weight, bias) pair, shared by conv and linear layers.
#[derive(Debug, Clone)]
pub struct DenseGrad {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl DenseGrad {
    pub fn zeros_like_conv(layer: &Conv2d) -> Self {
        Self {
            w: Array2::zeros(layer.w.raw_dim()),
            b: Array1::zeros(layer.b.raw_dim()),
        }
    }

    pub fn push_into(&self, out: &mut Vec<f64>) {
        out.extend(self.w.iter());
        out.extend(self.b.iter());
    }

    pub fn add(&mut self, other: &DenseGrad) {
        self.w += &other.w;
        self.b += &other.b;
    }
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

/// 2-D convolution with zero padding `k/2` (same-size output at stride 1).
/// Weights are stored flattened as `[cout, cin*k*k]`.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub cin: usize,
    pub cout: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl Conv2d {
    pub fn new(cin: usize, cout: usize, k: usize, stride: usize, r: &mut ChaCha8Rng) -> Self {
        let fan_in = (cin * k * k) as f64;
        let fan_out = (cout * k * k) as f64;
        let a = (6.0 / (fan_in + fan_out)).sqrt();
        let w = Array2::from_shape_fn((cout, cin * k * k), |_| rng::uniform(r, -a, a));
        Self {
            w,
            b: Array1::zeros(cout),
            cin,
            cout,
            k,
            stride,
            pad: k / 2,
        }
    }

    pub fn out_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.k) / self.stride + 1,
            (w + 2 * self.pad - self.k) / self.stride + 1,
        )
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn push_params(&self, out: &mut Vec<f64>) {
        out.extend(self.w.iter());
        out.extend(self.b.iter());
    }

    pub fn load_params(&mut self, src: &mut &[f64]) {
        let nw = self.w.len();
        let nb = self.b.len();
        self.w = Array2::from_shape_vec(self.w.raw_dim(), src[..nw].to_vec()).expect("shape");
        self.b = Array1::from_vec(src[nw..nw + nb].to_vec());
        *src = &src[nw + nb..];
    }

    pub fn forward(&self, x: &Array3<f64>) -> Array3<f64> {
        debug_assert_eq!(x.dim().0, self.cin);
        let (col, oh, ow) = im2col(x, self.k, self.stride, self.pad);
        let mut y = self.w.dot(&col);
        for (mut row, &b) in y.outer_iter_mut().zip(self.b.iter()) {
            row += b;
        }
        let (data, _) = y.into_raw_vec_and_offset();
        Array3::from_shape_vec((self.cout, oh, ow), data).expect("gemm output is contiguous")
    }

    /// Returns grad w.r.t. the input, plus this layer's parameter grads.
    pub fn backward(&self, x: &Array3<f64>, gy: &Array3<f64>) -> (Array3<f64>, DenseGrad) {
        let (_, h, w) = x.dim();
        let (col, oh, ow) = im2col(x, self.k, self.stride, self.pad);
        let gy2 = gy
            .to_shape((self.cout, oh * ow))
            .expect("gy matches conv output dims");
        let gw = gy2.dot(&col.t());
        let gb = gy2.sum_axis(Axis(1));
        let gcol = self.w.t().dot(&gy2);
        let gx = col2im(&gcol, self.cin, h, w, self.k, self.stride, self.pad, oh, ow);
        (gx, DenseGrad { w: gw, b: gb })
    }
}

pub fn im2col(x: &Array3<f64>, k: usize, stride: usize, pad: usize) -> (Array2<f64>, usize, usize) {
    let (cin, h, w) = x.dim();
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (w + 2 * pad - k) / stride + 1;
    let mut col = Array2::zeros((cin * k * k, oh * ow));
    for c in 0..cin {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                for oi in 0..oh {
                    let iy = (oi * stride + ki) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for oj in 0..ow {
                        let ix = (oj * stride + kj) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        col[[row, oi * ow + oj]] = x[[c, iy as usize, ix as usize]];
                    }
                }
            }
        }
    }
    (col, oh, ow)
}

#[allow(clippy::too_many_arguments)]
fn col2im(
    gcol: &Array2<f64>,
    cin: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
) -> Array3<f64> {
    let mut gx = Array3::zeros((cin, h, w));
    for c in 0..cin {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                for oi in 0..oh {
                    let iy = (oi * stride + ki) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for oj in 0..ow {
                        let ix = (oj * stride + kj) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        gx[[c, iy as usize, ix as usize]] += gcol[[row, oi * ow + oj]];
                    }
                }
            }
        }
    }
    gx
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

/// Row-wise linear map on node-feature matrices `[n, din] -> [n, dout]`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub w: Array2<f64>, // [dout, din]
    pub b: Array1<f64>,
}

impl Linear {
    pub fn new(din: usize, dout: usize, r: &mut ChaCha8Rng) -> Self {
        let a = (6.0 / (din + dout) as f64).sqrt();
        let w = Array2::from_shape_fn((dout, din), |_| rng::uniform(r, -a, a));
        Self {
            w,
            b: Array1::zeros(dout),
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn push_params(&self, out: &mut Vec<f64>) {
        out.extend(self.w.iter());
        out.extend(self.b.iter());
    }

    pub fn load_params(&mut self, src: &mut &[f64]) {
        let nw = self.w.len();
        let nb = self.b.len();
        self.w = Array2::from_shape_vec(self.w.raw_dim(), src[..nw].to_vec()).expect("shape");
        self.b = Array1::from_vec(src[nw..nw + nb].to_vec());
        *src = &src[nw + nb..];
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.w.t());
        y += &self.b;
        y
    }

    pub fn backward(&self, x: &Array2<f64>, gy: &Array2<f64>) -> (Array2<f64>, DenseGrad) {
        let gw = gy.t().dot(x);
        let gb = gy.sum_axis(Axis(0));
        let gx = gy.dot(&self.w);
        (gx, DenseGrad { w: gw, b: gb })
    }
}

// ---------------------------------------------------------------------------
// Elementwise pieces
// ---------------------------------------------------------------------------

pub fn tanh_fwd<D: ndarray::Dimension>(x: &ndarray::Array<f64, D>) -> ndarray::Array<f64, D> {
    x.mapv(f64::tanh)
}

/// Backward through tanh given the forward *output* `y`.
pub fn tanh_bwd<D: ndarray::Dimension>(
    y: &ndarray::Array<f64, D>,
    gy: &ndarray::Array<f64, D>,
) -> ndarray::Array<f64, D> {
    let mut g = gy.clone();
    g.zip_mut_with(y, |g, &y| *g *= 1.0 - y * y);
    g
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// Bilinear sampling on channel-major feature maps
// ---------------------------------------------------------------------------

/// Sample all channels of `f` at (px, py), clamped to the valid grid.
pub fn bilinear_sample(f: &Array3<f64>, px: f64, py: f64, out: &mut Vec<f64>) {
    let (c, h, w) = f.dim();
    let px = px.clamp(0.0, (w - 1) as f64);
    let py = py.clamp(0.0, (h - 1) as f64);
    let x0 = px.floor() as usize;
    let y0 = py.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = px - x0 as f64;
    let fy = py - y0 as f64;
    for ch in 0..c {
        let v = (1.0 - fx) * (1.0 - fy) * f[[ch, y0, x0]]
            + fx * (1.0 - fy) * f[[ch, y0, x1]]
            + (1.0 - fx) * fy * f[[ch, y1, x0]]
            + fx * fy * f[[ch, y1, x1]];
        out.push(v);
    }
}

/// Scatter per-channel grads `g` back into the four corners used by
/// [`bilinear_sample`] at the same position.
pub fn bilinear_scatter(gf: &mut Array3<f64>, px: f64, py: f64, g: &[f64]) {
    let (c, h, w) = gf.dim();
    debug_assert_eq!(g.len(), c);
    let px = px.clamp(0.0, (w - 1) as f64);
    let py = py.clamp(0.0, (h - 1) as f64);
    let x0 = px.floor() as usize;
    let y0 = py.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = px - x0 as f64;
    let fy = py - y0 as f64;
    for (ch, &gc) in g.iter().enumerate() {
        gf[[ch, y0, x0]] += (1.0 - fx) * (1.0 - fy) * gc;
        gf[[ch, y0, x1]] += fx * (1.0 - fy) * gc;
        gf[[ch, y1, x0]] += (1.0 - fx) * fy * gc;
        gf[[ch, y1, x1]] += fx * fy * gc;
    }
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

/// First-order adaptive-moment optimizer over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array;

    fn rand_array3(dims: (usize, usize, usize), seed: u64) -> Array3<f64> {
        let mut r = rng::stream(&[seed]);
        Array3::from_shape_fn(dims, |_| rng::uniform(&mut r, -1.0, 1.0))
    }

    /// Scalar probe: L = sum(c .* y) for fixed random c.
    fn probe_loss<D: ndarray::Dimension>(y: &Array<f64, D>, c: &Array<f64, D>) -> f64 {
        (y * c).sum()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn conv_gradients_match_finite_differences() {
        for &stride in &[1usize, 2] {
            let mut r = rng::stream(&[5, stride as u64]);
            let mut conv = Conv2d::new(2, 3, 3, stride, &mut r);
            let x = rand_array3((2, 6, 7), 99);
            let y = conv.forward(&x);
            let c = rand_array3(y.dim(), 123);
            let (gx, grad) = conv.backward(&x, &c);

            let h = 1e-6;
            // weight grads
            for &(i, j) in &[(0usize, 0usize), (1, 5), (2, 17)] {
                let orig = conv.w[[i, j]];
                conv.w[[i, j]] = orig + h;
                let lp = probe_loss(&conv.forward(&x), &c);
                conv.w[[i, j]] = orig - h;
                let lm = probe_loss(&conv.forward(&x), &c);
                conv.w[[i, j]] = orig;
                let fd = (lp - lm) / (2.0 * h);
                assert!(rel_err(fd, grad.w[[i, j]]) < 1e-5, "stride {stride} w[{i},{j}]");
            }
            // bias grads
            let orig = conv.b[1];
            conv.b[1] = orig + h;
            let lp = probe_loss(&conv.forward(&x), &c);
            conv.b[1] = orig - h;
            let lm = probe_loss(&conv.forward(&x), &c);
            conv.b[1] = orig;
            assert!(rel_err((lp - lm) / (2.0 * h), grad.b[1]) < 1e-5);
            // input grads
            let mut x2 = x.clone();
            for &(c0, i, j) in &[(0usize, 0usize, 0usize), (1, 3, 4), (0, 5, 6)] {
                let orig = x2[[c0, i, j]];
                x2[[c0, i, j]] = orig + h;
                let lp = probe_loss(&conv.forward(&x2), &c);
                x2[[c0, i, j]] = orig - h;
                let lm = probe_loss(&conv.forward(&x2), &c);
                x2[[c0, i, j]] = orig;
                let fd = (lp - lm) / (2.0 * h);
                assert!(rel_err(fd, gx[[c0, i, j]]) < 1e-5, "stride {stride} x[{c0},{i},{j}]");
            }
        }
    }

    #[test]
    fn linear_gradients_match_finite_differences() {
        let mut r = rng::stream(&[6]);
        let mut lin = Linear::new(4, 3, &mut r);
        let x = Array2::from_shape_fn((5, 4), |_| rng::uniform(&mut r, -1.0, 1.0));
        let c = Array2::from_shape_fn((5, 3), |_| rng::uniform(&mut r, -1.0, 1.0));
        let (gx, grad) = lin.backward(&x, &c);

        let h = 1e-6;
        let orig = lin.w[[2, 1]];
        lin.w[[2, 1]] = orig + h;
        let lp = probe_loss(&lin.forward(&x), &c);
        lin.w[[2, 1]] = orig - h;
        let lm = probe_loss(&lin.forward(&x), &c);
        lin.w[[2, 1]] = orig;
        assert!(rel_err((lp - lm) / (2.0 * h), grad.w[[2, 1]]) < 1e-6);

        let mut x2 = x.clone();
        let orig = x2[[3, 2]];
        x2[[3, 2]] = orig + h;
        let lp = probe_loss(&lin.forward(&x2), &c);
        x2[[3, 2]] = orig - h;
        let lm = probe_loss(&lin.forward(&x2), &c);
        assert!(rel_err((lp - lm) / (2.0 * h), gx[[3, 2]]) < 1e-6);
    }

    #[test]
    fn bilinear_sample_and_scatter_are_adjoint() {
        let f = rand_array3((3, 5, 6), 7);
        let mut out = Vec::new();
        bilinear_sample(&f, 2.3, 1.7, &mut out);
        // adjoint check: <scatter(g), f> == <g, sample(f)>
        let g = [0.5, -1.25, 2.0];
        let mut gf = Array3::zeros((3, 5, 6));
        bilinear_scatter(&mut gf, 2.3, 1.7, &g);
        let lhs: f64 = (&gf * &f).sum();
        let rhs: f64 = out.iter().zip(g.iter()).map(|(o, g)| o * g).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn bilinear_clamps_at_edges() {
        let f = rand_array3((1, 4, 4), 8);
        let mut a = Vec::new();
        bilinear_sample(&f, 10.0, -3.0, &mut a);
        assert_eq!(a[0], f[[0, 0, 3]]);
    }

    #[test]
    fn adam_reduces_a_quadratic() {
        let mut p = vec![5.0, -3.0];
        let mut adam = Adam::new(2, 0.1);
        for _ in 0..500 {
            let g = vec![2.0 * p[0], 2.0 * p[1]];
            adam.step(&mut p, &g);
        }
        assert!(p[0].abs() < 1e-2 && p[1].abs() < 1e-2);
    }

    #[test]
    fn softplus_and_sigmoid_are_stable() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((softplus(100.0) - 100.0).abs() < 1e-9);
        assert!(softplus(-100.0) > 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-12);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
