//! FFT helpers built on `rustfft`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed frequency index of FFT bin `k` out of `n`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Angular wavenumbers of an `n`-point grid with spacing `h`.
pub fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| 2.0 * PI * signed_index(k, n) as f64 / (n as f64 * h))
        .collect()
}

/// Forward and inverse plans for one length.
#[derive(Clone)]
pub struct Plan {
    pub len: usize,
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl Plan {
    pub fn new(planner: &mut FftPlanner<f64>, len: usize) -> Self {
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

/// Unnormalized FFT of every lane along `axis`.
pub fn fft_axis(a: &mut Array2<Complex64>, axis: usize, plan: &Plan, inverse: bool) {
    let fft = if inverse { &plan.inverse } else { &plan.forward };
    let mut buf = vec![Complex64::new(0.0, 0.0); plan.len];
    for mut lane in a.lanes_mut(Axis(axis)) {
        if let Some(s) = lane.as_slice_mut() {
            fft.process(s);
            continue;
        }
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

/// Two-dimensional forward transform normalized by `1/(n0 n1)`.
pub fn fft2_normalized(a: &Array2<Complex64>, p0: &Plan, p1: &Plan) -> Array2<Complex64> {
    let mut out = a.clone();
    fft_axis(&mut out, 1, p1, false);
    fft_axis(&mut out, 0, p0, false);
    let s = 1.0 / (p0.len * p1.len) as f64;
    out.mapv_inplace(|v| v * s);
    out
}

/// Spectral partial derivative `∂_p^a ∂_q^b` of a periodic field.
pub fn spectral_derivative(
    a: &Array2<Complex64>,
    hp: f64,
    hq: f64,
    order_p: usize,
    order_q: usize,
    planner: &mut FftPlanner<f64>,
) -> Array2<Complex64> {
    let (np, nq) = a.dim();
    let pp = Plan::new(planner, np);
    let pq = Plan::new(planner, nq);
    let mut f = fft2_normalized(a, &pp, &pq);
    let kp = wavenumbers(np, hp);
    let kq = wavenumbers(nq, hq);
    let factor = |k: f64, idx: usize, n: usize, order: usize| -> Complex64 {
        if order == 0 {
            return Complex64::new(1.0, 0.0);
        }
        // The Nyquist bin has no consistent sign for odd orders.
        if order % 2 == 1 && n % 2 == 0 && idx == n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, k).powu(order as u32)
    };
    for ((i, j), v) in f.indexed_iter_mut() {
        *v *= factor(kp[i], i, np, order_p) * factor(kq[j], j, nq, order_q);
    }
    fft_axis(&mut f, 0, &pp, true);
    fft_axis(&mut f, 1, &pq, true);
    f
}

/// Zoom DFT `X_k = Σ_n x_n exp(-i (u0 + n du)(v0 + k dv))` for `k < nout`,
/// evaluated with the chirp-z (Bluestein) factorization.
pub struct ChirpZ {
    n_in: usize,
    n_out: usize,
    u0: f64,
    du: f64,
    v0: f64,
    dv: f64,
    plan: Plan,
    kernel_hat: Vec<Complex64>,
}

impl ChirpZ {
    pub fn new(
        planner: &mut FftPlanner<f64>,
        n_in: usize,
        u0: f64,
        du: f64,
        n_out: usize,
        v0: f64,
        dv: f64,
    ) -> Self {
        let len = (n_in + n_out - 1).next_power_of_two();
        let plan = Plan::new(planner, len);
        let alpha = du * dv;
        // Kernel c(j) = exp(i α j² / 2) for j in -(n_in-1)..(n_out-1), stored circularly.
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..n_out {
            let jf = j as f64;
            kernel[j] = Complex64::from_polar(1.0, 0.5 * alpha * jf * jf);
        }
        for j in 1..n_in {
            let jf = j as f64;
            kernel[len - j] = Complex64::from_polar(1.0, 0.5 * alpha * jf * jf);
        }
        plan.forward.process(&mut kernel);
        Self {
            n_in,
            n_out,
            u0,
            du,
            v0,
            dv,
            plan,
            kernel_hat: kernel,
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_in);
        let len = self.plan.len;
        let alpha = self.du * self.dv;
        let mut y = vec![Complex64::new(0.0, 0.0); len];
        for (n, (yn, xn)) in y.iter_mut().zip(x.iter()).enumerate() {
            let nf = n as f64;
            *yn = xn * Complex64::from_polar(1.0, -nf * self.du * self.v0 - 0.5 * alpha * nf * nf);
        }
        self.plan.forward.process(&mut y);
        for (v, k) in y.iter_mut().zip(self.kernel_hat.iter()) {
            *v *= k;
        }
        self.plan.inverse.process(&mut y);
        let s = 1.0 / len as f64;
        (0..self.n_out)
            .map(|k| {
                let kf = k as f64;
                let v = self.v0 + kf * self.dv;
                y[k] * s * Complex64::from_polar(1.0, -self.u0 * v - 0.5 * alpha * kf * kf)
            })
            .collect()
    }
}
