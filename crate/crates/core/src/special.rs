//! Special functions used by the oscillator basis.

use std::f64::consts::PI;

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All `L_k(x)` for `k < n` (alpha = 0).
pub fn laguerre_table(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    if n == 1 {
        return out;
    }
    out.push(1.0 - x);
    for k in 1..n - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Normalized Hermite functions `h_0(x) .. h_{n-1}(x)`.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n == 1 {
        return out;
    }
    out.push(2f64.sqrt() * x * out[0]);
    for k in 1..n - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Binomial weights `C(k, j) / 2^k` for `j = 0..=k`.
pub fn binomial_weights(k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    let ln2k = k as f64 * std::f64::consts::LN_2;
    let lnk = ln_factorial(k);
    let mut lnj = 0.0;
    let mut lnkj = lnk;
    for (j, wj) in w.iter_mut().enumerate() {
        if j > 0 {
            lnj += (j as f64).ln();
            lnkj -= ((k - j + 1) as f64).ln();
        }
        *wj = (lnk - lnj - lnkj - ln2k).exp();
    }
    w
}
