//! Partial derivatives of sampled symbols.
//!
//! Decaying fields use spectral differentiation; anything else uses wide
//! finite-difference stencils (exact on polynomials up to the stencil
//! degree), centred via the symbol's extension when one is available and
//! one-sided at the window edges otherwise.

use std::collections::HashMap;

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::fourier::spectral_derivative;
use crate::symbol::SymbolField;

/// Fornberg weights: `w[k][j]` is the weight of node `xs[j]` in the
/// `k`-th derivative at `z`, for `k <= m`.
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Finite-difference derivative of every lane along `axis`, evaluated at
/// lane positions `range` with a stencil of `width` points that is clamped
/// to the lane (one-sided near its ends).
fn fd_axis(
    a: &Array2<Complex64>,
    axis: usize,
    h: f64,
    order: usize,
    width: usize,
    range: std::ops::Range<usize>,
) -> Array2<Complex64> {
    let len = a.len_of(Axis(axis));
    let width = width.min(len);
    let half = width / 2;
    let mut out_dim = a.raw_dim();
    out_dim[axis] = range.len();
    let mut out = Array2::zeros(out_dim);
    // Stencil weights depend only on the offset of the point inside its window.
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    for (o, i) in range.enumerate() {
        let start = i.saturating_sub(half).min(len - width);
        let offset = i - start;
        let w = cache.entry(offset).or_insert_with(|| {
            let xs: Vec<f64> = (0..width).map(|k| (k as f64 - offset as f64) * h).collect();
            fornberg_weights(0.0, &xs, order).swap_remove(order)
        });
        let window = a.slice_axis(Axis(axis), (start..start + width).into());
        let mut target = out.index_axis_mut(Axis(axis), o);
        for (k, wk) in w.iter().enumerate() {
            if *wk != 0.0 {
                target.scaled_add(Complex64::new(*wk, 0.0), &window.index_axis(Axis(axis), k));
            }
        }
    }
    out
}

/// How a symbol's derivatives are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeStrategy {
    Spectral,
    Stencil { width: usize },
}

/// Relative edge magnitude below which a field counts as decaying.
const DECAY_THRESHOLD: f64 = 1e-12;

pub fn choose_strategy(sym: &SymbolField, width: usize) -> DerivativeStrategy {
    if sym.extension.is_some() {
        return DerivativeStrategy::Stencil { width };
    }
    let v = sym.values();
    let (np, nq) = v.dim();
    let max = sym.field.max_abs();
    let edge = v
        .row(0)
        .iter()
        .chain(v.row(np - 1).iter())
        .chain(v.column(0).iter())
        .chain(v.column(nq - 1).iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if max == 0.0 || edge <= DECAY_THRESHOLD * max {
        DerivativeStrategy::Spectral
    } else {
        DerivativeStrategy::Stencil { width }
    }
}

/// All mixed derivatives `∂_p^a ∂_q^b` with `a + b <= max_order`, keyed `(a, b)`.
pub fn derivative_table(
    sym: &SymbolField,
    max_order: usize,
    width: usize,
) -> HashMap<(usize, usize), Array2<Complex64>> {
    let g = sym.grid();
    let (hp, hq) = (g.dp(), g.dq());
    let mut table = HashMap::new();
    match choose_strategy(sym, width) {
        DerivativeStrategy::Spectral => {
            let mut planner = FftPlanner::new();
            for a in 0..=max_order {
                for b in 0..=max_order - a {
                    let d = if a == 0 && b == 0 {
                        sym.values().clone()
                    } else {
                        spectral_derivative(sym.values(), hp, hq, a, b, &mut planner)
                    };
                    table.insert((a, b), d);
                }
            }
        }
        DerivativeStrategy::Stencil { width } => {
            let (np, nq) = g.shape();
            let ghost = if sym.extension.is_some() { width / 2 } else { 0 };
            let base = if let Some(ext) = &sym.extension {
                let ps: Vec<f64> = (0..np + 2 * ghost)
                    .map(|i| g.p_min + (i as f64 - ghost as f64 + 0.5) * hp)
                    .collect();
                let qs: Vec<f64> = (0..nq + 2 * ghost)
                    .map(|j| g.q_min + (j as f64 - ghost as f64 + 0.5) * hq)
                    .collect();
                let mut e = ext.sample(&ps, &qs);
                e.slice_mut(s![ghost..ghost + np, ghost..ghost + nq])
                    .assign(sym.values());
                e
            } else {
                sym.values().clone()
            };
            for a in 0..=max_order {
                // p-derivative on interior rows, all (including ghost) columns.
                let dp = if a == 0 {
                    base.slice(s![ghost..ghost + np, ..]).to_owned()
                } else {
                    fd_axis(&base, 0, hp, a, width, ghost..ghost + np)
                };
                for b in 0..=max_order - a {
                    let d = if b == 0 {
                        dp.slice(s![.., ghost..ghost + nq]).to_owned()
                    } else {
                        fd_axis(&dp, 1, hq, b, width, ghost..ghost + nq)
                    };
                    table.insert((a, b), d);
                }
            }
        }
    }
    table
}
