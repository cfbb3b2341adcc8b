//! Moyal star product, brackets and the star exponential.
//!
//! `a ⋆ b = a exp{(iħ/2)(←∂_q →∂_p − ←∂_p →∂_q)} b`.
//!
//! The integral backend works in a mixed representation: Fourier in `p`,
//! direct in `q`. Writing `a = Σ_l ã_l(q) e^{iκ_l p}`, the product is the
//! twisted convolution
//!
//! `c̃_L(q) = Σ_{l+l'=L} ã_l(q − ħκ_{l'}/2) · b̃_{l'}(q + ħκ_l/2)`,
//!
//! with the q-shifts applied as phases in q-Fourier space. Cost is
//! `O(N³ log N)` for an `N × N` grid. Fields are zero-padded by an integer
//! factor; symbols that do not decay are continued into the padding with
//! their [`Extension`](crate::symbol::Extension) under a smooth taper, which
//! leaves products with decaying partners unchanged in the window.

use std::collections::HashMap;

use ndarray::{s, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::derivatives::derivative_table;
use crate::error::{Error, Result};
use crate::fourier::{fft2_normalized, fft_axis, wavenumbers, Plan};
use crate::grid::{ComplexField, PhaseGrid};
use crate::symbol::SymbolField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarBackend {
    /// Mixed-representation twisted convolution on a grid padded by `padding`.
    IntegralFft { padding: usize },
    /// Derivative expansion truncated after `order` terms.
    TruncatedSeries { order: usize },
}

impl Default for StarBackend {
    fn default() -> Self {
        StarBackend::IntegralFft { padding: 2 }
    }
}

/// Rows whose peak is below this fraction of the global peak are skipped.
const ROW_CUTOFF: f64 = 1e-17;

fn smooth_step(u: f64) -> f64 {
    // 1 for u <= 0, 0 for u >= 1, C∞ in between.
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let f = |y: f64| (-1.0 / y).exp();
    f(1.0 - u) / (f(1.0 - u) + f(u))
}

/// Taper profile along one padded axis.
fn taper(coords: &[f64], centre: f64, half: f64, padded_half: f64) -> Vec<f64> {
    let margin = padded_half - half;
    let a0 = half + margin / 3.0;
    let a1 = half + 0.95 * margin;
    coords
        .iter()
        .map(|&x| smooth_step(((x - centre).abs() - a0) / (a1 - a0)))
        .collect()
}

/// Precomputed FFT plans and shift phases for one grid, ħ and padding.
pub struct StarEngine {
    grid: PhaseGrid,
    hbar: f64,
    padding: usize,
    np: usize,
    nq: usize,
    plan_p: Plan,
    plan_q: Plan,
    kp: Vec<f64>,
    /// `phase[l][k] = exp(−i κ^q_k ħ κ^p_l / 2)`.
    phase: Array2<Complex64>,
}

/// A symbol transformed for repeated use in products.
pub struct PreparedSymbol {
    hat: Array2<Complex64>,
    rows: Vec<usize>,
    row_peak: Vec<f64>,
    real: bool,
    /// Shifted rows when cached: `[(row index in rows, other row l')] → values over q`.
    shifted: Option<HashMap<(usize, usize, bool), Vec<Complex64>>>,
}

impl PreparedSymbol {
    pub fn is_real(&self) -> bool {
        self.real
    }
}

impl StarEngine {
    pub fn new(grid: &PhaseGrid, hbar: f64, padding: usize) -> Result<Self> {
        if padding == 0 {
            return Err(Error::InvalidParameter("padding factor must be >= 1".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid hbar {hbar}")));
        }
        let np = grid.np * padding;
        let nq = grid.nq * padding;
        let mut planner = FftPlanner::new();
        let plan_p = Plan::new(&mut planner, np);
        let plan_q = Plan::new(&mut planner, nq);
        let kp = wavenumbers(np, grid.dp());
        let kq = wavenumbers(nq, grid.dq());
        let phase = Array2::from_shape_fn((np, nq), |(l, k)| {
            Complex64::from_polar(1.0, -0.5 * hbar * kq[k] * kp[l])
        });
        Ok(Self {
            grid: *grid,
            hbar,
            padding,
            np,
            nq,
            plan_p,
            plan_q,
            kp,
            phase,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    fn offsets(&self) -> (usize, usize) {
        (
            (self.np - self.grid.np) / 2,
            (self.nq - self.grid.nq) / 2,
        )
    }

    /// Padded sample coordinates.
    fn padded_axes(&self) -> (Vec<f64>, Vec<f64>) {
        let (op, oq) = self.offsets();
        let g = &self.grid;
        let ps = (0..self.np)
            .map(|i| g.p_min + (i as f64 - op as f64 + 0.5) * g.dp())
            .collect();
        let qs = (0..self.nq)
            .map(|j| g.q_min + (j as f64 - oq as f64 + 0.5) * g.dq())
            .collect();
        (ps, qs)
    }

    fn pad(&self, sym: &SymbolField) -> Array2<Complex64> {
        let (op, oq) = self.offsets();
        let g = &self.grid;
        let mut out = match (&sym.extension, self.padding > 1) {
            (Some(ext), true) => {
                let (ps, qs) = self.padded_axes();
                let mut e = ext.sample(&ps, &qs);
                let wp = taper(
                    &ps,
                    0.5 * (g.p_min + g.p_max),
                    0.5 * (g.p_max - g.p_min),
                    0.5 * self.padding as f64 * (g.p_max - g.p_min),
                );
                let wq = taper(
                    &qs,
                    0.5 * (g.q_min + g.q_max),
                    0.5 * (g.q_max - g.q_min),
                    0.5 * self.padding as f64 * (g.q_max - g.q_min),
                );
                for ((i, j), v) in e.indexed_iter_mut() {
                    *v *= wp[i] * wq[j];
                }
                e
            }
            _ => Array2::zeros((self.np, self.nq)),
        };
        out.slice_mut(s![op..op + g.np, oq..oq + g.nq])
            .assign(sym.values());
        out
    }

    /// Transform a symbol; `cache_shifts` precomputes every shifted row,
    /// which pays off when the symbol enters many products.
    pub fn prepare(&self, sym: &SymbolField, cache_shifts: bool) -> Result<PreparedSymbol> {
        self.grid.require_same(sym.grid())?;
        if sym.hbar_eff != self.hbar {
            return Err(Error::HbarMismatch(sym.hbar_eff, self.hbar));
        }
        let padded = self.pad(sym);
        let hat = fft2_normalized(&padded, &self.plan_p, &self.plan_q);
        let peaks: Vec<f64> = hat
            .outer_iter()
            .map(|r| r.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect();
        let global = peaks.iter().cloned().fold(0.0, f64::max);
        let rows: Vec<usize> = (0..self.np)
            .filter(|&l| peaks[l] > ROW_CUTOFF * global && peaks[l] > 0.0)
            .collect();
        let row_peak = rows.iter().map(|&l| peaks[l]).collect();
        let mut prepared = PreparedSymbol {
            hat,
            rows,
            row_peak,
            real: sym.field.is_exactly_real(),
            shifted: None,
        };
        if cache_shifts {
            let mut map = HashMap::new();
            for &l in &prepared.rows {
                for other in 0..self.np {
                    for left in [true, false] {
                        map.insert((l, other, left), self.shift_row(&prepared, l, other, left));
                    }
                }
            }
            prepared.shifted = Some(map);
        }
        Ok(prepared)
    }

    /// Row `l` of a prepared symbol in q-space, shifted by `−ħκ_{other}/2`
    /// when it is the left factor and by `+ħκ_{other}/2` when it is the right.
    fn shift_row(&self, s: &PreparedSymbol, l: usize, other: usize, left: bool) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = s
            .hat
            .row(l)
            .iter()
            .zip(self.phase.row(other).iter())
            .map(|(a, ph)| if left { a * ph } else { a * ph.conj() })
            .collect();
        self.plan_q.inverse.process(&mut buf);
        buf
    }

    fn shifted<'a>(
        &self,
        s: &'a PreparedSymbol,
        l: usize,
        other: usize,
        left: bool,
        scratch: &'a mut Vec<Complex64>,
    ) -> &'a [Complex64] {
        if let Some(map) = &s.shifted {
            if let Some(v) = map.get(&(l, other, left)) {
                return v;
            }
        }
        *scratch = self.shift_row(s, l, other, left);
        scratch
    }

    /// `a ⋆ b` cropped to the grid window.
    pub fn product(&self, a: &PreparedSymbol, b: &PreparedSymbol) -> Result<SymbolField> {
        let np = self.np as i64;
        let half = np / 2;
        let signed = |l: usize| -> i64 {
            let v = l as i64;
            if v < (np + 1) / 2 {
                v
            } else {
                v - np
            }
        };
        let peak_a = a.row_peak.iter().cloned().fold(0.0, f64::max);
        let peak_b = b.row_peak.iter().cloned().fold(0.0, f64::max);
        let pair_cut = ROW_CUTOFF * peak_a * peak_b;
        let mut ctil: Array2<Complex64> = Array2::zeros((self.np, self.nq));
        let mut sa = Vec::new();
        let mut sb = Vec::new();
        for (ia, &l) in a.rows.iter().enumerate() {
            let ls = signed(l);
            for (ib, &l2) in b.rows.iter().enumerate() {
                if a.row_peak[ia] * b.row_peak[ib] <= pair_cut {
                    continue;
                }
                let total = ls + signed(l2);
                if total < -half || total >= np - half {
                    continue;
                }
                let out = total.rem_euclid(np) as usize;
                let ra = self.shifted(a, l, l2, true, &mut sa);
                let rb = self.shifted(b, l2, l, false, &mut sb);
                let mut target = ctil.row_mut(out);
                for ((t, x), y) in target.iter_mut().zip(ra.iter()).zip(rb.iter()) {
                    *t += x * y;
                }
            }
        }
        fft_axis(&mut ctil, 0, &self.plan_p, true);
        let (op, oq) = self.offsets();
        let values = ctil
            .slice(s![op..op + self.grid.np, oq..oq + self.grid.nq])
            .to_owned();
        let field = ComplexField::from_values(self.grid, values)?;
        field.ensure_finite("star product")?;
        SymbolField::new(field, self.hbar)
    }

    /// Wavenumber of p-row `l` on the padded grid.
    pub fn row_wavenumber(&self, l: usize) -> f64 {
        self.kp[l]
    }
}

/// Stencil width for a series expansion of the given order.
fn stencil_width(order: usize) -> usize {
    2 * (order + 7).div_ceil(2) + 1
}

fn series_product(a: &SymbolField, b: &SymbolField, order: usize) -> Result<SymbolField> {
    let width = stencil_width(order);
    let da = derivative_table(a, order, width);
    let db = derivative_table(b, order, width);
    let hbar = a.hbar_eff;
    let mut out: Array2<Complex64> = Array2::zeros(a.grid().shape());
    let mut coeff = Complex64::new(1.0, 0.0);
    for j in 0..=order {
        if j > 0 {
            coeff *= Complex64::new(0.0, 0.5 * hbar) / j as f64;
        }
        let mut binom = 1.0;
        for k in 0..=j {
            if k > 0 {
                binom = binom * (j - k + 1) as f64 / k as f64;
            }
            // A carries ∂_q^k ∂_p^{j-k}, B carries ∂_p^k ∂_q^{j-k}.
            let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
            let w = coeff * binom * sign;
            let ta = &da[&(j - k, k)];
            let tb = &db[&(k, j - k)];
            ndarray::Zip::from(&mut out)
                .and(ta)
                .and(tb)
                .for_each(|o, x, y| *o += w * x * y);
        }
    }
    let field = ComplexField::from_values(*a.grid(), out)?;
    field.ensure_finite("series star product")?;
    SymbolField::new(field, hbar)
}

/// `a ⋆ b`.
pub fn star(a: &SymbolField, b: &SymbolField, backend: &StarBackend) -> Result<SymbolField> {
    a.require_compatible(b)?;
    match *backend {
        StarBackend::IntegralFft { padding } => {
            let engine = StarEngine::new(a.grid(), a.hbar_eff, padding)?;
            let pa = engine.prepare(a, false)?;
            let pb = engine.prepare(b, false)?;
            engine.product(&pa, &pb)
        }
        StarBackend::TruncatedSeries { order } => series_product(a, b, order),
    }
}

fn combine(
    ab: &SymbolField,
    ba: &SymbolField,
    sign: f64,
    hbar: f64,
) -> Result<SymbolField> {
    let scale = Complex64::new(0.0, -1.0 / hbar);
    let values = (&ab.field.values + &(&ba.field.values * sign)) * scale;
    ab.derived(values)
}

/// Moyal bracket `(a⋆b − b⋆a)/(iħ)`.
pub fn moyal_bracket(a: &SymbolField, b: &SymbolField, backend: &StarBackend) -> Result<SymbolField> {
    a.require_compatible(b)?;
    let ab = star(a, b, backend)?;
    if a.field.is_exactly_real() && b.field.is_exactly_real() {
        // b⋆a = conj(a⋆b) for real symbols, so the bracket is 2 Im(a⋆b)/ħ.
        let values = ab
            .field
            .values
            .mapv(|v| Complex64::new(2.0 * v.im / a.hbar_eff, 0.0));
        return ab.derived(values);
    }
    let ba = star(b, a, backend)?;
    combine(&ab, &ba, -1.0, a.hbar_eff)
}

/// Anti-Moyal bracket `(a⋆b + b⋆a)/(iħ)`.
pub fn anti_moyal_bracket(
    a: &SymbolField,
    b: &SymbolField,
    backend: &StarBackend,
) -> Result<SymbolField> {
    a.require_compatible(b)?;
    let ab = star(a, b, backend)?;
    if a.field.is_exactly_real() && b.field.is_exactly_real() {
        let values = ab
            .field
            .values
            .mapv(|v| Complex64::new(0.0, -2.0 * v.re / a.hbar_eff));
        return ab.derived(values);
    }
    let ba = star(b, a, backend)?;
    combine(&ab, &ba, 1.0, a.hbar_eff)
}

/// Poisson bracket `∂_q a ∂_p b − ∂_p a ∂_q b`.
pub fn poisson_bracket(a: &SymbolField, b: &SymbolField) -> Result<SymbolField> {
    a.require_compatible(b)?;
    let width = stencil_width(1);
    let da = derivative_table(a, 1, width);
    let db = derivative_table(b, 1, width);
    let values = &da[&(0, 1)] * &db[&(1, 0)] - &da[&(1, 0)] * &db[&(0, 1)];
    a.derived(values)
}

/// Result of [`star_exp`].
#[derive(Debug, Clone)]
pub struct StarExp {
    pub symbol: SymbolField,
    /// Max-norm of the last Taylor term that was added.
    pub residual: f64,
    /// Successive term norms kept growing past the point where the
    /// factorial should have taken over.
    pub diverged: bool,
    pub squarings: u32,
}

/// `exp_⋆(t a) = Σ_k t^k a^{⋆k} / k!`, with scaling and squaring when
/// `|t| max|a| > 1`.
///
/// Powers of a non-decaying symbol are themselves non-decaying, so with the
/// series backend and an extension available the computation runs on a
/// grid enlarged by half its size and is cropped afterwards; one-sided
/// stencil errors then stay outside the window.
pub fn star_exp(
    a: &SymbolField,
    t: Complex64,
    backend: &StarBackend,
    max_terms: usize,
) -> Result<StarExp> {
    if let (StarBackend::TruncatedSeries { .. }, Some(ext)) = (backend, &a.extension) {
        let g = *a.grid();
        let (mp, mq) = (g.np / 4, g.nq / 4);
        let big = PhaseGrid::new(
            (g.p_min - mp as f64 * g.dp(), g.p_max + mp as f64 * g.dp()),
            (g.q_min - mq as f64 * g.dq(), g.q_max + mq as f64 * g.dq()),
            g.np + 2 * mp,
            g.nq + 2 * mq,
            g.units,
        )?;
        let values = ext.sample(&big.p_axis(), &big.q_axis());
        let wide = SymbolField {
            field: ComplexField::from_values(big, values)?,
            hbar_eff: a.hbar_eff,
            extension: Some(ext.clone()),
        };
        let mut out = star_exp_on_grid(&wide, t, backend, max_terms)?;
        let cropped = out
            .symbol
            .values()
            .slice(s![mp..mp + g.np, mq..mq + g.nq])
            .to_owned();
        out.symbol = SymbolField::new(ComplexField::from_values(g, cropped)?, a.hbar_eff)?;
        return Ok(out);
    }
    star_exp_on_grid(a, t, backend, max_terms)
}

fn star_exp_on_grid(
    a: &SymbolField,
    t: Complex64,
    backend: &StarBackend,
    max_terms: usize,
) -> Result<StarExp> {
    let norm = a.field.max_abs() * t.norm();
    let squarings = if norm > 1.0 {
        norm.log2().ceil() as u32
    } else {
        0
    };
    let scale = t / 2f64.powi(squarings as i32);
    let mut scaled = a.clone();
    scaled.field.values.mapv_inplace(|v| v * scale);
    if let Some(ext) = a.extension.clone() {
        scaled.extension = Some(std::sync::Arc::new(ScaledExtension { inner: ext, scale }));
    }
    let one = SymbolField::constant(*a.grid(), a.hbar_eff, Complex64::new(1.0, 0.0))?;
    let mut sum = one.field.values.clone();
    let mut term = one;
    let mut residual = f64::INFINITY;
    let mut growth = 0;
    let mut prev_norm = 1.0;
    let threshold = 2.0 * scaled.field.max_abs() + 2.0;
    for k in 1..=max_terms {
        let mut next = star(&term, &scaled, backend)?;
        next.field.values.mapv_inplace(|v| v / k as f64);
        let n = next.field.max_abs();
        sum = sum + &next.field.values;
        residual = n;
        if k as f64 > threshold && n > prev_norm {
            growth += 1;
        } else {
            growth = 0;
        }
        prev_norm = n;
        term = next;
        if n <= 1e-17 * sum.iter().map(|v| v.norm()).fold(0.0, f64::max) {
            break;
        }
    }
    let mut result = a.derived(sum)?;
    for _ in 0..squarings {
        result = star(&result, &result, backend)?;
    }
    Ok(StarExp {
        symbol: result,
        residual,
        diverged: growth >= 3,
        squarings,
    })
}

struct ScaledExtension {
    inner: std::sync::Arc<dyn crate::symbol::Extension>,
    scale: Complex64,
}

impl crate::symbol::Extension for ScaledExtension {
    fn sample(&self, ps: &[f64], qs: &[f64]) -> Array2<Complex64> {
        self.inner.sample(ps, qs) * self.scale
    }
}
