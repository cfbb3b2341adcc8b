//! Phase-space symbol of the rotator Hamiltonian `sqrt(1 + 2λ² Ĥ_osc)`.
//!
//! The symbol follows from the spectral decomposition over the diagonal
//! basis, `E(p, q) = 2 e^{-r²} Σ_n (-1)^n E(n) L_n(2r²)`. The series does not
//! converge in the ordinary sense (terms grow like `sqrt(n)`), so partial
//! sums are resummed with an [`Acceleration`] scheme and a Cauchy test.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accel::{AcceleratedSum, Acceleration, Accelerator};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhaseGrid, UnitsTag};
use crate::spectra::rotator_level;
use crate::symbol::{Extension, SymbolField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianOptions {
    /// Number of spectral terms `N`.
    pub n_levels: usize,
    pub acceleration: Acceleration,
    /// Cauchy tolerance on the accelerated iterates.
    pub tolerance: f64,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        Self {
            n_levels: 128,
            acceleration: Acceleration::Euler,
            tolerance: 1e-8,
        }
    }
}

/// Beyond this `r²` the Laguerre recurrence underflows; the classical
/// dispersion is used instead (only ever reached in padding regions).
const MAX_R2: f64 = 650.0;

/// Partial sums of the spectral series at `x = r²`.
fn partial_sums(lambda: f64, x: f64, n: usize) -> Vec<f64> {
    // e^{-x} L_k(2x) by the scaled three-term recurrence.
    let y = 2.0 * x;
    let mut out = Vec::with_capacity(n);
    let mut prev = (-x).exp();
    let mut cur = prev * (1.0 - y);
    let mut acc = 0.0;
    for k in 0..n {
        let lk = if k == 0 {
            prev
        } else if k == 1 {
            cur
        } else {
            let kf = (k - 1) as f64;
            let next = ((2.0 * kf + 1.0 - y) * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            next
        };
        let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
        acc += sign * rotator_level(lambda, k) * lk;
        out.push(acc);
    }
    out
}

/// Terms below `n ≈ r²/2` are exponentially small, so a short sum can pass the
/// Cauchy test spuriously. Resummation is trusted only past this count,
/// which tracks the empirically required `r² + O(r)` terms.
pub fn minimum_terms(x: f64) -> usize {
    (x + 6.0 * x.sqrt() + 10.0).ceil() as usize
}

fn guarded(acc: &Accelerator, lambda: f64, x: f64) -> AcceleratedSum {
    let mut r = acc.sum(&partial_sums(lambda, x, acc.len()));
    if acc.len() < minimum_terms(x) {
        r.converged = false;
    }
    r
}

/// Accelerated symbol value at `r² = x` with a fixed number of terms.
pub fn rotator_symbol_at(lambda: f64, x: f64, opts: &HamiltonianOptions) -> AcceleratedSum {
    let acc = Accelerator::new(opts.acceleration, opts.tolerance, opts.n_levels);
    guarded(&acc, lambda, x)
}

/// Accelerated value with the term count doubled until the Cauchy test passes.
pub fn rotator_symbol_adaptive(lambda: f64, x: f64, opts: &HamiltonianOptions) -> f64 {
    if x > MAX_R2 {
        return (1.0 + lambda * lambda * x).sqrt();
    }
    let mut n = opts.n_levels.max(minimum_terms(x) * 5 / 4);
    loop {
        let acc = Accelerator::new(opts.acceleration, opts.tolerance, n);
        let r = guarded(&acc, lambda, x);
        if r.converged || n >= 8192 {
            return r.value;
        }
        n *= 2;
    }
}

/// Radially symmetric continuation of the rotator symbol.
#[derive(Debug, Clone)]
pub struct RotatorExtension {
    pub lambda: f64,
    pub opts: HamiltonianOptions,
}

impl Extension for RotatorExtension {
    fn sample(&self, ps: &[f64], qs: &[f64]) -> Array2<Complex64> {
        let mut cache: HashMap<u64, f64> = HashMap::new();
        Array2::from_shape_fn((ps.len(), qs.len()), |(i, j)| {
            let x = ps[i] * ps[i] + qs[j] * qs[j];
            let v = *cache
                .entry(x.to_bits())
                .or_insert_with(|| rotator_symbol_adaptive(self.lambda, x, &self.opts));
            Complex64::new(v, 0.0)
        })
    }
}

/// Rotator Hamiltonian symbol in units of `mc²` on a rotator grid.
///
/// Fails with the worst grid point if the accelerated sums do not pass the
/// Cauchy test with `opts.n_levels` terms.
pub fn rotator_hamiltonian_symbol(
    lambda: f64,
    grid: &PhaseGrid,
    opts: &HamiltonianOptions,
) -> Result<SymbolField> {
    grid.require_units(UnitsTag::Rotator)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid lambda {lambda}")));
    }
    if opts.n_levels < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 spectral terms, got {}",
            opts.n_levels
        )));
    }
    let acc = Accelerator::new(opts.acceleration, opts.tolerance, opts.n_levels);
    let ps = grid.p_axis();
    let qs = grid.q_axis();
    let mut cache: HashMap<u64, AcceleratedSum> = HashMap::new();
    let mut worst: Option<(f64, f64, AcceleratedSum)> = None;
    let mut values = Array2::zeros(grid.shape());
    for (i, &p) in ps.iter().enumerate() {
        for (j, &q) in qs.iter().enumerate() {
            let x = p * p + q * q;
            let r = *cache
                .entry(x.to_bits())
                .or_insert_with(|| guarded(&acc, lambda, x));
            if !r.converged && worst.map_or(true, |w| x > w.0 * w.0 + w.1 * w.1) {
                worst = Some((p, q, r));
            }
            values[[i, j]] = Complex64::new(r.value, 0.0);
        }
    }
    if let Some((p, q, r)) = worst {
        return Err(Error::NonConvergence {
            p,
            q,
            last_delta: r.last_delta,
            terms: r.terms,
        });
    }
    let field = ComplexField::from_values(*grid, values)?;
    field.ensure_finite("rotator Hamiltonian")?;
    Ok(SymbolField::new(field, 1.0)?.with_extension(Arc::new(RotatorExtension {
        lambda,
        opts: *opts,
    })))
}

/// Small-λ expansion of the symbol in powers of `r²`, truncated at `order`
/// (0 to 3), in units of `mc²`.
pub fn expansion_value(lambda: f64, r2: f64, order: usize) -> f64 {
    let l2 = lambda * lambda;
    let l4 = l2 * l2;
    let coeffs = [
        l2 / 8.0,
        0.5 * (1.0 - 5.0 * l4 / 8.0),
        -l2 / 8.0,
        l4 / 16.0,
    ];
    let mut s = 0.0;
    let mut pow = 1.0;
    for c in coeffs.iter().take(order.min(3) + 1) {
        s += c * pow;
        pow *= r2;
    }
    1.0 + l2 * s
}

pub fn expansion_hamiltonian(lambda: f64, grid: &PhaseGrid, order: usize) -> Result<SymbolField> {
    grid.require_units(UnitsTag::Rotator)?;
    if order > 3 {
        return Err(Error::InvalidParameter(format!(
            "expansion is available up to third order, got {order}"
        )));
    }
    SymbolField::analytic_real(*grid, 1.0, move |p, q| {
        expansion_value(lambda, p * p + q * q, order)
    })
}

/// Classical dispersion `sqrt(1 + λ² r²)` as a symbol.
pub fn classical_hamiltonian(lambda: f64, grid: &PhaseGrid, hbar_eff: f64) -> Result<SymbolField> {
    SymbolField::analytic_real(*grid, hbar_eff, move |p, q| {
        (1.0 + lambda * lambda * (p * p + q * q)).sqrt()
    })
}
