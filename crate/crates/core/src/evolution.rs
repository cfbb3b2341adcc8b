//! Time evolution of Wigner components and Heisenberg symbols.
//!
//! Units: ħ = 1, energies in `mc²`, times in `ħ/mc²`. Liouville equations:
//! `∂_t W_[±] = ±{E, W_[±]}_M`, `∂_t W_{±} = ∓[E, W_{±}]_M`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::basis::BasisCache;
use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::ladder::Observable;
use crate::special::binomial_weights;
use crate::spectra::{ChargeFactor, EnergySpectrum};
use crate::star::{anti_moyal_bracket, moyal_bracket, PreparedSymbol, StarBackend, StarEngine};
use crate::state::{Branch, CoefficientMatrices};
use crate::symbol::SymbolField;
use crate::wigner::{moment, Component, WignerComponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvolutionMethod {
    Spectral,
    GridRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub method: EvolutionMethod,
    pub dt: f64,
    pub t_final: f64,
    pub backend: StarBackend,
}

/// Grid integration requires `dt · max|E| < STABILITY_LIMIT`.
pub const STABILITY_LIMIT: f64 = 0.5;

impl EvolutionPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        Ok(())
    }

    /// Number of steps, the last one possibly shortened to land on `t_final`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

fn require_levels(spec: &EnergySpectrum, n: usize) -> Result<()> {
    if spec.len() < n {
        return Err(Error::LevelOutOfRange {
            index: n,
            size: spec.len(),
        });
    }
    Ok(())
}

/// Exact evolution of the coefficients: `C_{n;±}(t) = C_{n;±} e^{∓iE(n)t}`.
pub fn evolve_spectral(
    coeffs: &CoefficientMatrices,
    spec: &EnergySpectrum,
    t: f64,
) -> Result<CoefficientMatrices> {
    let n = coeffs.size();
    require_levels(spec, n)?;
    let e = &spec.levels;
    let phase = |x: f64| Complex64::from_polar(1.0, x * t);
    let mut out = coeffs.clone();
    for m in 0..n {
        for k in 0..n {
            let diff = e[m] - e[k];
            let sum = e[m] + e[k];
            out.even_plus[[m, k]] *= phase(diff);
            out.even_minus[[m, k]] *= phase(-diff);
            out.odd_plus[[m, k]] *= phase(sum);
            out.odd_minus[[m, k]] *= phase(-sum);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EvolutionDiagnostics {
    pub steps: usize,
    /// Largest `|∫∫(W_[+] + W_[-])(t) − ∫∫(W_[+] + W_[-])(0)|` over all steps.
    pub norm_drift: f64,
    /// Largest `|Im|` of the even parts over all steps.
    pub reality: f64,
}

#[derive(Debug, Clone)]
pub struct GridEvolution {
    pub components: WignerComponents,
    pub diagnostics: EvolutionDiagnostics,
}

enum Rhs {
    Even(f64),
    Odd(f64),
}

/// Bracket evaluator with the Hamiltonian prepared once.
struct Stepper<'a> {
    backend: StarBackend,
    hamiltonian: &'a SymbolField,
    engine: Option<(StarEngine, PreparedSymbol)>,
}

impl<'a> Stepper<'a> {
    fn new(hamiltonian: &'a SymbolField, backend: StarBackend) -> Result<Self> {
        let engine = match backend {
            StarBackend::IntegralFft { padding } => {
                let engine = StarEngine::new(hamiltonian.grid(), hamiltonian.hbar_eff, padding)?;
                let prepared = engine.prepare(hamiltonian, true)?;
                Some((engine, prepared))
            }
            StarBackend::TruncatedSeries { .. } => None,
        };
        Ok(Self {
            backend,
            hamiltonian,
            engine,
        })
    }

    fn rhs(&self, w: &Array2<Complex64>, kind: &Rhs) -> Result<Array2<Complex64>> {
        let h = self.hamiltonian;
        let field = SymbolField::new(ComplexField::from_values(*h.grid(), w.clone())?, h.hbar_eff)?;
        let ih = Complex64::new(0.0, -1.0 / h.hbar_eff);
        let bracket = match &self.engine {
            Some((engine, pe)) => {
                let pw = engine.prepare(&field, false)?;
                let ew = engine.product(pe, &pw)?.field.values;
                let real = pe.is_real() && pw.is_real();
                let we = if real {
                    ew.mapv(|v| v.conj())
                } else {
                    engine.product(&pw, pe)?.field.values
                };
                match kind {
                    Rhs::Even(s) => (&ew - &we) * (ih * *s),
                    Rhs::Odd(s) => (&ew + &we) * (ih * -*s),
                }
            }
            None => match kind {
                Rhs::Even(s) => moyal_bracket(h, &field, &self.backend)?.field.values * *s,
                Rhs::Odd(s) => anti_moyal_bracket(h, &field, &self.backend)?.field.values * -*s,
            },
        };
        Ok(bracket)
    }

    fn rk4(&self, w: &Array2<Complex64>, kind: &Rhs, dt: f64) -> Result<Array2<Complex64>> {
        let k1 = self.rhs(w, kind)?;
        let k2 = self.rhs(&(w + &(&k1 * (0.5 * dt))), kind)?;
        let k3 = self.rhs(&(w + &(&k2 * (0.5 * dt))), kind)?;
        let k4 = self.rhs(&(w + &(&k3 * dt)), kind)?;
        Ok(w + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)))
    }
}

fn check_finite(f: &Array2<Complex64>, grid: &crate::grid::PhaseGrid, step: usize, name: &str) -> Result<()> {
    if let Some(((i, j), _)) = f.indexed_iter().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite {
            p: grid.p(i),
            q: grid.q(j),
            context: format!("{name} at step {step}"),
        });
    }
    Ok(())
}

/// RK4 integration of the Liouville equations on the grid.
pub fn evolve_grid(
    w: &WignerComponents,
    hamiltonian: &SymbolField,
    plan: &EvolutionPlan,
) -> Result<GridEvolution> {
    evolve_grid_observed(w, hamiltonian, plan, |_, _, _| Ok(()))
}

/// [`evolve_grid`] calling `observer(step, t, fields)` after every step.
pub fn evolve_grid_observed<F>(
    w: &WignerComponents,
    hamiltonian: &SymbolField,
    plan: &EvolutionPlan,
    mut observer: F,
) -> Result<GridEvolution>
where
    F: FnMut(usize, f64, &WignerComponents) -> Result<()>,
{
    plan.validate()?;
    let grid = *w.grid();
    grid.require_same(hamiltonian.grid())?;
    let e_max = hamiltonian.field.max_abs();
    if plan.dt * e_max >= STABILITY_LIMIT {
        return Err(Error::UnstableStep(plan.dt * e_max, STABILITY_LIMIT));
    }
    let stepper = Stepper::new(hamiltonian, plan.backend)?;
    let kinds = [Rhs::Even(1.0), Rhs::Even(-1.0), Rhs::Odd(1.0), Rhs::Odd(-1.0)];
    let mut current = w.clone();
    let active: Vec<bool> = Component::ALL.iter().map(|c| current.get(*c).max_abs() > 0.0).collect();
    let even_norm = |c: &WignerComponents| c.even_plus.integrate().re + c.even_minus.integrate().re;
    let n0 = even_norm(&current);
    let mut diag = EvolutionDiagnostics::default();
    let steps = plan.steps();
    let mut t = 0.0;
    for step in 0..steps {
        let dt = plan.dt.min(plan.t_final - t);
        for ((comp, kind), on) in Component::ALL.iter().zip(kinds.iter()).zip(active.iter()) {
            if *on {
                let field = current.get_mut(*comp);
                field.values = stepper.rk4(&field.values, kind, dt)?;
                check_finite(&field.values, &grid, step + 1, comp.as_str())?;
            }
        }
        t += dt;
        diag.steps = step + 1;
        diag.norm_drift = diag.norm_drift.max((even_norm(&current) - n0).abs());
        diag.reality = diag
            .reality
            .max(current.even_plus.max_abs_imag())
            .max(current.even_minus.max_abs_imag());
        observer(step + 1, t, &current)?;
    }
    Ok(GridEvolution {
        components: current,
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Relative round-trip mismatch above which [`heisenberg_symbol`] fails.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;

/// Matrix elements `A_nm = ∫∫ a conj(W_nm)` of a symbol by grid quadrature.
pub fn project_symbol(a: &SymbolField, cache: &mut BasisCache, n: usize) -> Array2<Complex64> {
    let cell = a.grid().cell_area();
    Array2::from_shape_fn((n, n), |(k, m)| {
        let w = cache.get(k, m);
        a.values().iter().zip(w.iter()).map(|(x, y)| x * y.conj()).sum::<Complex64>() * cell
    })
}

/// `2π Σ A_nm W_nm` summed shell by shell (`max(n, m) = K`) with Euler
/// acceleration over `K`. Plain truncation does not converge pointwise: the
/// shell partial sums alternate, much like those of the Hamiltonian symbol.
pub fn synthesize_symbol(coeffs: &Array2<Complex64>, cache: &mut BasisCache) -> Array2<Complex64> {
    let grid = *cache.grid();
    let n = coeffs.nrows();
    let weights = if n >= 2 { binomial_weights(n - 1) } else { vec![1.0; n] };
    let mut shell_sum: Array2<Complex64> = Array2::zeros(grid.shape());
    let mut out: Array2<Complex64> = Array2::zeros(grid.shape());
    for k in 0..n {
        for j in 0..=k {
            for (a, b) in [(k, j), (j, k)] {
                let c = coeffs[[a, b]];
                if c.norm() > 0.0 {
                    shell_sum.scaled_add(c * 2.0 * PI, &cache.get(a, b));
                }
                if a == b {
                    break;
                }
            }
        }
        out.scaled_add(Complex64::new(weights[k], 0.0), &shell_sum);
    }
    out
}

#[derive(Debug, Clone)]
pub struct HeisenbergSymbol {
    pub symbol: SymbolField,
    /// Largest relative mismatch `|a − synth(a)| / max|a|` at `t = 0` over the
    /// disc `r² ≤ valid_r2`.
    pub tail: f64,
    /// The result is trusted only inside `r² ≤ valid_r2 = N/10`.
    pub valid_r2: f64,
}

/// Heisenberg-picture symbol of a charge-invariant observable through its
/// `N × N` energy-basis projection. The coefficient of `W_nm` acquires
/// `e^{±i(E(n) − E(m))t}` (even) or `e^{±i(E(n) + E(m))t}` (odd), the sign
/// following the branch.
pub fn heisenberg_symbol(
    a: &SymbolField,
    spec: &EnergySpectrum,
    parity: Parity,
    branch: Branch,
    t: f64,
    n: usize,
) -> Result<HeisenbergSymbol> {
    require_levels(spec, n)?;
    let grid = *a.grid();
    let valid_r2 = 0.1 * n as f64;
    let mut cache = BasisCache::new(&grid, n)?;
    let coeffs = project_symbol(a, &mut cache, n);
    let back = synthesize_symbol(&coeffs, &mut cache);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for ((i, j), v) in a.values().indexed_iter() {
        let (p, q) = (grid.p(i), grid.q(j));
        if p * p + q * q <= valid_r2 {
            worst = worst.max((v - back[[i, j]]).norm());
            scale = scale.max(v.norm());
        }
    }
    let tail = if scale > 0.0 { worst / scale } else { worst };
    if tail > PROJECTION_TOLERANCE {
        return Err(Error::ProjectionTail {
            tail,
            tolerance: PROJECTION_TOLERANCE,
        });
    }
    let e = &spec.levels;
    let s = branch.sign();
    let evolved = Array2::from_shape_fn((n, n), |(k, m)| {
        let w = match parity {
            Parity::Even => e[k] - e[m],
            Parity::Odd => e[k] + e[m],
        };
        coeffs[[k, m]] * Complex64::from_polar(1.0, s * w * t)
    });
    let values = synthesize_symbol(&evolved, &mut cache);
    Ok(HeisenbergSymbol {
        symbol: SymbolField::new(ComplexField::from_values(grid, values)?, a.hbar_eff)?,
        tail,
        valid_r2,
    })
}

/// `⟨x^k⟩(t)` over the requested times.
pub fn means_timeseries(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    spec: &EnergySpectrum,
    observable: Observable,
    power: usize,
    times: &[f64],
) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| moment(&evolve_spectral(coeffs, spec, t)?, factors, observable, power))
        .collect()
}

/// Angular frequency of the largest non-zero FFT peak of a uniformly sampled
/// series, with the bin width `2π/(len·dt)`.
pub fn dominant_angular_frequency(series: &[f64], dt: f64) -> Result<(f64, f64)> {
    let n = series.len();
    if n < 4 || !(dt > 0.0) {
        return Err(Error::InvalidParameter("need at least 4 samples and dt > 0".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = series.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (k, _) = buf[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, v)| (i + 1, v.norm()))
        .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
    let bin = 2.0 * PI / (n as f64 * dt);
    Ok((k as f64 * bin, bin))
}
