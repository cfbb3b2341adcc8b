//! Phase-space symbols: sampled fields with an effective ħ and an optional
//! analytic continuation beyond the grid window.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhaseGrid};

/// Evaluates a symbol on arbitrary product grids outside the sampled window.
///
/// Star products of symbols that do not decay (Hamiltonians, polynomials)
/// need values in the zero-padding region; see [`crate::star`].
pub trait Extension: Send + Sync {
    /// Values at every `(ps[i], qs[j])`, shape `(ps.len(), qs.len())`.
    fn sample(&self, ps: &[f64], qs: &[f64]) -> Array2<Complex64>;
}

/// Extension backed by a pointwise closure.
pub struct FnExtension<F>(pub F);

impl<F> Extension for FnExtension<F>
where
    F: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    fn sample(&self, ps: &[f64], qs: &[f64]) -> Array2<Complex64> {
        Array2::from_shape_fn((ps.len(), qs.len()), |(i, j)| (self.0)(ps[i], qs[j]))
    }
}

#[derive(Clone)]
pub struct SymbolField {
    pub field: ComplexField,
    pub hbar_eff: f64,
    pub extension: Option<Arc<dyn Extension>>,
}

impl fmt::Debug for SymbolField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolField")
            .field("grid", &self.field.grid)
            .field("hbar_eff", &self.hbar_eff)
            .field("extension", &self.extension.is_some())
            .finish()
    }
}

fn check_hbar(hbar_eff: f64) -> Result<()> {
    if hbar_eff > 0.0 && hbar_eff.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "effective hbar must be positive, got {hbar_eff}"
        )))
    }
}

impl SymbolField {
    pub fn new(field: ComplexField, hbar_eff: f64) -> Result<Self> {
        check_hbar(hbar_eff)?;
        Ok(Self {
            field,
            hbar_eff,
            extension: None,
        })
    }

    /// Sample a closure on the grid and keep it as the extension.
    pub fn analytic<F>(grid: PhaseGrid, hbar_eff: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        check_hbar(hbar_eff)?;
        let ext = FnExtension(f);
        let values = ext.sample(&grid.p_axis(), &grid.q_axis());
        Ok(Self {
            field: ComplexField::from_values(grid, values)?,
            hbar_eff,
            extension: Some(Arc::new(ext)),
        })
    }

    /// Real closure variant of [`SymbolField::analytic`].
    pub fn analytic_real<F>(grid: PhaseGrid, hbar_eff: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::analytic(grid, hbar_eff, move |p, q| Complex64::new(f(p, q), 0.0))
    }

    pub fn with_extension(mut self, ext: Arc<dyn Extension>) -> Self {
        self.extension = Some(ext);
        self
    }

    pub fn without_extension(mut self) -> Self {
        self.extension = None;
        self
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.field.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.field.values
    }

    pub fn require_compatible(&self, other: &SymbolField) -> Result<()> {
        self.field.grid.require_same(&other.field.grid)?;
        if self.hbar_eff != other.hbar_eff {
            return Err(Error::HbarMismatch(self.hbar_eff, other.hbar_eff));
        }
        Ok(())
    }

    /// Same grid and ħ, new values, no extension.
    pub fn derived(&self, values: Array2<Complex64>) -> Result<SymbolField> {
        Ok(SymbolField {
            field: ComplexField::from_values(self.field.grid, values)?,
            hbar_eff: self.hbar_eff,
            extension: None,
        })
    }

    /// Constant symbol.
    pub fn constant(grid: PhaseGrid, hbar_eff: f64, c: Complex64) -> Result<Self> {
        Self::analytic(grid, hbar_eff, move |_, _| c)
    }
}
