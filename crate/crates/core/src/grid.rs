//! Cell-centred rectangular phase-space grids and complex fields on them.
//!
//! Fields are stored with shape `(np, nq)`: the first axis is momentum,
//! the second position. Sample points sit at cell centres so that grids
//! symmetric about the origin are exactly symmetric under `p → -p`.

use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitsTag {
    /// Free particle: `p` in `mc`, `q` in `ħ/mc`.
    FreeParticle,
    /// Rotator: dimensionless oscillator variables.
    Rotator,
}

impl UnitsTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnitsTag::FreeParticle => "FreeParticle",
            UnitsTag::Rotator => "Rotator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub np: usize,
    pub nq: usize,
    pub units: UnitsTag,
}

impl PhaseGrid {
    pub fn new(
        p_range: (f64, f64),
        q_range: (f64, f64),
        np: usize,
        nq: usize,
        units: UnitsTag,
    ) -> Result<Self> {
        for (name, (lo, hi)) in [("p", p_range), ("q", q_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidParameter(format!(
                    "{name} range must be finite and increasing, got [{lo}, {hi}]"
                )));
            }
        }
        for (name, n) in [("np", np), ("nq", nq)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be even and at least 8, got {n}"
                )));
            }
        }
        Ok(Self {
            p_min: p_range.0,
            p_max: p_range.1,
            q_min: q_range.0,
            q_max: q_range.1,
            np,
            nq,
            units,
        })
    }

    /// Square grid `[-half, half]²`.
    pub fn square(half: f64, n: usize, units: UnitsTag) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n, units)
    }

    /// Parse `"pmin,pmax,qmin,qmax,np,nq"`.
    pub fn parse(spec: &str, units: UnitsTag) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Parse(format!(
                "grid needs six comma-separated fields, got {:?}",
                spec
            )));
        }
        let f = |s: &str| f64::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")));
        let u = |s: &str| usize::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")));
        Self::new(
            (f(parts[0])?, f(parts[1])?),
            (f(parts[2])?, f(parts[3])?),
            u(parts[4])?,
            u(parts[5])?,
            units,
        )
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.nq as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dp() * self.dq()
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p_min + (i as f64 + 0.5) * self.dp()
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q_min + (j as f64 + 0.5) * self.dq()
    }

    pub fn p_axis(&self) -> Vec<f64> {
        (0..self.np).map(|i| self.p(i)).collect()
    }

    pub fn q_axis(&self) -> Vec<f64> {
        (0..self.nq).map(|j| self.q(j)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.np, self.nq)
    }

    /// Same geometry and units (exact comparison).
    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self == other
    }

    pub fn require_same(&self, other: &PhaseGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub fn require_units(&self, units: UnitsTag) -> Result<()> {
        if self.units == units {
            Ok(())
        } else {
            Err(Error::UnitsMismatch {
                expected: units.as_str().into(),
                found: self.units.as_str().into(),
            })
        }
    }
}

/// Complex samples on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: PhaseGrid,
    pub values: Array2<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: PhaseGrid) -> Self {
        Self {
            values: Array2::zeros(grid.shape()),
            grid,
        }
    }

    pub fn from_values(grid: PhaseGrid, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::GridMismatch(format!(
                "values have shape {:?}, grid expects {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(p, q)` at every grid point.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let ps = grid.p_axis();
        let qs = grid.q_axis();
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| f(ps[i], qs[j]));
        Self { grid, values }
    }

    pub fn from_real_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |p, q| Complex64::new(f(p, q), 0.0))
    }

    /// Midpoint-rule integral over the grid.
    pub fn integrate(&self) -> Complex64 {
        self.values.sum() * self.grid.cell_area()
    }

    /// `∫ a conj(b)`.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.grid.require_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_area())
    }

    /// Discrete L2 norm `sqrt(∫ |f|²)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_exactly_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn conj(&self) -> ComplexField {
        Self {
            grid: self.grid,
            values: self.values.mapv(|v| v.conj()),
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexField {
        Self {
            grid: self.grid,
            values: &self.values * s,
        }
    }

    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.require_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values + &other.values,
        })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.require_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values - &other.values,
        })
    }

    /// L2 norm of the difference.
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_distance(&self, other: &ComplexField) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Fails with the location of the first NaN or infinity.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        for ((i, j), v) in self.values.indexed_iter() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    p: self.grid.p(i),
                    q: self.grid.q(j),
                    context: context.into(),
                });
            }
        }
        Ok(())
    }

    /// CSV with header `p,q,re,im`, 17 significant digits, rows in p-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "p,q,re,im")?;
        for i in 0..self.grid.np {
            let p = self.grid.p(i);
            for j in 0..self.grid.nq {
                let v = self.values[[i, j]];
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt17(p),
                    fmt17(self.grid.q(j)),
                    fmt17(v.re),
                    fmt17(v.im)
                )?;
            }
        }
        Ok(())
    }

    /// JSON document with grid metadata and row-major `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let values: Vec<Vec<[f64; 2]>> = self
            .values
            .outer_iter()
            .map(|row| row.iter().map(|v| [v.re, v.im]).collect())
            .collect();
        serde_json::json!({
            "grid": self.grid,
            "layout": "values[ip][iq] = [re, im]",
            "values": values,
        })
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}
