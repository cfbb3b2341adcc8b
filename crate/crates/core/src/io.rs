//! File formats: state JSON, spectrum JSON and trajectory CSV.
//!
//! State file:
//!
//! ```json
//! {"lambda": 10.0, "N": 3, "C_plus": [[0.7071, 0.0], [0.0, 0.0], [0.7071, 0.0]],
//!  "C_minus": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], "kernel_gamma": 0.0}
//! ```
//!
//! Mixed states may add `rho_plus`, `rho_minus` and `sigma_plus` as `N × N`
//! arrays of `[re, im]` pairs; they then replace the pure-state bilinears.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::fmt17;
use crate::spectra::EnergySpectrum;
use crate::state::{apply_decoherence, ChargeStateVector, CoefficientMatrices, DecoherenceKernel};

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "C_plus")]
    pub c_plus: Vec<Pair>,
    #[serde(rename = "C_minus")]
    pub c_minus: Vec<Pair>,
    #[serde(default)]
    pub kernel_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_plus: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_minus: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_plus: Option<Vec<Vec<Pair>>>,
}

fn to_complex(v: &[Pair]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

fn to_pairs(v: &[Complex64]) -> Vec<Pair> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn matrix(name: &str, rows: &[Vec<Pair>], n: usize) -> Result<Array2<Complex64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{name} must be a {n} x {n} matrix")));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl StateFile {
    pub fn from_state(lambda: f64, state: &ChargeStateVector, kernel_gamma: f64) -> Self {
        Self {
            lambda,
            n: state.size(),
            c_plus: to_pairs(&state.plus),
            c_minus: to_pairs(&state.minus),
            kernel_gamma,
            rho_plus: None,
            rho_minus: None,
            sigma_plus: None,
        }
    }

    /// Attaches explicit coefficient matrices (mixed states).
    pub fn with_matrices(mut self, m: &CoefficientMatrices) -> Self {
        let rows = |a: &Array2<Complex64>| {
            a.outer_iter().map(|r| to_pairs(r.as_slice().unwrap_or(&r.to_vec()))).collect()
        };
        self.rho_plus = Some(rows(&m.even_plus));
        self.rho_minus = Some(rows(&m.even_minus));
        self.sigma_plus = Some(rows(&m.odd_plus));
        self
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let s: StateFile = serde_json::from_str(text)?;
        s.check_schema()?;
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    fn check_schema(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parse("N must be positive".into()));
        }
        if self.c_plus.len() != self.n || self.c_minus.len() != self.n {
            return Err(Error::Parse(format!(
                "C_plus and C_minus must have N = {} entries (found {} and {})",
                self.n,
                self.c_plus.len(),
                self.c_minus.len()
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parse(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.kernel_gamma >= 0.0 && self.kernel_gamma.is_finite()) {
            return Err(Error::Parse(format!(
                "kernel_gamma must be finite and >= 0, got {}",
                self.kernel_gamma
            )));
        }
        Ok(())
    }

    pub fn state(&self) -> Result<ChargeStateVector> {
        ChargeStateVector::new(to_complex(&self.c_plus), to_complex(&self.c_minus))
    }

    /// Coefficient matrices after the decoherence kernel.
    pub fn coefficients(&self) -> Result<CoefficientMatrices> {
        let base = if self.rho_plus.is_some() || self.rho_minus.is_some() || self.sigma_plus.is_some() {
            let zero = Array2::zeros((self.n, self.n));
            let get = |name: &str, m: &Option<Vec<Vec<Pair>>>| match m {
                Some(rows) => matrix(name, rows, self.n),
                None => Ok(zero.clone()),
            };
            let odd_plus = get("sigma_plus", &self.sigma_plus)?;
            CoefficientMatrices {
                even_plus: get("rho_plus", &self.rho_plus)?,
                even_minus: get("rho_minus", &self.rho_minus)?,
                odd_minus: odd_plus.t().mapv(|v| v.conj()),
                odd_plus,
            }
        } else {
            CoefficientMatrices::from_state(&self.state()?)
        };
        apply_decoherence(&base, &DecoherenceKernel::gaussian(self.kernel_gamma, self.n)?)
    }
}

pub fn write_spectrum_json(spec: &EnergySpectrum, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(spec)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_spectrum_json(path: &Path) -> Result<EnergySpectrum> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// One trajectory sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mean: f64,
    pub branch: String,
}

/// CSV with header `t,mean,branch`.
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], mut w: W) -> Result<()> {
    writeln!(w, "t,mean,branch")?;
    for r in rows {
        writeln!(w, "{},{},{}", fmt17(r.t), fmt17(r.mean), r.branch)?;
    }
    Ok(())
}
