//! Charge-state coefficients, density-type matrices and decoherence.
//!
//! A state is a pair of coefficient vectors `C_{n;±}` over oscillator
//! levels, one per charge branch. Its bilinears are
//!
//! * even: `ρ^±_{mn} = conj(C_{m;±}) C_{n;±}`,
//! * odd: `σ^±_{mn} = conj(C_{m;±}) C_{n;∓}`, so `σ^- = (σ^+)†`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::ChargeFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeStateVector {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl ChargeStateVector {
    pub fn new(plus: Vec<Complex64>, minus: Vec<Complex64>) -> Result<Self> {
        if plus.is_empty() || plus.len() != minus.len() {
            return Err(Error::InvalidParameter(format!(
                "branch vectors must be non-empty and equally long ({} vs {})",
                plus.len(),
                minus.len()
            )));
        }
        if plus.iter().chain(minus.iter()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { plus, minus })
    }

    /// Single-branch state from real amplitudes, normalized.
    pub fn from_levels(size: usize, branch: Branch, amps: &[(usize, Complex64)]) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); size];
        for &(n, c) in amps {
            if n >= size {
                return Err(Error::LevelOutOfRange { index: n, size });
            }
            v[n] += c;
        }
        let zero = vec![Complex64::new(0.0, 0.0); size];
        let s = match branch {
            Branch::Plus => Self::new(v, zero)?,
            Branch::Minus => Self::new(zero, v)?,
        };
        s.normalized()
    }

    pub fn size(&self) -> usize {
        self.plus.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.plus.iter().chain(self.minus.iter()).map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidParameter("zero state".into()));
        }
        Ok(Self {
            plus: self.plus.iter().map(|c| c / n).collect(),
            minus: self.minus.iter().map(|c| c / n).collect(),
        })
    }

    pub fn branch(&self, b: Branch) -> &[Complex64] {
        match b {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }
}

/// Even and odd coefficient matrices of a (possibly mixed) state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrices {
    pub even_plus: Array2<Complex64>,
    pub even_minus: Array2<Complex64>,
    pub odd_plus: Array2<Complex64>,
    pub odd_minus: Array2<Complex64>,
}

fn outer(a: &[Complex64], b: &[Complex64]) -> Array2<Complex64> {
    Array2::from_shape_fn((a.len(), b.len()), |(m, n)| a[m].conj() * b[n])
}

fn dagger(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|v| v.conj())
}

fn hermiticity_defect(a: &Array2<Complex64>) -> f64 {
    (a - &dagger(a)).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Cholesky test of `a + tol·I`; true if positive semidefinite within `tol`.
fn is_psd(a: &Array2<Complex64>, tol: f64) -> bool {
    let n = a.nrows();
    let mut l: Array2<Complex64> = Array2::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]].re + tol;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

impl CoefficientMatrices {
    pub fn from_state(s: &ChargeStateVector) -> Self {
        let odd_plus = outer(&s.plus, &s.minus);
        Self {
            even_plus: outer(&s.plus, &s.plus),
            even_minus: outer(&s.minus, &s.minus),
            odd_minus: dagger(&odd_plus),
            odd_plus,
        }
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            even_plus: Array2::zeros((size, size)),
            even_minus: Array2::zeros((size, size)),
            odd_plus: Array2::zeros((size, size)),
            odd_minus: Array2::zeros((size, size)),
        }
    }

    pub fn size(&self) -> usize {
        self.even_plus.nrows()
    }

    /// Convex combination `Σ w_k M_k`.
    pub fn mixture(parts: &[(f64, CoefficientMatrices)]) -> Result<Self> {
        let size = parts
            .first()
            .map(|p| p.1.size())
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut out = Self::zeros(size);
        for (w, m) in parts {
            if m.size() != size || *w < 0.0 {
                return Err(Error::InvalidParameter(
                    "mixture weights must be non-negative over equal sizes".into(),
                ));
            }
            out.even_plus = out.even_plus + &m.even_plus * *w;
            out.even_minus = out.even_minus + &m.even_minus * *w;
            out.odd_plus = out.odd_plus + &m.odd_plus * *w;
            out.odd_minus = out.odd_minus + &m.odd_minus * *w;
        }
        Ok(out)
    }

    /// `tr ρ^+ + tr ρ^-`.
    pub fn total_trace(&self) -> f64 {
        self.even_plus.diag().iter().chain(self.even_minus.diag().iter()).map(|v| v.re).sum()
    }

    /// Checks Hermiticity, positivity, unit total trace and `σ^- = (σ^+)†`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.size();
        for m in [&self.even_minus, &self.odd_plus, &self.odd_minus] {
            if m.dim() != (n, n) {
                return Err(Error::Invariant("coefficient matrices differ in size".into()));
            }
        }
        for (name, m) in [("even_plus", &self.even_plus), ("even_minus", &self.even_minus)] {
            let h = hermiticity_defect(m);
            if h > tol {
                return Err(Error::Invariant(format!("{name} not Hermitian (defect {h:e})")));
            }
            if !is_psd(m, tol) {
                return Err(Error::Invariant(format!("{name} not positive semidefinite")));
            }
        }
        let t = self.total_trace();
        if (t - 1.0).abs() > tol {
            return Err(Error::Invariant(format!("total trace {t} differs from 1")));
        }
        let d = (&self.odd_minus - &dagger(&self.odd_plus))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if d > tol {
            return Err(Error::Invariant(format!(
                "odd_minus is not the adjoint of odd_plus (defect {d:e})"
            )));
        }
        Ok(())
    }

    /// Expansion coefficients of the Wigner components in the `W_nm` basis:
    /// `ε∘ρ^±`, `χ∘σ^+` and `−χ∘σ^-` (the minus sign makes the two odd
    /// components complex conjugates of each other).
    pub fn weighted(&self, factors: &ChargeFactor) -> Result<CoefficientMatrices> {
        let n = self.size();
        if factors.size() < n {
            return Err(Error::LevelOutOfRange {
                index: n,
                size: factors.size(),
            });
        }
        let eps = factors.even.slice(ndarray::s![..n, ..n]).mapv(|v| Complex64::new(v, 0.0));
        let chi = factors.odd.slice(ndarray::s![..n, ..n]).mapv(|v| Complex64::new(v, 0.0));
        Ok(CoefficientMatrices {
            even_plus: &self.even_plus * &eps,
            even_minus: &self.even_minus * &eps,
            odd_plus: &self.odd_plus * &chi,
            odd_minus: -(&self.odd_minus * &chi),
        })
    }
}

/// Environment-induced suppression of off-diagonal even coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceKernel {
    pub a: Array2<Complex64>,
}

impl DecoherenceKernel {
    /// Requires unit diagonal, Hermitian symmetry and `|a| <= 1`
    /// (`a ≡ 1` is the environment-free limit).
    pub fn new(a: Array2<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Invariant("kernel must be a non-empty square matrix".into()));
        }
        for (i, d) in a.diag().iter().enumerate() {
            if (d - 1.0).norm() > 1e-14 {
                return Err(Error::Invariant(format!("kernel diagonal at {i} is {d}, not 1")));
            }
        }
        if hermiticity_defect(&a) > 1e-14 {
            return Err(Error::Invariant("kernel is not Hermitian".into()));
        }
        if a.iter().any(|v| v.norm() > 1.0 + 1e-14) {
            return Err(Error::Invariant("kernel entries exceed 1 in modulus".into()));
        }
        Ok(Self { a })
    }

    /// `a(m, n) = exp(−γ (m − n)²)`.
    pub fn gaussian(gamma: f64, size: usize) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        let a = Array2::from_shape_fn((size, size), |(m, n)| {
            let d = m as f64 - n as f64;
            Complex64::new((-gamma * d * d).exp(), 0.0)
        });
        Self::new(a)
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }
}

/// Multiplies the even matrices element-wise by the kernel.
pub fn apply_decoherence(
    coeffs: &CoefficientMatrices,
    kernel: &DecoherenceKernel,
) -> Result<CoefficientMatrices> {
    if kernel.size() != coeffs.size() {
        return Err(Error::InvalidParameter(format!(
            "kernel size {} differs from state size {}",
            kernel.size(),
            coeffs.size()
        )));
    }
    let mut out = coeffs.clone();
    out.even_plus = &coeffs.even_plus * &kernel.a;
    out.even_minus = &coeffs.even_minus * &kernel.a;
    Ok(out)
}
