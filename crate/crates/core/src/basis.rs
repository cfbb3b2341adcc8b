//! Oscillator Wigner basis `W_nm(p, q)` (ħ = 1).
//!
//! `W_nm` is the phase-space symbol of `|n⟩⟨m| / 2π`, so
//! `2π ∫ W_nm conj(W_kl) = δ_nk δ_ml` and `∫ W_nm = δ_nm`.

use std::f64::consts::{PI, SQRT_2};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{ComplexField, PhaseGrid, UnitsTag};
use crate::special::{laguerre, ln_factorial};

/// Value of `W_nm` at one phase-space point.
pub fn wigner_basis_value(n: usize, m: usize, p: f64, q: f64) -> Complex64 {
    let r2 = p * p + q * q;
    let (lo, hi, z) = if n >= m {
        (m, n, Complex64::new(q, -p))
    } else {
        (n, m, Complex64::new(q, p))
    };
    let d = hi - lo;
    let lag = laguerre(lo, d as f64, 2.0 * r2);
    let sign = if lo % 2 == 0 { 1.0 } else { -1.0 };
    if d == 0 {
        return Complex64::new(sign * (-r2).exp() * lag / PI, 0.0);
    }
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // |√2 z|^d sqrt(lo!/hi!) e^{-r²} assembled in log space to avoid overflow.
    let ln_mag = d as f64 * (SQRT_2 * r2.sqrt()).ln() + 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - r2;
    let phase = d as f64 * z.arg();
    Complex64::from_polar(ln_mag.exp(), phase) * (sign * lag / PI)
}

fn require_rotator(grid: &PhaseGrid) -> Result<()> {
    grid.require_units(UnitsTag::Rotator)
}

/// `W_nm` sampled on a grid.
pub fn wigner_basis_element(n: usize, m: usize, grid: &PhaseGrid) -> Result<ComplexField> {
    require_rotator(grid)?;
    Ok(ComplexField::from_fn(*grid, |p, q| {
        wigner_basis_value(n, m, p, q)
    }))
}

/// Real diagonal element `W_nn = (1/π) e^{-r²} (-1)^n L_n(2r²)`.
pub fn diagonal_wigner(n: usize, grid: &PhaseGrid) -> Result<ComplexField> {
    require_rotator(grid)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(ComplexField::from_real_fn(*grid, |p, q| {
        let r2 = p * p + q * q;
        sign * (-r2).exp() * laguerre(n, 0.0, 2.0 * r2) / PI
    }))
}

/// Cache of basis elements on one grid, computed lazily.
pub struct BasisCache {
    grid: PhaseGrid,
    fields: Vec<Option<Array2<Complex64>>>,
    size: usize,
}

impl BasisCache {
    pub fn new(grid: &PhaseGrid, size: usize) -> Result<Self> {
        require_rotator(grid)?;
        Ok(Self {
            grid: *grid,
            fields: vec![None; size * size],
            size,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// `W_nm` values; only the `n >= m` half is stored, the rest by conjugation.
    pub fn get(&mut self, n: usize, m: usize) -> Array2<Complex64> {
        let (a, b) = if n >= m { (n, m) } else { (m, n) };
        let idx = a * self.size + b;
        if self.fields[idx].is_none() {
            let ps = self.grid.p_axis();
            let qs = self.grid.q_axis();
            self.fields[idx] = Some(Array2::from_shape_fn(self.grid.shape(), |(i, j)| {
                wigner_basis_value(a, b, ps[i], qs[j])
            }));
        }
        let f = self.fields[idx].as_ref().expect("just filled");
        if n >= m {
            f.clone()
        } else {
            f.mapv(|v| v.conj())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::hermite_functions;
    use proptest::prelude::*;

    /// Direct quadrature of `(1/2π) ∫ conj(φ_m(p+P/2)) φ_n(p-P/2) e^{-iPq} dP`
    /// with momentum eigenfunctions `φ_n(p) = (-i)^n h_n(p)`.
    fn wigner_by_quadrature(n: usize, m: usize, p: f64, q: f64) -> Complex64 {
        let phase = |k: usize| Complex64::new(0.0, -1.0).powu(k as u32);
        let h = 0.005;
        let mut s = Complex64::new(0.0, 0.0);
        let mut big_p = -24.0;
        while big_p <= 24.0 {
            let a = hermite_functions(n.max(m) + 1, p + big_p / 2.0);
            let b = hermite_functions(n.max(m) + 1, p - big_p / 2.0);
            let phi_m = phase(m) * a[m];
            let phi_n = phase(n) * b[n];
            s += phi_m.conj() * phi_n * Complex64::from_polar(1.0, -big_p * q) * h;
            big_p += h;
        }
        s / (2.0 * PI)
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (n, m) in [(0, 0), (1, 0), (0, 1), (2, 0), (3, 1), (2, 5), (4, 4)] {
            for &(p, q) in &[(0.3, -0.2), (-1.1, 0.7), (0.0, 1.4)] {
                let a = wigner_basis_value(n, m, p, q);
                let b = wigner_by_quadrature(n, m, p, q);
                assert!((a - b).norm() < 1e-9, "n={n} m={m} at ({p},{q}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn origin_values() {
        assert!((wigner_basis_value(0, 0, 0.0, 0.0).re - 1.0 / PI).abs() < 1e-15);
        assert!((wigner_basis_value(1, 1, 0.0, 0.0).re + 1.0 / PI).abs() < 1e-15);
        assert_eq!(wigner_basis_value(3, 1, 0.0, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn diagonal_agrees_with_general() {
        let g = PhaseGrid::square(4.0, 16, UnitsTag::Rotator).unwrap();
        for n in 0..5 {
            let a = diagonal_wigner(n, &g).unwrap();
            let b = wigner_basis_element(n, n, &g).unwrap();
            assert!(a.max_distance(&b).unwrap() < 1e-15);
            assert!(a.is_exactly_real());
        }
    }

    #[test]
    fn wrong_units_rejected() {
        let g = PhaseGrid::square(4.0, 16, UnitsTag::FreeParticle).unwrap();
        assert!(diagonal_wigner(0, &g).is_err());
    }

    #[test]
    fn large_indices_stay_finite() {
        for &(p, q) in &[(0.5, 0.5), (9.0, -7.0), (0.0, 15.0)] {
            let v = wigner_basis_value(120, 3, p, q);
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn cache_returns_conjugates() {
        let g = PhaseGrid::square(3.0, 8, UnitsTag::Rotator).unwrap();
        let mut c = BasisCache::new(&g, 4).unwrap();
        let a = c.get(1, 3);
        let b = wigner_basis_element(1, 3, &g).unwrap();
        assert!((&a - &b.values).iter().all(|v| v.norm() < 1e-16));
    }

    proptest! {
        #[test]
        fn hermitian_symmetry(n in 0usize..12, m in 0usize..12, p in -4.0f64..4.0, q in -4.0f64..4.0) {
            let a = wigner_basis_value(n, m, p, q);
            let b = wigner_basis_value(m, n, p, q);
            prop_assert!((a - b.conj()).norm() < 1e-14);
        }

        #[test]
        fn diagonal_is_point_symmetric(n in 0usize..12, p in -4.0f64..4.0, q in -4.0f64..4.0) {
            let a = wigner_basis_value(n, n, p, q);
            let b = wigner_basis_value(n, n, -p, -q);
            prop_assert!((a - b).norm() < 1e-15);
            let c = wigner_basis_value(n, n, q, p);
            prop_assert!((a - c).norm() < 1e-15);
        }
    }
}
