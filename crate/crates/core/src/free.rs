//! Wigner functions of free-particle momentum wave functions.
//!
//! `W(p, q) = (1/2π) ∫ K(p + P/2, p − P/2) conj(ψ(p + P/2)) ψ(p − P/2) e^{−iPq} dP`
//! with kernel `K ≡ 1` (local) or `K = ε` (relativistic charge weighting).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::ChirpZ;
use crate::grid::{ComplexField, PhaseGrid, UnitsTag};
use crate::spectra::epsilon_continuous;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Unit,
    Epsilon,
}

/// Relative edge weight `|ψ|²` allowed at the ends of the momentum window.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

/// Gaussian momentum wave function centred at `p0` with width `dp`:
/// `ψ(p) ∝ exp(−(p − p0)² / (2 dp²))`, normalized on the grid's p-axis.
pub fn gaussian_packet(grid: &PhaseGrid, p0: f64, dp: f64) -> Result<Vec<Complex64>> {
    if !(dp > 0.0 && dp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "packet width must be positive, got {dp}"
        )));
    }
    let raw: Vec<f64> = grid
        .p_axis()
        .iter()
        .map(|&p| (-(p - p0) * (p - p0) / (2.0 * dp * dp)).exp())
        .collect();
    let norm = (raw.iter().map(|v| v * v).sum::<f64>() * grid.dp()).sqrt();
    Ok(raw.iter().map(|v| Complex64::new(v / norm, 0.0)).collect())
}

/// Wigner function of `psi` sampled on the grid's p-axis.
///
/// Truncation at the window edges perturbs `W` by roughly
/// `|ψ(edge)| · max|ψ|`, so the window should contain the packet well.
///
/// The P-integral runs over shifts that keep both arguments on the grid
/// (spacing `2 dp`, ψ taken as zero outside), and is evaluated at the grid's
/// q-points by a zoom FFT, one p-row at a time.
pub fn free_wigner_pair(psi: &[Complex64], grid: &PhaseGrid, kernel: Kernel) -> Result<ComplexField> {
    grid.require_units(UnitsTag::FreeParticle)?;
    let np = grid.np;
    if psi.len() != np {
        return Err(Error::InvalidParameter(format!(
            "wave function has {} samples, grid has {np} momenta",
            psi.len()
        )));
    }
    let peak = psi.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::InvalidParameter(
            "wave function must be finite and non-zero".into(),
        ));
    }
    let edge = psi[0].norm_sqr().max(psi[np - 1].norm_sqr()) / peak;
    if edge > SUPPORT_TOLERANCE {
        return Err(Error::SupportTooWide { edge_weight: edge });
    }

    let dp = grid.dp();
    // Shifts come in steps of 2 dp, so W is periodic in q with period π/dp.
    let period = PI / dp;
    if grid.q_max - grid.q_min > period {
        return Err(Error::InvalidParameter(format!(
            "q-window {} exceeds the alias-free period {period} of the momentum sampling",
            grid.q_max - grid.q_min
        )));
    }
    let ps = grid.p_axis();
    let half = (np / 2) as i64;
    let mut planner = FftPlanner::new();
    let cz = ChirpZ::new(
        &mut planner,
        np,
        -(half as f64) * 2.0 * dp,
        2.0 * dp,
        grid.nq,
        grid.q(0),
        grid.dq(),
    );
    let weight = 2.0 * dp / (2.0 * PI);
    let mut values = Array2::zeros(grid.shape());
    let mut row = vec![Complex64::new(0.0, 0.0); np];
    for i in 0..np {
        for (slot, j) in row.iter_mut().zip(-half..half) {
            let a = i as i64 + j;
            let b = i as i64 - j;
            *slot = if a < 0 || b < 0 || a >= np as i64 || b >= np as i64 {
                Complex64::new(0.0, 0.0)
            } else {
                let (a, b) = (a as usize, b as usize);
                let k = match kernel {
                    Kernel::Unit => 1.0,
                    Kernel::Epsilon => epsilon_continuous(ps[a], ps[b]),
                };
                psi[a].conj() * psi[b] * k
            };
        }
        let out = cz.apply(&row);
        for (j, v) in out.into_iter().enumerate() {
            values[[i, j]] = v * weight;
        }
    }
    let field = ComplexField::from_values(*grid, values)?;
    field.ensure_finite("free Wigner function")?;
    Ok(field)
}

/// Root-mean-square width of the q-marginal of `|W|`.
pub fn position_width(field: &ComplexField) -> f64 {
    let qs = field.grid.q_axis();
    let marginal: Vec<f64> = (0..field.grid.nq)
        .map(|j| field.values.column(j).iter().map(|v| v.norm()).sum())
        .collect();
    let total: f64 = marginal.iter().sum();
    let mean: f64 = marginal.iter().zip(&qs).map(|(m, q)| m * q).sum::<f64>() / total;
    let var: f64 = marginal
        .iter()
        .zip(&qs)
        .map(|(m, q)| m * (q - mean) * (q - mean))
        .sum::<f64>()
        / total;
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new((-6.0, 6.0), (-6.0, 6.0), 96, 80, UnitsTag::FreeParticle).unwrap()
    }

    #[test]
    fn unit_kernel_gaussian_matches_closed_form() {
        let g = grid();
        let (p0, w) = (0.4, 0.8);
        let psi = gaussian_packet(&g, p0, w).unwrap();
        let f = free_wigner_pair(&psi, &g, Kernel::Unit).unwrap();
        let exact = ComplexField::from_real_fn(g, |p, q| {
            (-(p - p0) * (p - p0) / (w * w) - q * q * w * w).exp() / PI
        });
        assert!(f.max_distance(&exact).unwrap() < 1e-10);
        assert!((f.integrate().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn epsilon_kernel_direct_quadrature() {
        let g = grid();
        let psi = gaussian_packet(&g, 0.0, 1.2).unwrap();
        let f = free_wigner_pair(&psi, &g, Kernel::Epsilon).unwrap();
        let ps = g.p_axis();
        let dp = g.dp();
        for &(i, j) in &[(48usize, 40usize), (30, 47), (60, 10)] {
            let q = g.q(j);
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..96i64 {
                let a = i as i64 + k;
                let b = i as i64 - k;
                for (a, b, sign) in [(a, b, 1.0), (i as i64 - k, i as i64 + k, -1.0)] {
                    if k == 0 && sign < 0.0 {
                        continue;
                    }
                    if a < 0 || b < 0 || a >= 96 || b >= 96 {
                        continue;
                    }
                    let big_p = sign * 2.0 * k as f64 * dp;
                    let (a, b) = (a as usize, b as usize);
                    s += psi[a].conj() * psi[b] * epsilon_continuous(ps[a], ps[b])
                        * Complex64::from_polar(1.0, -big_p * q);
                }
            }
            let direct = s * 2.0 * dp / (2.0 * PI);
            assert!((direct - f.values[[i, j]]).norm() < 1e-13);
        }
    }

    fn wide_q_grid() -> PhaseGrid {
        // ε-weighting gives the q-profile exponential tails on the Compton scale.
        PhaseGrid::new((-6.0, 6.0), (-30.0, 30.0), 256, 384, UnitsTag::FreeParticle).unwrap()
    }

    #[test]
    fn output_is_real_and_normalized() {
        let g = wide_q_grid();
        let psi = gaussian_packet(&g, -0.3, 0.8).unwrap();
        let f = free_wigner_pair(&psi, &g, Kernel::Epsilon).unwrap();
        assert!(f.max_abs_imag() < 1e-14);
        assert!((f.integrate().re - 1.0).abs() < 1e-8, "{}", f.integrate());
    }

    #[test]
    fn aliasing_guard() {
        let g = grid();
        let psi = gaussian_packet(&g, 0.0, 3.0).unwrap();
        assert!(matches!(
            free_wigner_pair(&psi, &g, Kernel::Unit),
            Err(Error::SupportTooWide { .. })
        ));
        let coarse = PhaseGrid::new((-6.0, 6.0), (-20.0, 20.0), 32, 64, UnitsTag::FreeParticle).unwrap();
        let psi = gaussian_packet(&coarse, 0.0, 0.8).unwrap();
        assert!(free_wigner_pair(&psi, &coarse, Kernel::Unit).is_err());
        let rot = PhaseGrid::square(6.0, 96, UnitsTag::Rotator).unwrap();
        let psi = gaussian_packet(&rot, 0.0, 1.0).unwrap();
        assert!(free_wigner_pair(&psi, &rot, Kernel::Unit).is_err());
        assert!(free_wigner_pair(&psi[..10], &g, Kernel::Unit).is_err());
    }

    #[test]
    fn momentum_marginal_is_kernel_independent() {
        let g = wide_q_grid();
        let psi = gaussian_packet(&g, 0.5, 0.8).unwrap();
        let a = free_wigner_pair(&psi, &g, Kernel::Unit).unwrap();
        let b = free_wigner_pair(&psi, &g, Kernel::Epsilon).unwrap();
        let dq = g.dq();
        for i in 0..g.np {
            let ma: f64 = a.values.row(i).iter().map(|v| v.re).sum::<f64>() * dq;
            let mb: f64 = b.values.row(i).iter().map(|v| v.re).sum::<f64>() * dq;
            assert!((ma - mb).abs() < 1e-9);
            assert!((ma - psi[i].norm_sqr()).abs() < 1e-9);
        }
    }
}
