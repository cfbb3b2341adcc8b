//! Four-component Wigner function, marginals, moments and purity tests.
//!
//! All routines take coefficients already weighted by the charge factors
//! (see [`CoefficientMatrices::weighted`]); each component is then the plain
//! expansion `Σ w_mn W_nm`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::wigner_basis_value;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhaseGrid, UnitsTag};
use crate::ladder::{operator_power, Observable};
use crate::special::hermite_functions;
use crate::spectra::ChargeFactor;
use crate::state::{Branch, CoefficientMatrices};

/// Coefficients smaller than this are skipped during assembly.
const SKIP: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    EvenPlus,
    EvenMinus,
    OddPlus,
    OddMinus,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::EvenPlus,
        Component::EvenMinus,
        Component::OddPlus,
        Component::OddMinus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Component::EvenPlus => "even_plus",
            Component::EvenMinus => "even_minus",
            Component::OddPlus => "odd_plus",
            Component::OddMinus => "odd_minus",
        }
    }

    fn matrix<'a>(&self, w: &'a CoefficientMatrices) -> &'a Array2<Complex64> {
        match self {
            Component::EvenPlus => &w.even_plus,
            Component::EvenMinus => &w.even_minus,
            Component::OddPlus => &w.odd_plus,
            Component::OddMinus => &w.odd_minus,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WignerComponents {
    pub even_plus: ComplexField,
    pub even_minus: ComplexField,
    pub odd_plus: ComplexField,
    pub odd_minus: ComplexField,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WignerResiduals {
    /// Largest `|Im|` of the even components.
    pub reality: f64,
    /// Largest `|W_{+} − conj(W_{-})|`.
    pub conjugacy: f64,
    /// `|∫∫ (W_[+] + W_[-]) − 1|`.
    pub normalization: f64,
    /// Largest `|∫∫ W_{±}|`.
    pub odd_integral: f64,
    /// Smallest value of `W_[+] + W_[-]`.
    pub min_even: f64,
}

impl WignerComponents {
    pub fn grid(&self) -> &PhaseGrid {
        &self.even_plus.grid
    }

    pub fn get(&self, c: Component) -> &ComplexField {
        match c {
            Component::EvenPlus => &self.even_plus,
            Component::EvenMinus => &self.even_minus,
            Component::OddPlus => &self.odd_plus,
            Component::OddMinus => &self.odd_minus,
        }
    }

    pub fn get_mut(&mut self, c: Component) -> &mut ComplexField {
        match c {
            Component::EvenPlus => &mut self.even_plus,
            Component::EvenMinus => &mut self.even_minus,
            Component::OddPlus => &mut self.odd_plus,
            Component::OddMinus => &mut self.odd_minus,
        }
    }

    /// Sum of the four components.
    pub fn total(&self) -> Result<ComplexField> {
        self.even_plus.add(&self.even_minus)?.add(&self.odd_plus)?.add(&self.odd_minus)
    }

    pub fn residuals(&self) -> Result<WignerResiduals> {
        let even = self.even_plus.add(&self.even_minus)?;
        Ok(WignerResiduals {
            reality: self.even_plus.max_abs_imag().max(self.even_minus.max_abs_imag()),
            conjugacy: self.odd_plus.max_distance(&self.odd_minus.conj())?,
            normalization: (even.integrate().re - 1.0).abs(),
            odd_integral: self.odd_plus.integrate().norm().max(self.odd_minus.integrate().norm()),
            min_even: even.min_real(),
        })
    }
}

fn nonzero_pairs(w: &Array2<Complex64>) -> Vec<(usize, usize, Complex64)> {
    w.indexed_iter()
        .filter(|(_, v)| v.norm() > SKIP)
        .map(|((m, n), v)| (m, n, *v))
        .collect()
}

fn expand(w: &Array2<Complex64>, grid: &PhaseGrid) -> ComplexField {
    let pairs = nonzero_pairs(w);
    ComplexField::from_fn(*grid, |p, q| {
        pairs
            .iter()
            .map(|&(m, n, c)| c * wigner_basis_value(n, m, p, q))
            .sum()
    })
}

/// Expands weighted coefficients on a grid. Pass
/// [`ChargeFactor::nonlocal`] weights to obtain the ordinary Wigner function.
pub fn assemble_wigner(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    grid: &PhaseGrid,
    include_odd: bool,
) -> Result<WignerComponents> {
    grid.require_units(UnitsTag::Rotator)?;
    let trace = coeffs.total_trace();
    if (trace - 1.0).abs() > 1e-12 {
        log::warn!("state is not normalized: total trace {trace}");
    }
    let w = coeffs.weighted(factors)?;
    let odd = |m: &Array2<Complex64>| {
        if include_odd {
            expand(m, grid)
        } else {
            ComplexField::zeros(*grid)
        }
    };
    Ok(WignerComponents {
        even_plus: expand(&w.even_plus, grid),
        even_minus: expand(&w.even_minus, grid),
        odd_plus: odd(&w.odd_plus),
        odd_minus: odd(&w.odd_minus),
    })
}

/// One component at a single point.
pub fn wigner_value_at(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    component: Component,
    p: f64,
    q: f64,
) -> Result<Complex64> {
    let w = coeffs.weighted(factors)?;
    Ok(nonzero_pairs(component.matrix(&w))
        .iter()
        .map(|&(m, n, c)| c * wigner_basis_value(n, m, p, q))
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub axis: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Smallest sampled value over both branches.
    pub min_value: f64,
    pub has_negative: bool,
}

/// Marginal densities `ρ_±(x) = Σ ε ρ^±_mn conj(φ_m(x)) φ_n(x)`.
/// Negative values are kept and flagged.
pub fn distribution(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    observable: Observable,
    xs: &[f64],
) -> Result<Distribution> {
    let w = coeffs.weighted(factors)?;
    let n = coeffs.size();
    let eval = |mat: &Array2<Complex64>, x: f64| -> f64 {
        let h = hermite_functions(n, x);
        // φ_n(p) = (−i)^n h_n(p); φ_n(q) = h_n(q).
        let phi: Vec<Complex64> = h
            .iter()
            .enumerate()
            .map(|(k, v)| match observable {
                Observable::Position => Complex64::new(*v, 0.0),
                Observable::Momentum => Complex64::new(0.0, -1.0).powu(k as u32) * v,
            })
            .collect();
        nonzero_pairs(mat)
            .iter()
            .map(|&(m, k, c)| c * phi[m].conj() * phi[k])
            .sum::<Complex64>()
            .re
    };
    let plus: Vec<f64> = xs.iter().map(|&x| eval(&w.even_plus, x)).collect();
    let minus: Vec<f64> = xs.iter().map(|&x| eval(&w.even_minus, x)).collect();
    let min_value = plus.iter().chain(minus.iter()).cloned().fold(f64::INFINITY, f64::min);
    Ok(Distribution {
        axis: xs.to_vec(),
        plus,
        minus,
        min_value,
        has_negative: min_value < 0.0,
    })
}

/// `∫∫ x^k W` summed over all four components.
pub fn moment(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    observable: Observable,
    power: usize,
) -> Result<f64> {
    let n = coeffs.size();
    if power >= n {
        return Err(Error::InvalidParameter(format!(
            "moment order {power} is not below the basis size {n}"
        )));
    }
    let w = coeffs.weighted(factors)?;
    let op = operator_power(observable, power, n);
    // ∫∫ A W_nm = ⟨m|A|n⟩.
    let total: Complex64 = [&w.even_plus, &w.even_minus, &w.odd_plus, &w.odd_minus]
        .iter()
        .map(|mat| (*mat * &op).sum())
        .sum();
    Ok(total.re)
}

/// `Re ∫∫ x^k f` by grid quadrature.
pub fn field_moment(field: &ComplexField, observable: Observable, power: usize) -> f64 {
    let g = &field.grid;
    let mut total = 0.0;
    for ((i, j), v) in field.values.indexed_iter() {
        let x = match observable {
            Observable::Position => g.q(j),
            Observable::Momentum => g.p(i),
        };
        total += x.powi(power as i32) * v.re;
    }
    total * g.cell_area()
}

/// Branch moment `∫∫ x^k W_[±]`.
pub fn branch_moment(
    coeffs: &CoefficientMatrices,
    factors: &ChargeFactor,
    branch: Branch,
    observable: Observable,
    power: usize,
) -> Result<f64> {
    let n = coeffs.size();
    if power >= n {
        return Err(Error::InvalidParameter(format!(
            "moment order {power} is not below the basis size {n}"
        )));
    }
    let w = coeffs.weighted(factors)?;
    let op = operator_power(observable, power, n);
    let mat = match branch {
        Branch::Plus => &w.even_plus,
        Branch::Minus => &w.even_minus,
    };
    Ok((mat * &op).sum().re)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PurityReport {
    pub is_pure: bool,
    pub max_minor: f64,
    pub even_max_minor: f64,
    pub odd_max_minor: f64,
}

pub const PURITY_TOLERANCE: f64 = 1e-8;

/// Largest `|B_mn B_m'n' − B_mn' B_m'n|`, ignoring any minor that touches
/// an undefined entry.
fn max_minor(b: &Array2<Option<Complex64>>) -> f64 {
    let n = b.nrows();
    let rows: Vec<usize> = (0..n).filter(|&i| b.row(i).iter().any(|v| v.map_or(false, |z| z.norm() > 0.0))).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| b.column(j).iter().any(|v| v.map_or(false, |z| z.norm() > 0.0))).collect();
    let mut best = 0.0f64;
    for (ia, &m) in rows.iter().enumerate() {
        for &m2 in &rows[ia + 1..] {
            for (ja, &k) in cols.iter().enumerate() {
                for &k2 in &cols[ja + 1..] {
                    if let (Some(a), Some(d), Some(bb), Some(c)) =
                        (b[[m, k]], b[[m2, k2]], b[[m, k2]], b[[m2, k]])
                    {
                        best = best.max((a * d - bb * c).norm());
                    }
                }
            }
        }
    }
    best
}

/// Rank-one test on coefficients recovered from weighted matrices:
/// `B = w / ε` for the even parts, `B = w / χ` off the diagonal for the odd
/// parts (χ vanishes on the diagonal).
pub fn purity_criterium(
    weighted: &CoefficientMatrices,
    factors: &ChargeFactor,
    tolerance: f64,
) -> Result<PurityReport> {
    let n = weighted.size();
    if factors.size() < n {
        return Err(Error::LevelOutOfRange {
            index: n,
            size: factors.size(),
        });
    }
    let even = |w: &Array2<Complex64>| {
        Array2::from_shape_fn((n, n), |(m, k)| Some(w[[m, k]] / factors.epsilon(m, k)))
    };
    let odd = |w: &Array2<Complex64>, sign: f64| {
        Array2::from_shape_fn((n, n), |(m, k)| {
            let chi = factors.chi(m, k);
            if m == k || chi.abs() < 1e-300 {
                None
            } else {
                Some(w[[m, k]] / (sign * chi))
            }
        })
    };
    let even_max = max_minor(&even(&weighted.even_plus)).max(max_minor(&even(&weighted.even_minus)));
    let odd_max = max_minor(&odd(&weighted.odd_plus, 1.0)).max(max_minor(&odd(&weighted.odd_minus, -1.0)));
    let max_minor = even_max.max(odd_max);
    Ok(PurityReport {
        is_pure: max_minor < tolerance,
        max_minor,
        even_max_minor: even_max,
        odd_max_minor: odd_max,
    })
}

/// Largest `|ρ^+_mn ρ^-_m'n' − σ^+_mn' σ^-_m'n|`; zero when either branch is empty.
pub fn even_odd_constraint(coeffs: &CoefficientMatrices) -> f64 {
    let n = coeffs.size();
    let rp = nonzero_pairs(&coeffs.even_plus);
    let rm = nonzero_pairs(&coeffs.even_minus);
    if rp.is_empty() || rm.is_empty() {
        return 0.0;
    }
    let mut best = 0.0f64;
    for m in 0..n {
        for k in 0..n {
            for m2 in 0..n {
                for k2 in 0..n {
                    let v = coeffs.even_plus[[m, k]] * coeffs.even_minus[[m2, k2]]
                        - coeffs.odd_plus[[m, k2]] * coeffs.odd_minus[[m2, k]];
                    best = best.max(v.norm());
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::diagonal_wigner;
    use crate::spectra::{charge_factors, rotator_spectrum};
    use crate::state::{apply_decoherence, ChargeStateVector, DecoherenceKernel};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn factors(lambda: f64, n: usize) -> ChargeFactor {
        charge_factors(&rotator_spectrum(lambda, n).unwrap(), n).unwrap()
    }

    fn superposition() -> CoefficientMatrices {
        let s = ChargeStateVector::from_levels(4, Branch::Plus, &[(0, c(1.0)), (2, c(1.0))]).unwrap();
        CoefficientMatrices::from_state(&s)
    }

    fn grid() -> PhaseGrid {
        PhaseGrid::square(6.0, 96, UnitsTag::Rotator).unwrap()
    }

    // Independent oracle for ⟨q^k⟩ from the position marginal by quadrature.
    fn marginal_moment(d: &Distribution, dx: f64, k: i32) -> f64 {
        d.axis.iter().zip(d.plus.iter()).map(|(x, r)| x.powi(k) * r * dx).sum()
    }

    #[test]
    fn eigenstate_matches_basis_in_both_modes() {
        let g = grid();
        let s = ChargeStateVector::from_levels(4, Branch::Plus, &[(1, c(1.0))]).unwrap();
        let m = CoefficientMatrices::from_state(&s);
        let a = assemble_wigner(&m, &factors(10.0, 4), &g, true).unwrap();
        let b = assemble_wigner(&m, &ChargeFactor::nonlocal(4), &g, true).unwrap();
        let w11 = diagonal_wigner(1, &g).unwrap();
        assert!(a.even_plus.max_distance(&w11).unwrap() < 1e-14);
        assert!(a.even_plus.max_distance(&b.even_plus).unwrap() < 1e-15);
        assert_eq!(a.odd_plus.max_abs(), 0.0);
    }

    #[test]
    fn interference_amplified_by_epsilon() {
        let f = factors(10.0, 4);
        let m = superposition();
        let at = |fac: &ChargeFactor, p: f64, q: f64| {
            wigner_value_at(&m, fac, Component::EvenPlus, p, q).unwrap().re
        };
        let mixed = CoefficientMatrices::mixture(&[(1.0, superposition())]).unwrap();
        let mut diag = mixed.clone();
        diag.even_plus[[0, 2]] = c(0.0);
        diag.even_plus[[2, 0]] = c(0.0);
        let nl = ChargeFactor::nonlocal(4);
        for (p, q) in [(0.3, 0.1), (1.0, -0.7), (0.0, 1.5)] {
            let base = wigner_value_at(&diag, &nl, Component::EvenPlus, p, q).unwrap().re;
            let ratio = (at(&f, p, q) - base) / (at(&nl, p, q) - base);
            assert!((ratio - f.epsilon(0, 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_state_has_no_interference() {
        let g = grid();
        let a = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(3, Branch::Plus, &[(0, c(1.0))]).unwrap());
        let b = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(3, Branch::Plus, &[(2, c(1.0))]).unwrap());
        let mix = CoefficientMatrices::mixture(&[(0.5, a), (0.5, b)]).unwrap();
        let w = assemble_wigner(&mix, &factors(10.0, 3), &g, true).unwrap();
        let expected = diagonal_wigner(0, &g).unwrap().add(&diagonal_wigner(2, &g).unwrap()).unwrap().scale(c(0.5));
        assert!(w.even_plus.max_distance(&expected).unwrap() < 1e-15);
        let r = purity_criterium(&mix.weighted(&factors(10.0, 3)).unwrap(), &factors(10.0, 3), PURITY_TOLERANCE).unwrap();
        assert!(!r.is_pure);
        assert!((r.max_minor - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_branch_state_residuals() {
        let g = grid();
        let s = ChargeStateVector::new(
            vec![c(0.6), Complex64::new(0.0, 0.3), c(0.2)],
            vec![c(0.1), c(-0.5), Complex64::new(0.2, 0.4)],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let m = CoefficientMatrices::from_state(&s);
        let f = factors(1.0, 3);
        let w = assemble_wigner(&m, &f, &g, true).unwrap();
        let r = w.residuals().unwrap();
        assert!(r.reality < 1e-10);
        assert!(r.conjugacy < 1e-14);
        assert!(r.normalization < 1e-8, "{}", r.normalization);
        assert!(r.odd_integral < 1e-8);
        assert!(w.odd_plus.max_abs() > 1e-3);
        assert!(even_odd_constraint(&m) < 1e-15);
        let p = purity_criterium(&m.weighted(&f).unwrap(), &f, PURITY_TOLERANCE).unwrap();
        assert!(p.is_pure && p.max_minor < 1e-12, "{p:?}");
    }

    #[test]
    fn constraint_violation_is_linear() {
        let s = ChargeStateVector::new(vec![c(0.6), c(0.3)], vec![c(0.5), c(-0.4)]).unwrap().normalized().unwrap();
        let base = CoefficientMatrices::from_state(&s);
        let viol = |d: f64| {
            let mut m = base.clone();
            m.odd_plus[[0, 1]] += d;
            m.odd_minus[[1, 0]] += d;
            even_odd_constraint(&m)
        };
        let (a, b) = (viol(1e-3), viol(2e-3));
        assert!(a > 1e-5 && (b / a - 2.0).abs() < 0.01);
        let single = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(2, Branch::Minus, &[(0, c(1.0))]).unwrap());
        assert_eq!(even_odd_constraint(&single), 0.0);
    }

    #[test]
    fn decoherence_breaks_purity() {
        let f = factors(10.0, 4);
        let k = DecoherenceKernel::gaussian(0.05, 4).unwrap();
        let d = apply_decoherence(&superposition(), &k).unwrap();
        let r = purity_criterium(&d.weighted(&f).unwrap(), &f, PURITY_TOLERANCE).unwrap();
        let a = k.a[[0, 2]].re;
        assert!(!r.is_pure);
        assert!((r.max_minor - 0.25 * (1.0 - a * a)).abs() < 1e-15);
    }

    #[test]
    fn position_moments() {
        let f = factors(10.0, 4);
        let m = superposition();
        let q2 = moment(&m, &f, Observable::Position, 2).unwrap();
        assert!((q2 - 2.264541).abs() < 1e-6, "{q2}");
        let q2nl = moment(&m, &ChargeFactor::nonlocal(4), Observable::Position, 2).unwrap();
        assert!((q2nl - 2.207107).abs() < 1e-6);
        let ground = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(4, Branch::Plus, &[(0, c(1.0))]).unwrap());
        assert!((moment(&ground, &f, Observable::Position, 2).unwrap() - 0.5).abs() < 1e-15);
        for n in 0..3 {
            let e = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(4, Branch::Plus, &[(n, c(1.0))]).unwrap());
            assert!(moment(&e, &f, Observable::Position, 1).unwrap().abs() < 1e-15);
            assert!(moment(&e, &f, Observable::Momentum, 1).unwrap().abs() < 1e-15);
        }
        assert!(moment(&m, &f, Observable::Position, 4).is_err());
        // Quadrature of the marginal agrees with the matrix form.
        let dx = 0.01;
        let xs: Vec<f64> = (0..2000).map(|i| -10.0 + (i as f64 + 0.5) * dx).collect();
        let d = distribution(&m, &f, Observable::Position, &xs).unwrap();
        assert!((marginal_moment(&d, dx, 2) - q2).abs() < 1e-10);
        assert!((marginal_moment(&d, dx, 0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn momentum_marginal_normalized() {
        let f = factors(10.0, 4);
        let m = superposition();
        let dx = 0.01;
        let xs: Vec<f64> = (0..2000).map(|i| -10.0 + (i as f64 + 0.5) * dx).collect();
        let d = distribution(&m, &f, Observable::Momentum, &xs).unwrap();
        let total: f64 = d.plus.iter().sum::<f64>() * dx;
        assert!((total - 1.0).abs() < 1e-8);
        let p2: f64 = xs.iter().zip(d.plus.iter()).map(|(x, r)| x * x * r * dx).sum();
        assert!((p2 - moment(&m, &f, Observable::Momentum, 2).unwrap()).abs() < 1e-10);
        let ground = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(4, Branch::Plus, &[(0, c(1.0))]).unwrap());
        assert!(!distribution(&ground, &f, Observable::Position, &xs).unwrap().has_negative);
    }

    proptest! {
        #[test]
        fn stationary_mixtures_are_mode_independent(w in proptest::collection::vec(0.0f64..1.0, 4), p in -3.0f64..3.0, q in -3.0f64..3.0) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-3);
            let parts: Vec<(f64, CoefficientMatrices)> = w.iter().enumerate().map(|(n, x)| {
                (x / total, CoefficientMatrices::from_state(&ChargeStateVector::from_levels(4, Branch::Plus, &[(n, c(1.0))]).unwrap()))
            }).collect();
            let m = CoefficientMatrices::mixture(&parts).unwrap();
            let a = wigner_value_at(&m, &factors(3.0, 4), Component::EvenPlus, p, q).unwrap();
            let b = wigner_value_at(&m, &ChargeFactor::nonlocal(4), Component::EvenPlus, p, q).unwrap();
            prop_assert!((a - b).norm() < 1e-12);
        }

        #[test]
        fn epsilon_keeps_phase(re in -1.0f64..1.0, im in -1.0f64..1.0) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let s = ChargeStateVector::new(vec![c(1.0), Complex64::new(re, im), c(0.0)], vec![c(0.0); 3]).unwrap().normalized().unwrap();
            let m = CoefficientMatrices::from_state(&s);
            let w = m.weighted(&factors(2.0, 3)).unwrap();
            prop_assert!((w.even_plus[[0, 1]].arg() - m.even_plus[[0, 1]].arg()).abs() < 1e-12);
            prop_assert!(w.even_plus[[0, 1]].norm() > m.even_plus[[0, 1]].norm());
        }
    }
}
