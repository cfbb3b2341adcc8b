//! Energy spectra and the charge (ε, χ) factors built from them.
//!
//! Energies are measured in units of the rest energy `mc²`, momenta in
//! `mc` and lengths in the reduced Compton wavelength `ħ/mc`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Physical scales of a problem: rest energy and the oscillator coupling λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    /// Rest energy `mc²` in eV.
    pub rest_energy_ev: f64,
    /// Dimensionless coupling `λ = sqrt(ħω_c / mc²)`.
    pub lambda: f64,
}

impl PhysicalScales {
    pub fn new(rest_energy_ev: f64, lambda: f64) -> Result<Self> {
        if !(rest_energy_ev > 0.0 && rest_energy_ev.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rest energy must be positive, got {rest_energy_ev}"
            )));
        }
        check_lambda(lambda)?;
        Ok(Self {
            rest_energy_ev,
            lambda,
        })
    }

    /// Compton time `ħ/mc²` in seconds.
    pub fn compton_time(&self) -> f64 {
        HBAR_EV_S / self.rest_energy_ev
    }

    /// Oscillator quantum `ħω_c = λ² mc²` in eV.
    pub fn oscillator_quantum_ev(&self) -> f64 {
        self.lambda * self.lambda * self.rest_energy_ev
    }
}

/// Compton time `ħ/mc²` in seconds for a rest energy given in eV.
pub fn compton_time(rest_energy_ev: f64) -> Result<f64> {
    Ok(PhysicalScales::new(rest_energy_ev, 0.0)?.compton_time())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    FreeParticle,
    Rotator,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::FreeParticle => "FreeParticle",
            SpectrumKind::Rotator => "Rotator",
        }
    }
}

/// A discrete (rotator) or continuous (free particle) energy spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpectrum {
    pub kind: SpectrumKind,
    pub lambda: f64,
    /// `E(n)` for the rotator; empty for the free particle.
    pub levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn free_particle() -> Self {
        Self {
            kind: SpectrumKind::FreeParticle,
            lambda: 0.0,
            levels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Level `E(n)`.
    pub fn level(&self, n: usize) -> Result<f64> {
        self.levels
            .get(n)
            .copied()
            .ok_or(Error::LevelOutOfRange {
                index: n,
                size: self.levels.len(),
            })
    }
}

/// Rotator level `E(n) = sqrt(1 + 2λ²(n + 1/2))`.
pub fn rotator_level(lambda: f64, n: usize) -> f64 {
    (1.0 + 2.0 * lambda * lambda * (n as f64 + 0.5)).sqrt()
}

/// First `n_levels` rotator energies.
pub fn rotator_spectrum(lambda: f64, n_levels: usize) -> Result<EnergySpectrum> {
    check_lambda(lambda)?;
    if n_levels == 0 {
        return Err(Error::InvalidParameter(
            "spectrum needs at least one level".into(),
        ));
    }
    Ok(EnergySpectrum {
        kind: SpectrumKind::Rotator,
        lambda,
        levels: (0..n_levels).map(|n| rotator_level(lambda, n)).collect(),
    })
}

/// Free dispersion `E(p) = sqrt(1 + p²)`.
pub fn free_dispersion(p: f64) -> f64 {
    p.hypot(1.0)
}

fn eps_chi(e1: f64, e2: f64) -> (f64, f64) {
    let d = 2.0 * (e1 * e2).sqrt();
    ((e1 + e2) / d, (e1 - e2) / d)
}

/// `ε(p1, p2)` for the free particle.
pub fn epsilon_continuous(p1: f64, p2: f64) -> f64 {
    eps_chi(free_dispersion(p1), free_dispersion(p2)).0
}

/// `χ(p1, p2)` for the free particle.
pub fn chi_continuous(p1: f64, p2: f64) -> f64 {
    eps_chi(free_dispersion(p1), free_dispersion(p2)).1
}

/// Even (ε) and odd (χ) charge factors over the first N levels.
///
/// `even[[m, n]] = ε(m, n)` and `odd[[m, n]] = χ(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeFactor {
    pub even: Array2<f64>,
    pub odd: Array2<f64>,
}

impl ChargeFactor {
    /// ε ≡ 1, χ ≡ 0: the non-relativistic (local) weighting.
    pub fn nonlocal(n: usize) -> Self {
        Self {
            even: Array2::ones((n, n)),
            odd: Array2::zeros((n, n)),
        }
    }

    pub fn size(&self) -> usize {
        self.even.nrows()
    }

    pub fn epsilon(&self, m: usize, n: usize) -> f64 {
        self.even[[m, n]]
    }

    pub fn chi(&self, m: usize, n: usize) -> f64 {
        self.odd[[m, n]]
    }

    /// Largest deviation from `ε² − χ² = 1`.
    pub fn hyperbolic_residual(&self) -> f64 {
        self.even
            .iter()
            .zip(self.odd.iter())
            .map(|(e, c)| (e * e - c * c - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Charge factors of a discrete spectrum for `n × n` levels.
pub fn charge_factors(spec: &EnergySpectrum, n: usize) -> Result<ChargeFactor> {
    if spec.kind != SpectrumKind::Rotator {
        return Err(Error::InvalidParameter(
            "charge factor matrices need a discrete spectrum".into(),
        ));
    }
    if n == 0 || n > spec.levels.len() {
        return Err(Error::LevelOutOfRange {
            index: n,
            size: spec.levels.len(),
        });
    }
    let mut even = Array2::zeros((n, n));
    let mut odd = Array2::zeros((n, n));
    for m in 0..n {
        for k in 0..n {
            let (e, c) = eps_chi(spec.levels[m], spec.levels[k]);
            even[[m, k]] = e;
            odd[[m, k]] = c;
        }
    }
    Ok(ChargeFactor { even, odd })
}

/// Interference frequency `ω_mn = E(m) − E(n)` in units of `mc²/ħ`.
pub fn interference_frequency(spec: &EnergySpectrum, m: usize, n: usize) -> Result<f64> {
    Ok(spec.level(m)? - spec.level(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rotator_levels_at_lambda_ten() {
        let s = rotator_spectrum(10.0, 3).unwrap();
        assert!((s.levels[0] - 101f64.sqrt()).abs() < 1e-14);
        assert!((s.levels[2] - 501f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_is_flat() {
        let s = rotator_spectrum(0.0, 4).unwrap();
        assert!(s.levels.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rotator_spectrum(-1.0, 3).is_err());
        assert!(rotator_spectrum(1.0, 0).is_err());
        assert!(compton_time(0.0).is_err());
        let s = rotator_spectrum(1.0, 3).unwrap();
        assert!(charge_factors(&s, 4).is_err());
        assert!(charge_factors(&EnergySpectrum::free_particle(), 2).is_err());
    }

    #[test]
    fn epsilon_zero_two_at_lambda_ten() {
        let f = charge_factors(&rotator_spectrum(10.0, 3).unwrap(), 3).unwrap();
        // Independent closed form: (sqrt(101) + sqrt(501)) / (2 (101*501)^(1/4)).
        let expect = (101f64.sqrt() + 501f64.sqrt()) / (2.0 * (101.0f64 * 501.0).powf(0.25));
        assert!((f.epsilon(0, 2) - expect).abs() < 1e-15);
        assert!((f.epsilon(0, 2) - 1.081225).abs() < 1e-6);
        assert_eq!(f.epsilon(1, 1), 1.0);
        assert_eq!(f.chi(1, 1), 0.0);
    }

    #[test]
    fn free_epsilon_examples() {
        assert_eq!(epsilon_continuous(0.0, 0.0), 1.0);
        let e = 2f64.sqrt();
        let expect = (e + 1.0) / (2.0 * e.sqrt());
        assert!((epsilon_continuous(1.0, 0.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn compton_times() {
        let pion = compton_time(139.570_39e6).unwrap();
        let electron = compton_time(0.510_998_95e6).unwrap();
        assert!((pion / 1e-24 - 4.716).abs() < 1e-3);
        assert!((electron / 1e-21 - 1.288).abs() < 1e-3);
    }

    #[test]
    fn interference_frequency_is_level_gap() {
        let s = rotator_spectrum(0.3, 4).unwrap();
        let w = interference_frequency(&s, 2, 0).unwrap();
        assert!((w - (1.45f64.sqrt() - 1.09f64.sqrt())).abs() < 1e-14);
        assert!(interference_frequency(&s, 9, 0).is_err());
    }

    proptest! {
        #[test]
        fn hyperbolic_identity(lambda in 0.0f64..20.0, n in 1usize..24) {
            let f = charge_factors(&rotator_spectrum(lambda, n).unwrap(), n).unwrap();
            prop_assert!(f.hyperbolic_residual() < 1e-12);
            for m in 0..n {
                for k in 0..n {
                    prop_assert!(f.epsilon(m, k) >= 1.0);
                    prop_assert_eq!(f.epsilon(m, k), f.epsilon(k, m));
                    prop_assert_eq!(f.chi(m, k), -f.chi(k, m));
                }
            }
        }

        #[test]
        fn odd_even_ratio(lambda in 0.01f64..20.0, m in 0usize..10, k in 0usize..10) {
            let s = rotator_spectrum(lambda, 10).unwrap();
            let f = charge_factors(&s, 10).unwrap();
            let (em, ek) = (s.levels[m], s.levels[k]);
            let ratio = (em - ek) / (em + ek);
            prop_assert!((f.chi(m, k) - ratio * f.epsilon(m, k)).abs() < 1e-13);
        }

        #[test]
        fn continuous_epsilon_symmetric(p1 in -50.0f64..50.0, p2 in -50.0f64..50.0) {
            let e = epsilon_continuous(p1, p2);
            let c = chi_continuous(p1, p2);
            prop_assert!(e >= 1.0);
            prop_assert_eq!(e, epsilon_continuous(p2, p1));
            prop_assert!((e * e - c * c - 1.0).abs() < 1e-12 * e * e);
        }
    }
}
