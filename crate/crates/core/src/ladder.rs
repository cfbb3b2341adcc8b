//! Oscillator matrix elements `⟨m| x̂^k |n⟩` built from ladder operators.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Position,
    Momentum,
}

/// `q̂ = (a + a†)/√2`, `p̂ = i(a† − a)/√2` on the first `n` levels.
fn single(obs: Observable, n: usize) -> Array2<Complex64> {
    let mut m = Array2::zeros((n, n));
    for k in 0..n.saturating_sub(1) {
        let v = ((k + 1) as f64 / 2.0).sqrt();
        match obs {
            Observable::Position => {
                m[[k, k + 1]] = Complex64::new(v, 0.0);
                m[[k + 1, k]] = Complex64::new(v, 0.0);
            }
            Observable::Momentum => {
                m[[k, k + 1]] = Complex64::new(0.0, -v);
                m[[k + 1, k]] = Complex64::new(0.0, v);
            }
        }
    }
    m
}

/// `⟨m| x̂^power |n⟩` for `m, n < size`, exact (computed in a basis
/// enlarged by `power` levels before truncation).
pub fn operator_power(obs: Observable, power: usize, size: usize) -> Array2<Complex64> {
    let big = size + power;
    let x = single(obs, big);
    let mut acc = Array2::from_diag_elem(big, Complex64::new(1.0, 0.0));
    for _ in 0..power {
        acc = acc.dot(&x);
    }
    acc.slice(ndarray::s![..size, ..size]).to_owned()
}
