//! Summation of slowly convergent or divergent alternating series.

use serde::{Deserialize, Serialize};

use crate::special::binomial_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acceleration {
    /// Euler transform: repeated pairwise averaging of partial sums.
    Euler,
    /// Iterated Cesàro (arithmetic) means of the given order.
    Cesaro { order: usize },
}

impl Default for Acceleration {
    fn default() -> Self {
        Acceleration::Euler
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceleratedSum {
    pub value: f64,
    /// Largest change between the last accelerated iterates.
    pub last_delta: f64,
    pub terms: usize,
    pub converged: bool,
}

/// Reusable accelerator for partial-sum sequences of a fixed length.
#[derive(Debug, Clone)]
pub struct Accelerator {
    method: Acceleration,
    tolerance: f64,
    len: usize,
    euler: [Vec<f64>; 3],
}

impl Accelerator {
    pub fn new(method: Acceleration, tolerance: f64, len: usize) -> Self {
        let euler = match method {
            Acceleration::Euler if len >= 3 => [
                binomial_weights(len - 1),
                binomial_weights(len - 2),
                binomial_weights(len - 3),
            ],
            _ => [Vec::new(), Vec::new(), Vec::new()],
        };
        Self {
            method,
            tolerance,
            len,
            euler,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Accelerated value of the partial sums `s` (length must match).
    pub fn sum(&self, s: &[f64]) -> AcceleratedSum {
        assert_eq!(s.len(), self.len, "partial-sum length mismatch");
        let last3 = if self.len < 3 {
            let v = s.last().copied().unwrap_or(0.0);
            [v, f64::INFINITY, f64::INFINITY]
        } else {
            match self.method {
                Acceleration::Euler => {
                    let d = |w: &Vec<f64>| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                    [d(&self.euler[0]), d(&self.euler[1]), d(&self.euler[2])]
                }
                Acceleration::Cesaro { order } => cesaro_tail(s, order.max(1)),
            }
        };
        let delta = (last3[0] - last3[1]).abs().max((last3[1] - last3[2]).abs());
        AcceleratedSum {
            value: last3[0],
            last_delta: delta,
            terms: self.len,
            converged: delta <= self.tolerance * last3[0].abs().max(1.0),
        }
    }
}

/// Last three iterated Cesàro means (newest first).
fn cesaro_tail(s: &[f64], order: usize) -> [f64; 3] {
    let mut cur = s.to_vec();
    for _ in 0..order {
        let mut acc = 0.0;
        for (k, v) in cur.iter_mut().enumerate() {
            acc += *v;
            *v = acc / (k + 1) as f64;
        }
    }
    let n = cur.len();
    [cur[n - 1], cur[n - 2], cur[n - 3]]
}

/// Convenience wrapper: accelerate the series with the given terms.
pub fn accelerate(terms: &[f64], method: Acceleration, tolerance: f64) -> AcceleratedSum {
    let mut partial = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in terms {
        acc += t;
        partial.push(acc);
    }
    Accelerator::new(method, tolerance, terms.len()).sum(&partial)
}
