use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular-frequency lattice.
///
/// With `symmetric_closure` set, only `omega >= 0` is stored and values at
/// `-omega` are obtained by complex conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    values: Vec<f64>,
    symmetric_closure: bool,
}

/// Result of locating a frequency on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticePoint {
    pub index: usize,
    /// The stored sample belongs to `-omega`; conjugate it.
    pub conjugate: bool,
}

const MATCH_TOL: f64 = 1e-12;

impl FrequencyLattice {
    pub fn new(values: Vec<f64>, symmetric_closure: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::precondition("frequency lattice is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition(
                "frequency lattice contains non-finite values",
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::precondition(
                "frequency lattice must be strictly increasing",
            ));
        }
        if symmetric_closure && values[0] < 0.0 {
            return Err(Error::precondition(
                "a lattice with symmetric closure stores omega >= 0 only",
            ));
        }
        Ok(Self {
            values,
            symmetric_closure,
        })
    }

    /// `count` points `start + m * step`.
    pub fn uniform(start: f64, step: f64, count: usize, symmetric_closure: bool) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::precondition("lattice step must be positive"));
        }
        Self::new(
            (0..count).map(|m| start + step * m as f64).collect(),
            symmetric_closure,
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn symmetric_closure(&self) -> bool {
        self.symmetric_closure
    }

    fn find(&self, omega: f64) -> Option<usize> {
        let scale = omega.abs().max(1.0);
        let pos = self
            .values
            .partition_point(|&v| v < omega - MATCH_TOL * scale);
        (pos < self.values.len() && (self.values[pos] - omega).abs() <= MATCH_TOL * scale)
            .then_some(pos)
    }

    /// Locates `omega`, falling back to the conjugate extension when allowed.
    pub fn locate(&self, omega: f64) -> Option<LatticePoint> {
        if let Some(index) = self.find(omega) {
            return Some(LatticePoint {
                index,
                conjugate: false,
            });
        }
        if self.symmetric_closure && omega < 0.0 {
            return self.find(-omega).map(|index| LatticePoint {
                index,
                conjugate: true,
            });
        }
        None
    }

    /// Common spacing when the lattice is uniform to relative tolerance `tol`.
    pub fn uniform_step(&self, tol: f64) -> Option<f64> {
        if self.values.len() < 2 {
            return None;
        }
        let n = self.values.len();
        let step = (self.values[n - 1] - self.values[0]) / (n - 1) as f64;
        self.values
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= tol * step)
            .then_some(step)
    }

    /// Trapezoid weights over the stored points.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        if n == 1 {
            return vec![0.0];
        }
        (0..n)
            .map(|m| {
                let left = if m > 0 { v[m] - v[m - 1] } else { 0.0 };
                let right = if m + 1 < n { v[m + 1] - v[m] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_uses_conjugate_extension() {
        let l = FrequencyLattice::uniform(0.0, 0.5, 5, true).unwrap();
        assert_eq!(
            l.locate(1.0),
            Some(LatticePoint {
                index: 2,
                conjugate: false
            })
        );
        assert_eq!(
            l.locate(-1.5),
            Some(LatticePoint {
                index: 3,
                conjugate: true
            })
        );
        assert_eq!(l.locate(0.7), None);
        let open = FrequencyLattice::uniform(0.0, 0.5, 5, false).unwrap();
        assert_eq!(open.locate(-1.0), None);
    }

    #[test]
    fn rejects_unsorted_and_negative_closure() {
        assert!(FrequencyLattice::new(vec![1.0, 1.0], false).is_err());
        assert!(FrequencyLattice::new(vec![-1.0, 1.0], true).is_err());
        assert!(FrequencyLattice::new(vec![], false).is_err());
    }

    #[test]
    fn trapezoid_weights_integrate_linear_exactly() {
        let l = FrequencyLattice::new(vec![0.0, 0.3, 1.0, 1.2], false).unwrap();
        let w = l.trapezoid_weights();
        let integral: f64 = w
            .iter()
            .zip(l.values())
            .map(|(w, x)| w * (2.0 * x + 1.0))
            .sum();
        assert!((integral - (1.44 + 1.2)).abs() < 1e-14);
    }

    #[test]
    fn uniform_step_detection() {
        let l = FrequencyLattice::uniform(0.25, 0.25, 8, true).unwrap();
        assert!((l.uniform_step(1e-9).unwrap() - 0.25).abs() < 1e-15);
        let l = FrequencyLattice::new(vec![0.0, 1.0, 3.0], true).unwrap();
        assert!(l.uniform_step(1e-9).is_none());
    }
}
