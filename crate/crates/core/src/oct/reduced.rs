use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detector::DetectorPlane;
use crate::error::{Error, Result};
use crate::forward::{born_field_value, check_direction, double_cross};
use crate::medium::{PulseSpectrum, SusceptibilityField};
use crate::vec3::{norm, scale, CVec3, Vec3};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Components with `|(theta x theta x eta)_j|` below this are skipped.
const DEGENERATE_COMPONENT: f64 = 1e-10;

/// Per-component estimates of `h~(nu, theta)` from the field `E` at `R theta`:
/// `(E_j / F f(nu) - exp(-i nu R theta_3 / c) eta_j) i R c^2 exp(-i nu R / c) / (nu (theta x theta x eta)_j)`.
/// `None` marks a component whose double cross product vanishes.
pub fn h_tilde_components(
    field: CVec3,
    pulse: &PulseSpectrum,
    nu: f64,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<[Option<Complex64>; 2]> {
    if !(nu > 0.0 && r > 0.0) {
        return Err(Error::precondition(format!(
            "h~ needs nu > 0 and R > 0, got nu = {nu}, R = {r}"
        )));
    }
    check_direction(theta)?;
    let f = pulse.profile(nu);
    if f == Complex64::new(0.0, 0.0) {
        return Err(Error::precondition(format!("pulse spectrum vanishes at nu = {nu}")));
    }
    let eta = pulse.polarization();
    let dc = double_cross(theta, eta);
    let incident = Complex64::from_polar(1.0, -nu * r * theta[2] / c);
    let factor = I * r * c * c * Complex64::from_polar(1.0, -nu * r / c) / nu;
    Ok([0, 1].map(|j| {
        (dc[j].abs() > DEGENERATE_COMPONENT)
            .then(|| (field[j] / f - incident * eta[j]) * factor / dc[j])
    }))
}

/// Average of the valid entries of [`h_tilde_components`].
pub fn h_tilde(
    field: CVec3,
    pulse: &PulseSpectrum,
    nu: f64,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<Complex64> {
    let parts = h_tilde_components(field, pulse, nu, theta, r, c)?;
    let valid: Vec<Complex64> = parts.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::precondition(format!(
            "direction {theta:?} is degenerate: theta x (theta x eta) has no usable component"
        )));
    }
    Ok(valid.iter().sum::<Complex64>() / valid.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearityReport {
    /// `(c_1, c_2)` with `eta^3 = c_1 eta^1 + c_2 eta^2`.
    pub coefficients: [f64; 2],
    pub max_violation: f64,
    pub samples: usize,
}

/// Checks `F h^3 = sum_k c_k (F f^3 / F f^k) F h^k` on the Born detector data.
///
/// Evaluated at every detector point and at every positive medium frequency
/// where both `F f^1` and `F f^2` exceed `1e-8` of their peaks.
pub fn check_linearity(
    m: &SusceptibilityField,
    pulses: [&PulseSpectrum; 3],
    plane: &DetectorPlane,
    c: f64,
) -> Result<LinearityReport> {
    let [e1, e2, e3] = pulses.map(|p| p.polarization());
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if det.abs() < 1e-6 {
        return Err(Error::precondition(format!(
            "polarizations eta^1, eta^2 are (nearly) linearly dependent, det = {det:.3e}"
        )));
    }
    let c1 = (e3[0] * e2[1] - e3[1] * e2[0]) / det;
    let c2 = (e1[0] * e3[1] - e1[1] * e3[0]) / det;
    let peak = |p: &PulseSpectrum| p.samples().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let (p1, p2) = (peak(pulses[0]), peak(pulses[1]));
    let omegas: Vec<f64> = m
        .freqs()
        .values()
        .iter()
        .copied()
        .filter(|&w| {
            w > 0.0
                && pulses[0].profile(w).norm() > 1e-8 * p1
                && pulses[1].profile(w).norm() > 1e-8 * p2
        })
        .collect();
    if omegas.is_empty() {
        return Err(Error::precondition(
            "no medium frequency where both F f^1 and F f^2 are nonzero",
        ));
    }
    let pairs: Vec<(f64, Vec3)> = omegas
        .iter()
        .flat_map(|&w| plane.points().iter().map(move |&x| (w, x)))
        .collect();
    let violations: Vec<f64> = pairs
        .par_iter()
        .map(|&(w, xi)| -> Result<f64> {
            let r = norm(xi);
            let theta = scale(xi, 1.0 / r);
            let h1 = born_field_value(m, pulses[0], w, theta, r, c)?;
            let h2 = born_field_value(m, pulses[1], w, theta, r, c)?;
            let h3 = born_field_value(m, pulses[2], w, theta, r, c)?;
            let f = pulses.map(|p| p.profile(w));
            let a1 = c1 * f[2] / f[0];
            let a2 = c2 * f[2] / f[1];
            let mut diff = 0.0;
            let mut scale_ = 0.0f64;
            for j in 0..2 {
                let rhs = a1 * h1[j] + a2 * h2[j];
                diff += (h3[j] - rhs).norm_sqr();
                scale_ = scale_.max(h3[j].norm()).max(rhs.norm());
            }
            Ok(if scale_ == 0.0 { 0.0 } else { diff.sqrt() / scale_ })
        })
        .collect::<Result<_>>()?;
    Ok(LinearityReport {
        coefficients: [c1, c2],
        max_violation: violations.iter().fold(0.0, |m: f64, v| m.max(*v)),
        samples: violations.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OctSample {
    pub nu: f64,
    pub direction: Vec3,
    pub value: Complex64,
}

#[derive(Serialize, Deserialize)]
struct OctRow {
    nu: f64,
    theta_x: f64,
    theta_y: f64,
    theta_z: f64,
    re_h: f64,
    im_h: f64,
}

/// `h~(nu, theta)` on a frequency-major direction lattice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OctRecord {
    pub samples: Vec<OctSample>,
}

impl OctRecord {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Distinct frequencies in order of first appearance.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.samples {
            if out.last() != Some(&s.nu) {
                out.push(s.nu);
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        for s in &self.samples {
            w.serialize(OctRow {
                nu: s.nu,
                theta_x: s.direction[0],
                theta_y: s.direction[1],
                theta_z: s.direction[2],
                re_h: s.value.re,
                im_h: s.value.im,
            })
            .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let samples = r
            .deserialize::<OctRow>()
            .map(|row| {
                row.map(|row| OctSample {
                    nu: row.nu,
                    direction: [row.theta_x, row.theta_y, row.theta_z],
                    value: Complex64::new(row.re_h, row.im_h),
                })
                .map_err(|e| csv_error(path, e))
            })
            .collect::<Result<_>>()?;
        Ok(Self { samples })
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        }
    } else {
        Error::format(path, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{FrequencyLattice, Grid3, PulseShape};

    #[test]
    fn vacuum_gives_zero() {
        let grid = Grid3::centered(0.5, [4, 4, 4]).unwrap();
        let freqs = FrequencyLattice::uniform(1.5, 0.125, 9, true).unwrap();
        let m = SusceptibilityField::zeros(grid, freqs);
        let p = PulseSpectrum::new(2.0, 0.5, [0.6, 0.8, 0.0], PulseShape::default(), 9).unwrap();
        let theta = [0.0, 0.6, 0.8];
        let e = born_field_value(&m, &p, 2.0, theta, 40.0, 1.0).unwrap();
        let h = h_tilde(e, &p, 2.0, theta, 40.0, 1.0).unwrap();
        assert!(h.norm() < 1e-14);
    }

    #[test]
    fn record_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oct.csv");
        let rec = OctRecord {
            samples: vec![
                OctSample {
                    nu: 1.0,
                    direction: [0.1, 0.2, (1.0f64 - 0.05).sqrt()],
                    value: Complex64::new(0.1 + 0.2, -1e-300),
                },
                OctSample {
                    nu: 1.5,
                    direction: [0.0, 0.0, 1.0],
                    value: Complex64::new(-3.5, 2.0 / 3.0),
                },
            ],
        };
        rec.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("nu,theta_x,theta_y,theta_z,re_h,im_h\n"));
        assert_eq!(OctRecord::read_csv(&path).unwrap(), rec);
        assert_eq!(rec.frequencies(), vec![1.0, 1.5]);
    }
}
