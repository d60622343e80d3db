use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Phase parameters of a pulse: arrival time of the envelope peak and a
/// quadratic spectral phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseShape {
    pub delay: f64,
    #[serde(default)]
    pub chirp: f64,
}

/// Band-limited spectrum `F f_nu(omega)` of one illumination pulse.
///
/// The magnitude is a smooth bump supported on `|omega| in [nu - eps, nu + eps]`;
/// it vanishes with all derivatives at the band edges so that trapezoid
/// quadrature on the band lattice converges faster than any power. The scale
/// is fixed so that the trapezoid sum of `|F f|^2` over the stored (positive)
/// lattice is exactly 1/2.
#[derive(Debug, Clone)]
pub struct PulseSpectrum {
    center: f64,
    half_width: f64,
    polarization: Vec3,
    shape: PulseShape,
    amplitude: Complex64,
    lattice: FrequencyLattice,
    samples: Vec<Complex64>,
}

const GAUSS_RATE: f64 = 12.0;
const BUMP_RATE: f64 = 0.5;
const TIME_QUADRATURE_INTERVALS: usize = 1024;
/// Envelope level treated as "outside the pulse" when bounding its duration.
pub(crate) const SUPPORT_LEVEL: f64 = 1e-7;

fn envelope(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - u * u;
    (-GAUSS_RATE * u * u + BUMP_RATE * (1.0 - 1.0 / q)).exp()
}

impl PulseSpectrum {
    /// `band_points` samples (odd, at least 5) span the positive band.
    pub fn new(
        center: f64,
        half_width: f64,
        polarization: Vec3,
        shape: PulseShape,
        band_points: usize,
    ) -> Result<Self> {
        if !(half_width > 0.0 && center > half_width && center.is_finite()) {
            return Err(Error::precondition(format!(
                "pulse needs 0 < half_width < center, got center {center}, half_width {half_width}"
            )));
        }
        if band_points < 5 || band_points % 2 == 0 {
            return Err(Error::precondition(format!(
                "band_points must be odd and at least 5, got {band_points}"
            )));
        }
        if polarization[2].abs() > 1e-12 {
            return Err(Error::precondition(
                "polarization must have zero third component",
            ));
        }
        let len = (polarization[0].powi(2) + polarization[1].powi(2)).sqrt();
        if (len - 1.0).abs() > 1e-9 {
            return Err(Error::precondition(format!(
                "polarization must be a unit vector, got length {len}"
            )));
        }
        let polarization = [polarization[0] / len, polarization[1] / len, 0.0];
        if !(shape.delay.is_finite() && shape.chirp.is_finite()) {
            return Err(Error::precondition("pulse delay and chirp must be finite"));
        }
        let lattice = FrequencyLattice::uniform(
            center - half_width,
            2.0 * half_width / (band_points - 1) as f64,
            band_points,
            true,
        )?;
        let mut pulse = Self {
            center,
            half_width,
            polarization,
            shape,
            amplitude: Complex64::new(1.0, 0.0),
            lattice,
            samples: Vec::new(),
        };
        let raw: Vec<Complex64> = pulse
            .lattice
            .values()
            .iter()
            .map(|&w| pulse.unit(w))
            .collect();
        let weights = pulse.lattice.trapezoid_weights();
        let energy: f64 = raw
            .iter()
            .zip(&weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum();
        pulse.amplitude = Complex64::new((0.5 / energy).sqrt(), 0.0);
        pulse.samples = raw.iter().map(|v| v * pulse.amplitude).collect();
        Ok(pulse)
    }

    /// Unscaled positive-frequency profile.
    fn unit(&self, omega: f64) -> Complex64 {
        let d = omega - self.center;
        let env = envelope(d / self.half_width);
        if env == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(env, omega * self.shape.delay + self.shape.chirp * d * d)
    }

    /// `F f_nu(omega)` for any real `omega`; negative frequencies by conjugation.
    pub fn profile(&self, omega: f64) -> Complex64 {
        if omega >= 0.0 {
            self.amplitude * self.unit(omega)
        } else {
            (self.amplitude * self.unit(-omega)).conj()
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn polarization(&self) -> Vec3 {
        self.polarization
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn omega_max(&self) -> f64 {
        self.center + self.half_width
    }

    /// Positive band lattice the profile is sampled on.
    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Trapezoid sum of `|F f|^2` over the stored lattice.
    pub fn normalization(&self) -> f64 {
        self.samples
            .iter()
            .zip(self.lattice.trapezoid_weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum()
    }

    /// Same pulse with the positive-frequency profile multiplied by `a`
    /// (negative frequencies by `conj(a)`, keeping `f` real).
    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.amplitude *= a;
        out.samples.iter_mut().for_each(|v| *v *= a);
        out
    }

    fn time_nodes(&self) -> (f64, f64, usize) {
        let n = TIME_QUADRATURE_INTERVALS;
        let lo = self.center - self.half_width;
        (lo, 2.0 * self.half_width / n as f64, n + 1)
    }

    /// Baseband sum `sum_q w_q F f(omega_q) exp(-i omega_q t)` over the positive band.
    fn analytic(&self, t: f64) -> Complex64 {
        let (lo, dw, count) = self.time_nodes();
        let step = Complex64::from_polar(1.0, -dw * t);
        let mut phase = Complex64::from_polar(1.0, -lo * t);
        let mut acc = Complex64::new(0.0, 0.0);
        // Endpoint samples vanish, so plain Riemann weights equal trapezoid weights.
        for q in 0..count {
            acc += self.profile(lo + dw * q as f64) * phase;
            phase *= step;
        }
        acc * dw
    }

    /// Real time-domain pulse `f(t) = (1/2 pi) ∫ F f(omega) exp(-i omega t) d omega`.
    pub fn time_signal(&self, t: f64) -> f64 {
        self.analytic(t).re / std::f64::consts::PI
    }

    /// Interval outside which the pulse envelope is below `1e-7` of its peak.
    pub fn temporal_support(&self) -> (f64, f64) {
        let step = 0.5 / self.half_width;
        let t0 = self.shape.delay;
        let peak = (-40..=40)
            .map(|n| self.analytic(t0 + n as f64 * step).norm())
            .fold(0.0, f64::max);
        let threshold = SUPPORT_LEVEL * peak;
        let edge = |dir: f64| {
            let mut quiet = 0;
            let mut last_loud = 0usize;
            for n in 1..200_000usize {
                if self.analytic(t0 + dir * n as f64 * step).norm() > threshold {
                    last_loud = n;
                    quiet = 0;
                } else {
                    quiet += 1;
                    if quiet >= 16 {
                        break;
                    }
                }
            }
            t0 + dir * (last_loud + 1) as f64 * step
        };
        (edge(-1.0), edge(1.0))
    }
}
