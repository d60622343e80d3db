use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::born_field_value;
use crate::medium::{PulseSpectrum, SusceptibilityField};
use crate::vec3::{norm, scale, CVec3, Vec3};

/// Samples whose magnitude is below this fraction of the peak count as zero
/// when checking that a time grid covers a signal.
const COVERAGE_LEVEL: f64 = 1e-6;

/// Uniform time grid `t_n = start + n step`, `n < count`, with `start >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(start >= 0.0 && step > 0.0 && count >= 2 && start.is_finite()) {
            return Err(Error::precondition(format!(
                "time grid needs start >= 0, step > 0 and two samples, got ({start}, {step}, {count})"
            )));
        }
        Ok(Self { start, step, count })
    }

    pub fn time(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    fn weight(&self, n: usize) -> f64 {
        if n == 0 || n + 1 == self.count {
            0.5 * self.step
        } else {
            self.step
        }
    }

    /// The signal must be negligible at the end (and at the start unless the
    /// grid starts at `t = 0`, the lower limit of every measurement integral).
    fn check_covers(&self, samples: &[f64], what: &str) -> Result<()> {
        if samples.len() != self.count {
            return Err(Error::precondition(format!(
                "{what}: {} samples for a grid of {}",
                samples.len(),
                self.count
            )));
        }
        let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let limit = COVERAGE_LEVEL * peak;
        let tail = samples[self.count - 1].abs() > limit;
        let head = self.start > 0.0 && samples[0].abs() > limit;
        if tail || head {
            return Err(Error::precondition(format!(
                "{what}: time grid [{}, {}] does not cover the signal support",
                self.start,
                self.end()
            )));
        }
        Ok(())
    }

    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.count).map(|n| self.weight(n) * f(n)).sum()
    }
}

/// `(f(t + x_3/c) - f(t + x_3/c + 2(z - x_3)/c)) eta` above the mirror, zero on and below it.
pub fn mirror_reference_field(pulse: &PulseSpectrum, z: f64, t: f64, x: Vec3, c: f64) -> Vec3 {
    if x[2] <= z {
        return [0.0; 3];
    }
    let direct = pulse.time_signal(t + x[2] / c);
    let reflected = pulse.time_signal(t + x[2] / c + 2.0 * (z - x[2]) / c);
    scale(pulse.polarization(), direct - reflected)
}

/// `I_j = ∫_0^∞ |E_j + E^z_j|^2 dt` from samples of both components on `grid`.
pub fn interferometric_intensity(field: &[f64], mirror: &[f64], grid: &TimeGrid) -> Result<f64> {
    if field.len() != mirror.len() {
        return Err(Error::precondition("field and mirror samples differ in length"));
    }
    let sum: Vec<f64> = field.iter().zip(mirror).map(|(a, b)| a + b).collect();
    grid.check_covers(&sum, "intensity")?;
    Ok(grid.integrate(|n| sum[n] * sum[n]))
}

/// `I~_j = (I_j - ∫|E_j|^2 - ∫|E^z_j|^2) / 2` from the three intensities.
pub fn effective_measurement(field: &[f64], mirror: &[f64], grid: &TimeGrid) -> Result<f64> {
    let total = interferometric_intensity(field, mirror, grid)?;
    let zeros = vec![0.0; field.len()];
    let sample = interferometric_intensity(field, &zeros, grid)?;
    let reference = interferometric_intensity(&zeros, mirror, grid)?;
    Ok(0.5 * (total - sample - reference))
}

/// `∫_0^∞ E_j E^z_j dt`, the closed form of [`effective_measurement`].
pub fn effective_measurement_product(field: &[f64], mirror: &[f64], grid: &TimeGrid) -> Result<f64> {
    if field.len() != mirror.len() {
        return Err(Error::precondition("field and mirror samples differ in length"));
    }
    grid.check_covers(field, "sample field")?;
    grid.check_covers(mirror, "reference field")?;
    Ok(grid.integrate(|n| field[n] * mirror[n]))
}

/// Positive-frequency samples of `F_t E(omega, xi)` at one detector point,
/// on a uniform lattice covering the pulse band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub point: Vec3,
    pub step: f64,
    pub frequencies: Vec<f64>,
    pub values: Vec<CVec3>,
}

impl SpectralField {
    /// `E(t) = (1/pi) Re sum_m d_omega F E(omega_m) exp(-i omega_m t)`; the
    /// samples vanish at both band edges, so this is the trapezoid rule.
    pub fn time_samples(&self, grid: &TimeGrid) -> Vec<Vec3> {
        (0..grid.count)
            .into_par_iter()
            .map(|n| {
                let t = grid.time(n);
                let mut acc = [0.0; 3];
                for (w, v) in self.frequencies.iter().zip(&self.values) {
                    let phase = Complex64::from_polar(1.0, -w * t);
                    for a in 0..3 {
                        acc[a] += (v[a] * phase).re;
                    }
                }
                acc.map(|s| s * self.step / std::f64::consts::PI)
            })
            .collect()
    }

    /// Period of the synthesized signal, `2 pi / step`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.step
    }
}

/// Born field at the detector point `xi` on every positive medium frequency
/// inside the pulse band.
pub fn detector_spectrum(
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    xi: Vec3,
    c: f64,
) -> Result<SpectralField> {
    let lattice = m.freqs();
    let step = lattice.uniform_step(1e-9).ok_or_else(|| {
        Error::precondition("time synthesis needs a uniform frequency lattice")
    })?;
    let values = lattice.values();
    let (band_lo, band_hi) = (pulse.center() - pulse.half_width(), pulse.omega_max());
    if values[0] > band_lo + 1e-12 || *values.last().expect("lattice is non-empty") < band_hi - 1e-12 {
        return Err(Error::precondition(format!(
            "medium lattice [{}, {}] does not cover the pulse band [{band_lo}, {band_hi}]",
            values[0],
            values[values.len() - 1]
        )));
    }
    let r = norm(xi);
    let theta = scale(xi, 1.0 / r);
    let mut frequencies = Vec::new();
    let mut samples = Vec::new();
    for &w in values {
        if w > 0.0 && pulse.profile(w) != Complex64::new(0.0, 0.0) {
            frequencies.push(w);
            samples.push(born_field_value(m, pulse, w, theta, r, c)?);
        }
    }
    Ok(SpectralField {
        point: xi,
        step,
        frequencies,
        values: samples,
    })
}

/// Time grid with spacing `pi / (4 omega_max)` covering the arrival of the
/// field scattered by the medium support at `xi`.
pub fn measurement_window(
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    field: &SpectralField,
    c: f64,
) -> Result<TimeGrid> {
    let grid = m.grid();
    let support = m.support();
    let (lo, hi) = pulse.temporal_support();
    let xi = field.point;
    let half_diag = 0.5 * grid.spacing * 3f64.sqrt();
    let (mut tau_min, mut tau_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &support {
        let y = grid.center(v);
        let d = [xi[0] - y[0], xi[1] - y[1], xi[2] - y[2]];
        let tau = (norm(d) - y[2]) / c;
        tau_min = tau_min.min(tau - 2.0 * half_diag / c);
        tau_max = tau_max.max(tau + 2.0 * half_diag / c);
    }
    if support.is_empty() {
        // Nothing is scattered; any window after the incident pulse will do.
        tau_min = xi[2] / c;
        tau_max = xi[2] / c;
    }
    let start = lo + tau_min;
    if start < 0.0 {
        return Err(Error::precondition(format!(
            "scattered field reaches the detector at t = {start:.3} < 0; move the plane further out"
        )));
    }
    let end = hi + tau_max;
    // The synthesized field also carries the incident pulse, centred near t = -x_3 / c.
    let earliest = start.min(lo - xi[2] / c);
    if end - earliest >= field.period() {
        return Err(Error::precondition(format!(
            "frequency step {} too coarse: signal duration {:.3} exceeds the synthesis period {:.3}",
            field.step,
            end - earliest,
            field.period()
        )));
    }
    let step = std::f64::consts::PI / (4.0 * pulse.omega_max());
    let count = ((end - start) / step).ceil() as usize + 1;
    TimeGrid::new(start, step, count)
}

/// Effective measurements `I~_j(z)` for `j = 1, 2` on a uniform mirror-depth lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorScan {
    pub point: Vec3,
    pub depths: Vec<f64>,
    pub values: [Vec<f64>; 2],
}

impl MirrorScan {
    pub fn depth_step(&self) -> f64 {
        if self.depths.len() < 2 {
            0.0
        } else {
            self.depths[1] - self.depths[0]
        }
    }
}

/// Simulates the mirror scan at `signal.point`: for each depth the reference
/// field is evaluated on `grid` and correlated with the detector field.
///
/// The depth step is `c dt / 2`, so consecutive depths shift the reflected
/// pulse by one time sample and a single table of `f` serves every depth.
pub fn simulate_scan(
    signal: &SpectralField,
    pulse: &PulseSpectrum,
    grid: &TimeGrid,
    c: f64,
) -> Result<MirrorScan> {
    let xi = signal.point;
    let samples = signal.time_samples(grid);
    for j in 0..2 {
        let comp: Vec<f64> = samples.iter().map(|e| e[j]).collect();
        grid.check_covers(&comp, "detector field")?;
    }
    let (lo, hi) = pulse.temporal_support();
    let dt = grid.step;
    // Reflected pulse argument is t + s with s = (2z - xi_3)/c.
    let s_min = lo - grid.end() - dt;
    let s_max = hi - grid.start + dt;
    let shifts = ((s_max - s_min) / dt).ceil() as usize + 1;
    let table: Vec<f64> = (0..grid.count + shifts)
        .into_par_iter()
        .map(|k| pulse.time_signal(grid.start + s_min + k as f64 * dt))
        .collect();
    let direct: Vec<f64> = (0..grid.count)
        .map(|i| pulse.time_signal(grid.time(i) + xi[2] / c))
        .collect();
    let eta = pulse.polarization();
    let depths: Vec<f64> = (0..shifts)
        .map(|n| 0.5 * (c * (s_min + n as f64 * dt) + xi[2]))
        .collect();
    let scan = |j: usize| -> Vec<f64> {
        (0..shifts)
            .into_par_iter()
            .map(|n| {
                if xi[2] <= depths[n] {
                    return 0.0;
                }
                grid.integrate(|i| samples[i][j] * eta[j] * (direct[i] - table[i + n]))
            })
            .collect()
    };
    Ok(MirrorScan {
        point: xi,
        values: [scan(0), scan(1)],
        depths,
    })
}

/// `F_t h_j(omega, xi) = F E0_j(omega, xi) - 2/(c eta_j F f(-omega)) ∫ I~_j(z) exp(-i (omega/c)(2z - xi_3)) dz`.
pub fn extract_h(
    scan: &MirrorScan,
    pulse: &PulseSpectrum,
    omega: f64,
    c: f64,
) -> Result<[Complex64; 2]> {
    let eta = pulse.polarization();
    if eta[0] == 0.0 || eta[1] == 0.0 {
        return Err(Error::precondition(
            "both polarization components eta_1, eta_2 must be nonzero to recover h",
        ));
    }
    let f_minus = pulse.profile(-omega);
    if f_minus == Complex64::new(0.0, 0.0) {
        return Err(Error::precondition(format!(
            "the Fourier transform of f must be nonzero, but F f(-omega) = 0 at omega = {omega}"
        )));
    }
    let n = scan.depths.len();
    if n < 2 {
        return Err(Error::precondition("mirror scan needs at least two depths"));
    }
    for j in 0..2 {
        let v = &scan.values[j];
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v[0].abs() > COVERAGE_LEVEL * peak || v[n - 1].abs() > COVERAGE_LEVEL * peak {
            return Err(Error::precondition(
                "mirror-depth lattice does not span the support of the effective measurements",
            ));
        }
    }
    let xi = scan.point;
    let dz = scan.depth_step();
    let e0 = pulse.profile(omega) * Complex64::from_polar(1.0, -omega * xi[2] / c);
    Ok([0, 1].map(|j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, (&z, &v)) in scan.depths.iter().zip(&scan.values[j]).enumerate() {
            let w = if k == 0 || k + 1 == n { 0.5 * dz } else { dz };
            acc += Complex64::from_polar(w * v, -omega * (2.0 * z - xi[2]) / c);
        }
        e0 * eta[j] - acc * 2.0 / (c * eta[j] * f_minus)
    }))
}
