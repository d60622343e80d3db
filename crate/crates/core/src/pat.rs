//! Photoacoustic initial pressure from the absorbed electromagnetic energy.
//!
//! `p~(nu, x) = 2 pi p0_nu(x) = gamma(x) ∫ F mu(omega, x) |F E_nu(omega, x)|^2 d omega`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::forward::ComplexVectorField;
use crate::medium::volume::{read_volume, write_volume, ScalarKind, VolumeHeader};
use crate::medium::{
    DispersionModel, FrequencyLattice, Grid3, GruneisenField, PulseSpectrum, SusceptibilityField,
};
use crate::vec3::{CVec3, Vec3};

/// Relative size of the imaginary part tolerated in a spectral energy sum.
const IMAGINARY_RESIDUAL: f64 = 1e-10;
/// Energy fraction allowed in the top eighth of FFT bins.
const ALIASING_LEVEL: f64 = 1e-12;

/// `(1/2 pi) ∫ F mu(omega) |F E(omega)|^2 d omega` by the trapezoid rule.
///
/// On a closure lattice the negative half is the conjugate of the stored one,
/// so every `omega != 0` node contributes `2 Re`; only an `omega = 0` node can
/// leave an imaginary part. On a full lattice the sum is formed directly.
pub fn absorbed_energy_spectral(
    lattice: &FrequencyLattice,
    field: &[CVec3],
    mu: &[Complex64],
) -> Result<f64> {
    if field.len() != lattice.len() || mu.len() != lattice.len() {
        return Err(Error::precondition(format!(
            "need one field and one mu sample per lattice point ({}), got {} and {}",
            lattice.len(),
            field.len(),
            mu.len()
        )));
    }
    let weights = lattice.trapezoid_weights();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (((&w, &omega), e), m) in weights.iter().zip(lattice.values()).zip(field).zip(mu) {
        let e2: f64 = e.iter().map(|c| c.norm_sqr()).sum();
        let term = m * (w * e2);
        if lattice.symmetric_closure() && omega != 0.0 {
            sum += 2.0 * term.re;
            magnitude += 2.0 * term.norm();
        } else {
            sum += term;
            magnitude += term.norm();
        }
    }
    if sum.im.abs() > IMAGINARY_RESIDUAL * magnitude {
        return Err(Error::Symmetry(format!(
            "absorbed energy has imaginary part {:.3e} against magnitude {magnitude:.3e}",
            sum.im
        )));
    }
    Ok(sum.re / (2.0 * std::f64::consts::PI))
}

/// `∫∫ mu(tau) <E(t), E(t - tau)> d tau dt` from uniform time samples of a
/// real field, through the convolution theorem on a zero-padded FFT.
///
/// The padded length exceeds twice the record plus forty decay times of the
/// kernel, so the periodized kernel is negligible.
pub fn absorbed_energy_time(samples: &[Vec3], dt: f64, model: &dyn DispersionModel) -> Result<f64> {
    if !(dt > 0.0) || samples.is_empty() {
        return Err(Error::precondition("need a positive time step and samples"));
    }
    let span = samples.len() as f64 * dt + 40.0 * model.decay_time();
    let len = ((2.0 * span / dt).ceil() as usize).next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let mut spectra = Vec::with_capacity(3);
    for a in 0..3 {
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (slot, e) in buf.iter_mut().zip(samples) {
            slot.re = e[a];
        }
        fft.process(&mut buf);
        spectra.push(buf);
    }
    let power: Vec<f64> = (0..len)
        .map(|k| spectra.iter().map(|s| s[k].norm_sqr()).sum::<f64>() * dt * dt)
        .collect();
    let total: f64 = power.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    // Bins nearest Nyquist (both signs) must be empty.
    let edge = len / 16;
    let high: f64 = power[len / 2 - edge..len / 2 + edge].iter().sum();
    if high > ALIASING_LEVEL * total {
        return Err(Error::precondition(format!(
            "time step {dt} too coarse for the field band: {:.3e} of the energy sits near Nyquist",
            high / total
        )));
    }
    let d_omega = 2.0 * std::f64::consts::PI / (len as f64 * dt);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (k, p) in power.iter().enumerate() {
        let index = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
        let term = model.response(index * d_omega) * *p;
        sum += term;
        magnitude += term.norm();
    }
    if sum.im.abs() > IMAGINARY_RESIDUAL * magnitude.max(f64::MIN_POSITIVE) {
        return Err(Error::Symmetry(format!(
            "time-route energy has imaginary part {:.3e}",
            sum.im
        )));
    }
    Ok(sum.re * d_omega / (2.0 * std::f64::consts::PI))
}

// Positivity of gamma matters only to the inversion; here gamma = 0 is allowed.
fn same_grid(m: &SusceptibilityField, gamma: &GruneisenField) -> Result<()> {
    if gamma.grid().same_as(m.grid()) {
        Ok(())
    } else {
        Err(Error::precondition("Grüneisen and medium grids differ"))
    }
}

/// Field entering the absorbed energy.
#[derive(Debug, Clone, Copy)]
pub enum FieldSource<'a> {
    /// Incident plane wave only, `|F E|^2 = |F f|^2`.
    Incident,
    /// Solved total fields, one per positive medium frequency inside the pulse band.
    Solved(&'a [ComplexVectorField]),
}

/// `p~(nu, .)` voxelwise from the spectral absorbed energy.
pub fn initial_pressure(
    m: &SusceptibilityField,
    gamma: &GruneisenField,
    pulse: &PulseSpectrum,
    source: FieldSource<'_>,
) -> Result<Vec<f64>> {
    same_grid(m, gamma)?;
    let lattice = m.freqs();
    let grid = m.grid();
    let fields: Vec<Option<&ComplexVectorField>> = match source {
        FieldSource::Incident => vec![None; lattice.len()],
        FieldSource::Solved(list) => {
            let mut slots = vec![None; lattice.len()];
            for f in list {
                let p = lattice.locate(f.frequency).filter(|p| !p.conjugate).ok_or_else(|| {
                    Error::precondition(format!(
                        "solved field at omega = {} is not on the stored lattice",
                        f.frequency
                    ))
                })?;
                if !f.grid.same_as(grid) {
                    return Err(Error::precondition("solved field grid differs from the medium"));
                }
                slots[p.index] = Some(f);
            }
            for (slot, &w) in slots.iter().zip(lattice.values()) {
                if slot.is_none() && pulse.profile(w) != Complex64::new(0.0, 0.0) {
                    return Err(Error::precondition(format!(
                        "no solved field at omega = {w} inside the pulse band"
                    )));
                }
            }
            slots
        }
    };
    let incident: Vec<f64> = lattice.values().iter().map(|&w| pulse.profile(w).norm_sqr()).collect();
    let zero = [Complex64::new(0.0, 0.0); 3];
    (0..grid.len())
        .into_par_iter()
        .map(|v| {
            let g = gamma.values()[v];
            let mu: Vec<Complex64> = (0..lattice.len()).map(|i| m.value(i, v)).collect();
            if g == 0.0 || mu.iter().all(|x| *x == Complex64::new(0.0, 0.0)) {
                return Ok(0.0);
            }
            let e: Vec<CVec3> = fields
                .iter()
                .zip(&incident)
                .map(|(f, &i2)| match f {
                    Some(f) => f.values[v],
                    None if matches!(source, FieldSource::Incident) => {
                        [Complex64::new(i2.sqrt(), 0.0), zero[1], zero[2]]
                    }
                    None => zero,
                })
                .collect();
            let energy = absorbed_energy_spectral(lattice, &e, &mu)?;
            Ok(2.0 * std::f64::consts::PI * g * energy)
        })
        .collect()
}

/// `p~(nu, x) = gamma(x) Re F mu(nu, x)`: the Born, narrowband, unit-energy limit.
pub fn narrowband_pressure(
    m: &SusceptibilityField,
    gamma: &GruneisenField,
    nu: f64,
) -> Result<Vec<f64>> {
    same_grid(m, gamma)?;
    let mu = m
        .at_frequency(nu)
        .ok_or_else(|| Error::precondition(format!("nu = {nu} is not on the medium lattice")))?;
    Ok(mu
        .iter()
        .zip(gamma.values())
        .map(|(m, g)| g * m.re)
        .collect())
}

/// `p~(nu, x)` for a list of illumination centre frequencies, `nu`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatRecord {
    pub grid: Grid3,
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl PatRecord {
    pub fn new(grid: Grid3, freqs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != freqs.len() * grid.len() {
            return Err(Error::precondition(format!(
                "PAT record needs {} values, got {}",
                freqs.len() * grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("PAT record contains non-finite values"));
        }
        Ok(Self { grid, freqs, values })
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn save(&self, stem: &Path) -> Result<Vec<PathBuf>> {
        let header = VolumeHeader::new("pat_pressure", ScalarKind::Real, 1, self.grid.clone())
            .with_frequencies(&self.freqs, false);
        write_volume(stem, header, &self.values)
    }

    pub fn load(sidecar: &Path) -> Result<Self> {
        let (h, data) = read_volume(sidecar)?;
        if h.scalar != ScalarKind::Real || h.components != 1 || h.frequencies.is_empty() {
            return Err(Error::format(sidecar, "expected a real scalar volume per frequency"));
        }
        Self::new(h.grid, h.frequencies, data)
    }
}
