use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::solver::ComplexVectorField;
use crate::error::{Error, Result};
use crate::medium::{PulseSpectrum, SusceptibilityField};
use crate::vec3::{dot, norm, to_complex, CVec3, Vec3};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldSample {
    pub frequency: f64,
    pub direction: Vec3,
    pub value: CVec3,
}

/// `F f(omega) exp(-i omega x_3 / c) eta`.
pub fn incident_plane_wave(pulse: &PulseSpectrum, omega: f64, x: Vec3, c: f64) -> CVec3 {
    let a = pulse.profile(omega);
    if a == Complex64::new(0.0, 0.0) {
        return [a; 3];
    }
    let v = a * Complex64::from_polar(1.0, -omega * x[2] / c);
    pulse.polarization().map(|e| v * e)
}

/// `theta x (theta x eta) = theta <theta, eta> - eta`.
pub fn double_cross(theta: Vec3, eta: Vec3) -> Vec3 {
    let p = dot(theta, eta);
    [
        theta[0] * p - eta[0],
        theta[1] * p - eta[1],
        theta[2] * p - eta[2],
    ]
}

pub fn double_cross_complex(theta: Vec3, v: CVec3) -> CVec3 {
    let p = v[0] * theta[0] + v[1] * theta[1] + v[2] * theta[2];
    [
        p * theta[0] - v[0],
        p * theta[1] - v[1],
        p * theta[2] - v[2],
    ]
}

/// Unit length within `1e-12` and pointing into the upper half space.
pub fn check_direction(theta: Vec3) -> Result<()> {
    if (norm(theta) - 1.0).abs() > 1e-12 {
        return Err(Error::precondition(format!(
            "direction {theta:?} is not a unit vector"
        )));
    }
    if !(theta[2] > 0.0) {
        return Err(Error::precondition(format!(
            "direction {theta:?} does not reach the detector plane (theta_3 <= 0)"
        )));
    }
    Ok(())
}

/// Midpoint quadrature of `∫ exp(-i (nu/c) <theta + e3, y>) F mu(nu, y) dy`.
pub fn scattering_amplitude(
    m: &SusceptibilityField,
    nu: f64,
    theta: Vec3,
    c: f64,
) -> Result<Complex64> {
    let mu = m
        .at_frequency(nu)
        .ok_or_else(|| Error::precondition(format!("nu = {nu} is not on the medium lattice")))?;
    let grid = m.grid();
    let k = [
        nu * theta[0] / c,
        nu * theta[1] / c,
        nu * (theta[2] + 1.0) / c,
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    for (v, value) in mu.iter().enumerate() {
        if *value != Complex64::new(0.0, 0.0) {
            acc += value * Complex64::from_polar(1.0, -dot(k, grid.center(v)));
        }
    }
    Ok(acc * grid.voxel_volume())
}

fn far_field_prefactors(
    pulse: &PulseSpectrum,
    nu: f64,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<(Complex64, Complex64)> {
    if !(nu > 0.0) {
        return Err(Error::precondition(format!(
            "far field needs nu > 0, got {nu}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::precondition(format!(
            "detector radius must be positive, got {r}"
        )));
    }
    check_direction(theta)?;
    let f = pulse.profile(nu);
    if f == Complex64::new(0.0, 0.0) {
        return Err(Error::precondition(format!(
            "pulse spectrum vanishes at nu = {nu}"
        )));
    }
    let incident = f * Complex64::from_polar(1.0, -nu * r * theta[2] / c);
    let scattered = -I * nu * Complex64::from_polar(1.0, nu * r / c) / (r * c * c);
    Ok((incident, scattered))
}

/// Born approximation of the field at `R theta`, keeping the explicit
/// `R`-dependent phase and amplitude.
pub fn born_far_field(
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    nu: f64,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<FarFieldSample> {
    far_field_prefactors(pulse, nu, theta, r, c)?;
    let value = born_field_value(m, pulse, nu, theta, r, c)?;
    Ok(FarFieldSample {
        frequency: nu,
        direction: theta,
        value,
    })
}

/// [`born_far_field`] value without the nonvanishing-spectrum check, for any
/// real `nu` on the lattice (negative through the conjugate extension).
pub(crate) fn born_field_value(
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    nu: f64,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<CVec3> {
    let f = pulse.profile(nu);
    let incident = f * Complex64::from_polar(1.0, -nu * r * theta[2] / c);
    let scattered = -I * nu * Complex64::from_polar(1.0, nu * r / c) / (r * c * c);
    let amp = scattering_amplitude(m, nu, theta, c)?;
    let eta = pulse.polarization();
    let dc = double_cross(theta, eta);
    Ok([0, 1, 2].map(|a| incident * eta[a] + f * scattered * amp * dc[a]))
}

/// Far field at `R theta` radiated by the current `F mu F E` of a solved total field.
pub fn far_field_from_solution(
    field: &ComplexVectorField,
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    theta: Vec3,
    r: f64,
    c: f64,
) -> Result<FarFieldSample> {
    let nu = field.frequency;
    let (incident, scattered) = far_field_prefactors(pulse, nu, theta, r, c)?;
    let mu = m
        .at_frequency(nu)
        .ok_or_else(|| Error::precondition(format!("nu = {nu} is not on the medium lattice")))?;
    let grid = &field.grid;
    if !grid.same_as(m.grid()) {
        return Err(Error::precondition("field and medium grids differ"));
    }
    let k = [nu * theta[0] / c, nu * theta[1] / c, nu * theta[2] / c];
    let mut current = [Complex64::new(0.0, 0.0); 3];
    for (v, value) in mu.iter().enumerate() {
        if *value != Complex64::new(0.0, 0.0) {
            let w = value * Complex64::from_polar(1.0, -dot(k, grid.center(v)));
            for a in 0..3 {
                current[a] += w * field.values[v][a];
            }
        }
    }
    let current = current.map(|j| j * grid.voxel_volume());
    let dc = double_cross_complex(theta, current);
    let eta = to_complex(pulse.polarization());
    let value = [0, 1, 2].map(|a| incident * eta[a] + scattered * dc[a]);
    Ok(FarFieldSample {
        frequency: nu,
        direction: theta,
        value,
    })
}
