//! Formulas linking `F mu` to radiative-transfer coefficients: diffusion
//! coefficient, fluence-based initial pressure, time-averaged Poynting vector
//! and the ball-averaged absorption estimate. No transport equation is solved.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::ComplexVectorField;
use crate::medium::{Grid3, GruneisenField, SusceptibilityField};
use crate::vec3::{dot, sub, CVec3, Vec3};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Absorption `mu_a`, scattering `mu_s` and anisotropy moment `theta1` per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct RteParams {
    pub grid: Grid3,
    pub mu_a: Vec<f64>,
    pub mu_s: Vec<f64>,
    pub theta1: Vec<f64>,
}

impl RteParams {
    pub fn new(grid: Grid3, mu_a: Vec<f64>, mu_s: Vec<f64>, theta1: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if mu_a.len() != n || mu_s.len() != n || theta1.len() != n {
            return Err(Error::precondition("RTE coefficient volumes must match the grid"));
        }
        if mu_a.iter().chain(&mu_s).any(|v| !(*v >= 0.0)) {
            return Err(Error::precondition("mu_a and mu_s must be non-negative"));
        }
        Ok(Self {
            grid,
            mu_a,
            mu_s,
            theta1,
        })
    }
}

/// `[3 (mu_a + (1 - theta1/3) mu_s)]^-1`.
pub fn diffusion_coefficient_value(mu_a: f64, mu_s: f64, theta1: f64) -> Result<f64> {
    let den = 3.0 * (mu_a + (1.0 - theta1 / 3.0) * mu_s);
    if !(den > 0.0) {
        return Err(Error::precondition(format!(
            "diffusion coefficient undefined: 3(mu_a + (1 - theta1/3) mu_s) = {den}"
        )));
    }
    Ok(1.0 / den)
}

pub fn diffusion_coefficient(p: &RteParams, voxel: usize) -> Result<f64> {
    if voxel >= p.grid.len() {
        return Err(Error::precondition("voxel index out of range"));
    }
    diffusion_coefficient_value(p.mu_a[voxel], p.mu_s[voxel], p.theta1[voxel])
}

/// `p0 = gamma mu_a Phi` voxelwise, with the fluence `Phi` supplied.
pub fn rte_initial_pressure(gamma: &GruneisenField, p: &RteParams, fluence: &[f64]) -> Result<Vec<f64>> {
    if !gamma.grid().same_as(&p.grid) || fluence.len() != p.grid.len() {
        return Err(Error::precondition("Grüneisen, coefficient and fluence volumes differ in shape"));
    }
    Ok(gamma
        .values()
        .iter()
        .zip(&p.mu_a)
        .zip(fluence)
        .map(|((g, a), f)| g * a * f)
        .collect())
}

/// `F B = -(i c / omega) curl F E` by central differences (one-sided on the faces).
pub fn magnetic_field(e: &ComplexVectorField, c: f64) -> Result<Vec<CVec3>> {
    let omega = e.frequency;
    if omega == 0.0 {
        return Err(Error::precondition("magnetic field needs omega != 0"));
    }
    let grid = &e.grid;
    let h = grid.spacing;
    let dims = grid.dims;
    let deriv = |v: usize, axis: usize, comp: usize| -> Complex64 {
        let idx = grid.coords(v);
        let n = dims[axis];
        if n < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let at = |i: usize| {
            let mut q = idx;
            q[axis] = i;
            e.values[grid.index(q[0], q[1], q[2])][comp]
        };
        let i = idx[axis];
        if i == 0 {
            (at(1) - at(0)) / h
        } else if i == n - 1 {
            (at(n - 1) - at(n - 2)) / h
        } else {
            (at(i + 1) - at(i - 1)) / (2.0 * h)
        }
    };
    let factor = -I * c / omega;
    Ok((0..grid.len())
        .map(|v| {
            let curl = [
                deriv(v, 1, 2) - deriv(v, 2, 1),
                deriv(v, 2, 0) - deriv(v, 0, 2),
                deriv(v, 0, 1) - deriv(v, 1, 0),
            ];
            curl.map(|x| x * factor)
        })
        .collect())
}

/// `S = (c / 8 pi) Re(F E x conj F B)`.
pub fn poynting_time_averaged(e: CVec3, b: CVec3, c: f64) -> Vec3 {
    let bc = b.map(|x| x.conj());
    let cross = [
        e[1] * bc[2] - e[2] * bc[1],
        e[2] * bc[0] - e[0] * bc[2],
        e[0] * bc[1] - e[1] * bc[0],
    ];
    cross.map(|x| c / (8.0 * std::f64::consts::PI) * x.re)
}

/// Voxels whose centres lie in the closed ball.
fn ball_voxels(grid: &Grid3, center: Vec3, radius: f64) -> Vec<usize> {
    (0..grid.len())
        .filter(|&v| {
            let d = sub(grid.center(v), center);
            dot(d, d) <= radius * radius
        })
        .collect()
}

/// `mu_a(nu) ~ (|B| / S^-) ∫_B Re F mu(nu, x) dx`, `|B|` the voxelized ball volume.
pub fn absorption_estimate(
    m: &SusceptibilityField,
    center: Vec3,
    radius: f64,
    incident_flux: f64,
    nu: f64,
) -> Result<f64> {
    if !(incident_flux > 0.0) {
        return Err(Error::precondition(format!(
            "incident flux must be positive, got {incident_flux}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::precondition("ball radius must be positive"));
    }
    let grid = m.grid();
    let (lo, hi) = grid
        .interior_box(0)
        .ok_or_else(|| Error::precondition("grid has no interior"))?;
    if (0..3).any(|a| center[a] - radius < lo[a] || center[a] + radius > hi[a]) {
        return Err(Error::precondition("ball must lie within the grid"));
    }
    let mu = m
        .at_frequency(nu)
        .ok_or_else(|| Error::precondition(format!("nu = {nu} is not on the medium lattice")))?;
    let cells = ball_voxels(grid, center, radius);
    let cell = grid.voxel_volume();
    let volume = cells.len() as f64 * cell;
    let integral: f64 = cells.iter().map(|&v| mu[v].re).sum::<f64>() * cell;
    Ok(volume / incident_flux * integral)
}

/// Outward flux of a vector field through the boundary of the voxelized ball:
/// every face between a voxel inside and one outside contributes `h^2` times
/// the normal component of the average of the two voxel values. The staircase
/// surface carries an O(h) area error.
pub fn surface_flux(grid: &Grid3, field: &[Vec3], center: Vec3, radius: f64) -> Result<f64> {
    if field.len() != grid.len() {
        return Err(Error::precondition("vector field does not match the grid"));
    }
    let inside: Vec<bool> = (0..grid.len())
        .map(|v| {
            let d = sub(grid.center(v), center);
            dot(d, d) <= radius * radius
        })
        .collect();
    let area = grid.spacing * grid.spacing;
    let mut flux = 0.0;
    for v in (0..grid.len()).filter(|&v| inside[v]) {
        let idx = grid.coords(v);
        for axis in 0..3 {
            for dir in [-1i64, 1] {
                let j = idx[axis] as i64 + dir;
                if j < 0 || j >= grid.dims[axis] as i64 {
                    return Err(Error::precondition("ball touches the grid boundary"));
                }
                let mut q = idx;
                q[axis] = j as usize;
                let w = grid.index(q[0], q[1], q[2]);
                if !inside[w] {
                    let s = 0.5 * (field[v][axis] + field[w][axis]);
                    flux += dir as f64 * s * area;
                }
            }
        }
    }
    Ok(flux)
}
