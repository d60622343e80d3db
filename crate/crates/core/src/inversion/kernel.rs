use num_complex::Complex64;
use rayon::prelude::*;

use super::cone::ConeSampling;
use super::hilbert::{half_lattice_step, kramers_kronig_half};
use crate::error::{Error, Result};
use crate::medium::Grid3;
use crate::pat::PatRecord;
use crate::vec3::{dot, Vec3};

/// `g(nu) + i KK[g](nu)` for every voxel of a `nu`-major table on the
/// half lattice `nu_i = i step`; all-zero voxels are skipped.
pub(crate) fn analytic_bracket(freqs: &[f64], n_vox: usize, values: &[f64]) -> Result<Vec<Complex64>> {
    let step = half_lattice_step(freqs)?;
    let n_nu = freqs.len();
    let columns: Vec<Option<Vec<Complex64>>> = (0..n_vox)
        .into_par_iter()
        .map(|v| {
            let g: Vec<f64> = (0..n_nu).map(|i| values[i * n_vox + v]).collect();
            if g.iter().all(|x| *x == 0.0) {
                return Ok(None);
            }
            let im = kramers_kronig_half(&g, step)?;
            Ok(Some(g.iter().zip(im).map(|(&re, im)| Complex64::new(re, im)).collect()))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Complex64::new(0.0, 0.0); n_nu * n_vox];
    for (v, col) in columns.into_iter().enumerate() {
        if let Some(col) = col {
            for (i, b) in col.into_iter().enumerate() {
                out[i * n_vox + v] = b;
            }
        }
    }
    Ok(out)
}

/// `K[p~](nu, theta; y) = (p~(nu, y) - (i/pi) PV ∫ p~(nu', y)/(nu' - nu) d nu') exp(-i (nu/c) <theta + e3, y>)`,
/// with the principal-value bracket precomputed for every voxel.
#[derive(Debug, Clone)]
pub struct KernelK {
    grid: Grid3,
    freqs: Vec<f64>,
    bracket: Vec<Complex64>,
}

impl KernelK {
    /// The record frequencies must be `nu_i = i step`, `i = 1..n`, wide
    /// enough for the transform to see the decay of `p~`.
    pub fn new(p: &PatRecord) -> Result<Self> {
        Ok(Self {
            grid: p.grid.clone(),
            freqs: p.freqs.clone(),
            bracket: analytic_bracket(&p.freqs, p.grid.len(), &p.values)?,
        })
    }

    /// `p~ + i KK[p~]` at frequency index `i` and voxel `v`.
    pub fn bracket(&self, i: usize, v: usize) -> Complex64 {
        self.bracket[i * self.grid.len() + v]
    }

    pub fn value(&self, i: usize, theta: Vec3, v: usize, c: f64) -> Complex64 {
        let nu = self.freqs[i];
        let y = self.grid.center(v);
        let k = [nu * theta[0] / c, nu * theta[1] / c, nu * (theta[2] + 1.0) / c];
        self.bracket(i, v) * Complex64::from_polar(1.0, -dot(k, y))
    }

    /// `∫ K[p~](nu, theta; y) gamma_inv(y) dy` by midpoint quadrature per cone sample.
    pub fn apply(&self, gamma_inv: &[f64], sampling: &ConeSampling) -> Result<Vec<Complex64>> {
        let n = self.grid.len();
        if gamma_inv.len() != n {
            return Err(Error::precondition("1/gamma samples do not match the grid"));
        }
        check_frequencies(&self.freqs, sampling)?;
        let cell = self.grid.voxel_volume();
        let active: Vec<(usize, Vec3)> = (0..n)
            .filter(|&v| gamma_inv[v] != 0.0)
            .map(|v| (v, self.grid.center(v)))
            .collect();
        Ok(sampling
            .samples()
            .par_iter()
            .map(|s| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(v, y) in &active {
                    let b = self.bracket(s.nu_index, v);
                    if b != Complex64::new(0.0, 0.0) {
                        acc += b * gamma_inv[v] * Complex64::from_polar(1.0, -dot(s.k, y));
                    }
                }
                acc * cell
            })
            .collect())
    }
}

pub(crate) fn check_frequencies(freqs: &[f64], sampling: &ConeSampling) -> Result<()> {
    let ok = sampling.freqs().len() == freqs.len()
        && sampling
            .freqs()
            .iter()
            .zip(freqs)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::precondition(
            "cone sampling and PAT record use different frequency lists",
        ))
    }
}

/// Single evaluation of [`KernelK::value`].
pub fn kernel_k(p: &PatRecord, nu_index: usize, theta: Vec3, voxel: usize, c: f64) -> Result<Complex64> {
    if nu_index >= p.freqs.len() || voxel >= p.grid.len() {
        return Err(Error::precondition("frequency or voxel index out of range"));
    }
    Ok(KernelK::new(p)?.value(nu_index, theta, voxel, c))
}

/// `∫ K[p~](nu, theta; y) / gamma(y) dy` for every cone sample.
pub fn apply_forward(p: &PatRecord, gamma_inv: &[f64], sampling: &ConeSampling) -> Result<Vec<Complex64>> {
    KernelK::new(p)?.apply(gamma_inv, sampling)
}
