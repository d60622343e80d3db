use std::path::{Path, PathBuf};

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::ConeSampling;
use super::split::MaterialSplit;
use crate::error::{Error, Result};
use crate::medium::volume::{write_volume, ScalarKind, VolumeHeader};
use crate::medium::Grid3;
use crate::vec3::dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoverOptions {
    /// Tikhonov weight; `None` selects `1e-6` times the mean diagonal of the normal matrix.
    pub reg: Option<f64>,
    /// Voxels with `|q| <= threshold max |q|` are masked.
    pub threshold: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Supports up to this many voxels are solved by dense Cholesky, larger ones by CG.
    pub dense_limit: usize,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self {
            reg: None,
            threshold: 1e-3,
            cg_tol: 1e-12,
            cg_max_iter: 5000,
            dense_limit: 3000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GammaDiagnostics {
    /// `|F q - Gamma| / |Gamma|` over the cone samples.
    pub data_residual: f64,
    /// Fraction of the `beta` support kept after masking.
    pub mask_fraction: f64,
    pub support_voxels: usize,
    pub regularization: f64,
    pub cg_iterations: usize,
    pub fredholm_iterations: usize,
    pub fredholm_residual: f64,
    pub operator_norm: f64,
    pub dropped_frequencies: Vec<f64>,
    /// Coverage of the cone in `k_3`; the data never see lower spatial frequencies.
    pub k3_range: [f64; 2],
}

/// Reconstructed Grüneisen parameter; masked voxels hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub grid: Grid3,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    /// Least-squares estimate of `beta / gamma`.
    pub q: Vec<f64>,
    pub diagnostics: GammaDiagnostics,
}

impl GammaEstimate {
    pub fn save(&self, stem: &Path) -> Result<Vec<PathBuf>> {
        let header = VolumeHeader::new("gruneisen_estimate", ScalarKind::Real, 1, self.grid.clone());
        write_volume(stem, header, &self.values)
    }

    pub fn save_mask(&self, stem: &Path) -> Result<Vec<PathBuf>> {
        let header = VolumeHeader::new("gruneisen_mask", ScalarKind::Real, 1, self.grid.clone());
        let data: Vec<f64> = self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        write_volume(stem, header, &data)
    }
}

/// Estimates `q = beta / gamma` from `Gamma(k) = ∫ q(y) exp(-i <k, y>) dy` and
/// returns `gamma = beta / q`.
///
/// Unknowns live on the support of `beta`; the real normal equations
/// `(Re(F^H F) + reg I) q = Re(F^H Gamma)` are solved by dense
/// Cholesky up to `dense_limit` unknowns and by conjugate gradients beyond.
pub fn recover_gamma(
    gamma_hat: &[Complex64],
    split: &MaterialSplit,
    sampling: &ConeSampling,
    opts: &RecoverOptions,
) -> Result<GammaEstimate> {
    if gamma_hat.len() != sampling.len() {
        return Err(Error::precondition("Gamma samples and cone sampling differ in length"));
    }
    if let Some(r) = opts.reg {
        if !(r > 0.0) {
            return Err(Error::precondition(format!("regularization must be positive, got {r}")));
        }
    }
    let grid = &split.grid;
    let beta_peak = split.beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let support: Vec<usize> = (0..grid.len())
        .filter(|&v| beta_peak > 0.0 && split.beta[v].abs() > 1e-12 * beta_peak)
        .collect();
    if support.is_empty() {
        return Err(Error::precondition("beta vanishes everywhere: empty reconstruction mask"));
    }
    let cell = grid.voxel_volume();
    let n_s = sampling.len();
    let n_u = support.len();
    // phase[i * n_u + s] = h^3 exp(-i k_i . y_s)
    let phase: Vec<Complex64> = sampling
        .samples()
        .par_iter()
        .flat_map_iter(|smp| {
            support
                .iter()
                .map(move |&v| Complex64::from_polar(cell, -dot(smp.k, grid.center(v))))
        })
        .collect();
    let forward = |q: &[f64]| -> Vec<Complex64> {
        (0..n_s)
            .into_par_iter()
            .map(|i| {
                let row = &phase[i * n_u..(i + 1) * n_u];
                row.iter().zip(q).map(|(p, x)| p * x).sum()
            })
            .collect()
    };
    let adjoint_re = |x: &[Complex64]| -> Vec<f64> {
        (0..n_u)
            .into_par_iter()
            .map(|s| (0..n_s).map(|i| (phase[i * n_u + s].conj() * x[i]).re).sum())
            .collect()
    };
    let reg = opts.reg.unwrap_or(1e-6 * n_s as f64 * cell * cell);
    let rhs = adjoint_re(gamma_hat);
    let (q_support, cg_iterations) = if n_u <= opts.dense_limit {
        (dense_normal_solve(&phase, n_s, n_u, reg, &rhs)?, 0)
    } else {
        let normal = |q: &[f64]| -> Vec<f64> {
            let fq = forward(q);
            adjoint_re(&fq)
                .iter()
                .zip(q)
                .map(|(a, x)| a + reg * x)
                .collect()
        };
        conjugate_gradient(normal, &rhs, opts.cg_tol, opts.cg_max_iter)?
    };

    let fit = forward(&q_support);
    let num: f64 = fit.iter().zip(gamma_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = gamma_hat.iter().map(|b| b.norm_sqr()).sum();
    let data_residual = (num / den.max(f64::MIN_POSITIVE)).sqrt();

    let q_peak = q_support.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let mut q = vec![0.0; grid.len()];
    let mut values = vec![0.0; grid.len()];
    let mut mask = vec![false; grid.len()];
    for (&v, &qs) in support.iter().zip(&q_support) {
        q[v] = qs;
        let b = split.beta[v];
        if qs.abs() > opts.threshold * q_peak && qs * b > 0.0 {
            mask[v] = true;
            values[v] = b / qs;
        }
    }
    let kept = mask.iter().filter(|m| **m).count();
    if kept == 0 {
        return Err(Error::precondition("reconstruction mask is empty"));
    }
    let k3 = sampling
        .samples()
        .iter()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |r, s| [r[0].min(s.k[2]), r[1].max(s.k[2])]);
    Ok(GammaEstimate {
        grid: grid.clone(),
        values,
        mask,
        q,
        diagnostics: GammaDiagnostics {
            data_residual,
            mask_fraction: kept as f64 / n_u as f64,
            support_voxels: n_u,
            regularization: reg,
            cg_iterations,
            k3_range: k3,
            ..GammaDiagnostics::default()
        },
    })
}

/// `(Re(F^H F) + reg I) q = rhs` by Cholesky, with `F` given row-major.
fn dense_normal_solve(
    phase: &[Complex64],
    n_s: usize,
    n_u: usize,
    reg: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = (0..n_u)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0.0; n_u];
            for i in 0..n_s {
                let r = &phase[i * n_u..(i + 1) * n_u];
                let pa = r[a].conj();
                for (b, out) in row.iter_mut().enumerate().skip(a) {
                    *out += (pa * r[b]).re;
                }
            }
            row
        })
        .collect();
    let mut m = DMatrix::<f64>::zeros(n_u, n_u);
    for (a, row) in rows.iter().enumerate() {
        for b in a..n_u {
            m[(a, b)] = row[b];
            m[(b, a)] = row[b];
        }
        m[(a, a)] += reg;
    }
    let chol = Cholesky::new(m)
        .ok_or_else(|| Error::precondition("normal matrix is not positive definite"))?;
    Ok(chol.solve(&DVector::from_column_slice(rhs)).iter().copied().collect())
}

/// Conjugate gradients for a symmetric positive definite operator.
fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bn {
            return Ok((x, it));
        }
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let step = rr / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let next: f64 = r.iter().map(|v| v * v).sum();
        let ratio = next / rr;
        rr = next;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
    }
    if rr.sqrt() <= tol * bn {
        return Ok((x, max_iter));
    }
    Err(Error::Convergence {
        solver: "conjugate gradients",
        iterations: max_iter,
        residual: rr.sqrt() / bn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_spd_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect()
        };
        let b = [1.0, 2.0, 3.0];
        let (x, _) = conjugate_gradient(apply, &b, 1e-14, 50).unwrap();
        let ax = apply(&x);
        for i in 0..3 {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }
}
