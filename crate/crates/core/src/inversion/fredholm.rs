use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::ConeSampling;
use super::kernel::check_frequencies;
use super::split::MaterialSplit;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::vec3::{dot, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub power_iterations: usize,
    /// Largest system solved densely when the Neumann series stalls.
    pub dense_limit: usize,
    /// `|A(nu)|` below this fraction of its maximum counts as vanishing.
    pub profile_floor: f64,
}

impl Default for FredholmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1000,
            power_iterations: 60,
            dense_limit: 2048,
            profile_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FredholmMethod {
    Identity,
    Neumann,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmReport {
    pub method: FredholmMethod,
    pub iterations: usize,
    /// `|Gamma + T Gamma - h^| / |h^|` of the returned samples.
    pub residual: f64,
    /// Power-iteration estimate of the spectral norm of `T`.
    pub norm_estimate: f64,
}

/// Nyström discretization of the perturbation in
/// `Gamma(k) + (1/A(nu)) ∫ K^(k; kappa) Gamma(kappa) d kappa = h^(k)` on the cone:
///
/// `(T Gamma)_i = (1/A_i) h^3/(2 pi)^3 sum_y B(nu_i, y) exp(-i k_i.y) sum_j exp(i kappa_j.y) w_j Gamma_j`,
/// with `B = eps + i KK[eps]` from the residual of the material split.
pub struct FredholmOperator {
    /// `(1/A_i) h^3/(2 pi)^3 B(nu_i, y_s)` per frequency and support voxel.
    coupling: Vec<Complex64>,
    points: Vec<Vec3>,
    nu_index: Vec<usize>,
    k: Vec<Vec3>,
    weights: Vec<f64>,
}

impl FredholmOperator {
    pub fn new(split: &MaterialSplit, sampling: &ConeSampling, profile_floor: f64) -> Result<Self> {
        check_frequencies(&split.freqs, sampling)?;
        let peak = split.profile.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        for (a, nu) in split.profile.iter().zip(&split.freqs) {
            if !(a.norm() > profile_floor * peak) {
                return Err(Error::precondition(format!(
                    "material profile A(nu) vanishes at nu = {nu} (|A| = {:.3e})",
                    a.norm()
                )));
            }
        }
        let grid = &split.grid;
        let n_vox = grid.len();
        let bracket = &split.residual_bracket;
        let support: Vec<usize> = if bracket.is_empty() {
            Vec::new()
        } else {
            (0..n_vox)
                .filter(|&v| (0..split.freqs.len()).any(|i| bracket[i * n_vox + v] != Complex64::new(0.0, 0.0)))
                .collect()
        };
        let scale = grid.voxel_volume() / (2.0 * std::f64::consts::PI).powi(3);
        let mut coupling = Vec::with_capacity(split.freqs.len() * support.len());
        for (i, a) in split.profile.iter().enumerate() {
            for &v in &support {
                coupling.push(bracket[i * n_vox + v] * scale / a);
            }
        }
        Ok(Self {
            coupling,
            points: support.iter().map(|&v| grid.center(v)).collect(),
            nu_index: sampling.samples().iter().map(|s| s.nu_index).collect(),
            k: sampling.samples().iter().map(|s| s.k).collect(),
            weights: sampling.samples().iter().map(|s| s.weight).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// True when the residual of the split vanishes, so `T = 0`.
    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    fn coupling(&self, i: usize, s: usize) -> Complex64 {
        self.coupling[self.nu_index[i] * self.points.len() + s]
    }

    pub fn apply(&self, gamma: &[Complex64]) -> Vec<Complex64> {
        if self.is_zero() {
            return vec![Complex64::new(0.0, 0.0); gamma.len()];
        }
        let u: Vec<Complex64> = self
            .points
            .par_iter()
            .map(|&y| {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((k, w), g) in self.k.iter().zip(&self.weights).zip(gamma) {
                    acc += g * Complex64::from_polar(*w, dot(*k, y));
                }
                acc
            })
            .collect();
        (0..self.k.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, (y, us)) in self.points.iter().zip(&u).enumerate() {
                    acc += self.coupling(i, s) * us * Complex64::from_polar(1.0, -dot(self.k[i], *y));
                }
                acc
            })
            .collect()
    }

    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        if self.is_zero() {
            return vec![Complex64::new(0.0, 0.0); x.len()];
        }
        let v: Vec<Complex64> = (0..self.points.len())
            .into_par_iter()
            .map(|s| {
                let y = self.points[s];
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, xi) in x.iter().enumerate() {
                    acc += (self.coupling(i, s) * Complex64::from_polar(1.0, -dot(self.k[i], y))).conj()
                        * xi;
                }
                acc
            })
            .collect();
        (0..self.k.len())
            .into_par_iter()
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (y, vs) in self.points.iter().zip(&v) {
                    acc += vs * Complex64::from_polar(1.0, -dot(self.k[j], *y));
                }
                acc * self.weights[j]
            })
            .collect()
    }

    /// `sqrt` of the dominant eigenvalue of `T^H T` by power iteration from a
    /// fixed start vector.
    pub fn norm_estimate(&self, iterations: usize) -> f64 {
        if self.is_zero() || self.is_empty() {
            return 0.0;
        }
        let n = self.len();
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.1))
            .collect();
        let mut estimate = 0.0;
        for _ in 0..iterations.max(1) {
            let nx = norm2(&x);
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.apply_adjoint(&self.apply(&x));
            estimate = norm2(&y).sqrt();
            x = y;
        }
        estimate
    }

    fn dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let mut m = DMatrix::<Complex64>::identity(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e);
            for i in 0..n {
                m[(i, j)] += col[i];
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        m
    }
}

/// `h^(k) = h~(nu, theta) / A(nu)` for every cone sample.
pub fn normalize_data(
    h_tilde: &[Complex64],
    split: &MaterialSplit,
    sampling: &ConeSampling,
) -> Result<Vec<Complex64>> {
    check_frequencies(&split.freqs, sampling)?;
    if h_tilde.len() != sampling.len() {
        return Err(Error::precondition("OCT data and cone sampling differ in length"));
    }
    Ok(h_tilde
        .iter()
        .zip(sampling.samples())
        .map(|(h, s)| h / split.profile[s.nu_index])
        .collect())
}

fn relative_residual(op: &FredholmOperator, gamma: &[Complex64], data: &[Complex64]) -> f64 {
    let t = op.apply(gamma);
    let r: Vec<Complex64> = gamma
        .iter()
        .zip(&t)
        .zip(data)
        .map(|((g, t), d)| g + t - d)
        .collect();
    norm2(&r) / norm2(data).max(f64::MIN_POSITIVE)
}

/// Solves `(I + T) Gamma = h^` on the cone lattice.
pub fn fredholm_solve(
    data: &[Complex64],
    split: &MaterialSplit,
    sampling: &ConeSampling,
    opts: &FredholmOptions,
) -> Result<(Vec<Complex64>, FredholmReport)> {
    if data.len() != sampling.len() {
        return Err(Error::precondition("data and cone sampling differ in length"));
    }
    let op = FredholmOperator::new(split, sampling, opts.profile_floor)?;
    solve_with(&op, data, opts)
}

/// [`fredholm_solve`] for a prebuilt operator.
pub fn solve_with(
    op: &FredholmOperator,
    data: &[Complex64],
    opts: &FredholmOptions,
) -> Result<(Vec<Complex64>, FredholmReport)> {
    if op.is_zero() {
        return Ok((
            data.to_vec(),
            FredholmReport {
                method: FredholmMethod::Identity,
                iterations: 0,
                residual: 0.0,
                norm_estimate: 0.0,
            },
        ));
    }
    let norm = op.norm_estimate(opts.power_iterations);
    if norm >= 1.0 {
        return Err(Error::Contraction { norm });
    }
    let scale = norm2(data).max(f64::MIN_POSITIVE);
    let mut gamma = data.to_vec();
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        let t = op.apply(&gamma);
        let next: Vec<Complex64> = data.iter().zip(&t).map(|(d, t)| d - t).collect();
        let diff: Vec<Complex64> = next.iter().zip(&gamma).map(|(a, b)| a - b).collect();
        // |Gamma_n + T Gamma_n - h^| = |Gamma_n - Gamma_{n+1}|.
        residual = norm2(&diff) / scale;
        gamma = next;
        if residual <= opts.tol {
            let residual = relative_residual(op, &gamma, data);
            return Ok((
                gamma,
                FredholmReport {
                    method: FredholmMethod::Neumann,
                    iterations: it + 1,
                    residual,
                    norm_estimate: norm,
                },
            ));
        }
    }
    if op.len() > opts.dense_limit {
        return Err(Error::Convergence {
            solver: "fredholm neumann series",
            iterations: opts.max_iter,
            residual,
        });
    }
    log::debug!("neumann series stalled at {residual:.3e}; solving densely");
    let lu = op.dense().lu();
    let x = lu
        .solve(&DVector::from_column_slice(data))
        .ok_or_else(|| Error::precondition("dense Fredholm system is singular"))?;
    let gamma: Vec<Complex64> = x.iter().copied().collect();
    let residual = relative_residual(op, &gamma, data);
    Ok((
        gamma,
        FredholmReport {
            method: FredholmMethod::Dense,
            iterations: opts.max_iter,
            residual,
            norm_estimate: norm,
        },
    ))
}
