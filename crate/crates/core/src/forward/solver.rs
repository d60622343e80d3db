use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::far_field::incident_plane_wave;
use super::green::{equivalent_radius, scalar_kernel, self_cell_integral};
use crate::error::{Error, Result};
use crate::linalg::{gmres, norm2, Fft3};
use crate::medium::{Grid3, PulseSpectrum, SusceptibilityField};
use crate::vec3::CVec3;

/// `F_t E(omega, .)` sampled at voxel centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVectorField {
    pub grid: Grid3,
    pub frequency: f64,
    pub values: Vec<CVec3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Neumann series, switching to GMRES when it stalls or diverges.
    Auto,
    Neumann,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub method: SolverMethod,
    pub speed_of_light: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 400,
            restart: 40,
            method: SolverMethod::Auto,
            speed_of_light: crate::DEFAULT_SPEED_OF_LIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub method: SolverMethod,
    pub iterations: usize,
    /// `|E - E0 - T E| / |E0|`.
    pub residual: f64,
}

/// Discretized scattering operator `T E = (grad div + k^2) ∫ kernel * (mu E)`.
///
/// Midpoint quadrature on voxel centres, the self voxel replaced by the
/// kernel integral over the volume-equivalent ball. The convolution runs on a
/// grid padded to twice the size per axis; `grad div` acts in Fourier space.
pub struct ScatteringOperator {
    grid: Grid3,
    padded: [usize; 3],
    fft: Fft3,
    kernel_hat: Vec<Complex64>,
    q_first: [Vec<f64>; 3],
    q_square: [Vec<f64>; 3],
    k2: f64,
    mu: Vec<Complex64>,
}

impl ScatteringOperator {
    pub fn new(m: &SusceptibilityField, omega: f64, c: f64) -> Result<Self> {
        if omega == 0.0 {
            return Err(Error::precondition(
                "omega = 0 is excluded: the kernel carries a 1/omega factor",
            ));
        }
        let mu = m.at_frequency(omega).ok_or_else(|| {
            Error::precondition(format!("omega = {omega} is not on the medium lattice"))
        })?;
        let grid = m.grid().clone();
        let h = grid.spacing;
        let padded = grid.dims.map(|n| 2 * n);
        let fft = Fft3::new(padded);
        let offset = |n: usize, p: usize, dim: usize| -> Option<i64> {
            let d = if n < dim {
                n as i64
            } else {
                n as i64 - p as i64
            };
            (d.unsigned_abs() < dim as u64).then_some(d)
        };
        let cell = h.powi(3);
        let self_term = self_cell_integral(omega, c, equivalent_radius(h));
        let mut kernel = vec![Complex64::new(0.0, 0.0); fft.len()];
        kernel.par_iter_mut().enumerate().for_each(|(idx, slot)| {
            let n2 = idx % padded[2];
            let n1 = (idx / padded[2]) % padded[1];
            let n0 = idx / (padded[1] * padded[2]);
            let (Some(d0), Some(d1), Some(d2)) = (
                offset(n0, padded[0], grid.dims[0]),
                offset(n1, padded[1], grid.dims[1]),
                offset(n2, padded[2], grid.dims[2]),
            ) else {
                return;
            };
            *slot = if d0 == 0 && d1 == 0 && d2 == 0 {
                self_term
            } else {
                let r = h * ((d0 * d0 + d1 * d1 + d2 * d2) as f64).sqrt();
                scalar_kernel(omega, c, r) * cell
            };
        });
        fft.forward(&mut kernel);
        let wavenumbers = |p: usize, nyquist_zero: bool| -> Vec<f64> {
            (0..p)
                .map(|n| {
                    let s = if n < p / 2 {
                        n as f64
                    } else {
                        n as f64 - p as f64
                    };
                    if nyquist_zero && 2 * n == p {
                        0.0
                    } else {
                        2.0 * std::f64::consts::PI * s / (p as f64 * h)
                    }
                })
                .collect()
        };
        let q_first = padded.map(|p| wavenumbers(p, true));
        let q_square = padded.map(|p| wavenumbers(p, false).into_iter().map(|q| q * q).collect());
        Ok(Self {
            grid,
            padded,
            fft,
            kernel_hat: kernel,
            q_first,
            q_square,
            k2: (omega / c).powi(2),
            mu,
        })
    }

    pub fn apply(&self, e: &[CVec3]) -> Vec<CVec3> {
        let n = self.grid.len();
        let [p0, p1, p2] = self.padded;
        let mut comps: [Vec<Complex64>; 3] = [0, 1, 2].map(|a| {
            let mut buf = vec![Complex64::new(0.0, 0.0); p0 * p1 * p2];
            for v in 0..n {
                let mu = self.mu[v];
                if mu != Complex64::new(0.0, 0.0) {
                    let [i, j, k] = self.grid.coords(v);
                    buf[(i * p1 + j) * p2 + k] = mu * e[v][a];
                }
            }
            buf
        });
        for c in comps.iter_mut() {
            self.fft.forward(c);
        }
        let total = (p0 * p1 * p2) as f64;
        let [c0, c1, c2] = &mut comps;
        c0.par_iter_mut()
            .zip(c1.par_iter_mut())
            .zip(c2.par_iter_mut())
            .enumerate()
            .for_each(|(idx, ((a0, a1), a2))| {
                let n2 = idx % p2;
                let n1 = (idx / p2) % p1;
                let n0 = idx / (p1 * p2);
                let qf = [
                    self.q_first[0][n0],
                    self.q_first[1][n1],
                    self.q_first[2][n2],
                ];
                let qs = [
                    self.q_square[0][n0],
                    self.q_square[1][n1],
                    self.q_square[2][n2],
                ];
                let j = [*a0, *a1, *a2];
                let kh = self.kernel_hat[idx] / total;
                let mut out = [Complex64::new(0.0, 0.0); 3];
                for a in 0..3 {
                    let mut s = j[a] * (self.k2 - qs[a]);
                    for b in 0..3 {
                        if b != a {
                            s -= j[b] * (qf[a] * qf[b]);
                        }
                    }
                    out[a] = s * kh;
                }
                *a0 = out[0];
                *a1 = out[1];
                *a2 = out[2];
            });
        for c in comps.iter_mut() {
            self.fft.inverse(c);
        }
        (0..n)
            .map(|v| {
                let [i, j, k] = self.grid.coords(v);
                let idx = (i * p1 + j) * p2 + k;
                [comps[0][idx], comps[1][idx], comps[2][idx]]
            })
            .collect()
    }
}

fn flatten(v: &[CVec3]) -> Vec<Complex64> {
    v.iter().flat_map(|e| e.iter().copied()).collect()
}

fn unflatten(v: &[Complex64]) -> Vec<CVec3> {
    v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Solves the discretized Lippmann–Schwinger equation at `omega`.
///
/// `omega` may be negative when the lattice carries the conjugate extension.
pub fn lippmann_schwinger_solve(
    m: &SusceptibilityField,
    pulse: &PulseSpectrum,
    omega: f64,
    opts: &SolverOptions,
) -> Result<(ComplexVectorField, SolveReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::precondition("solver tolerance must be positive"));
    }
    let c = opts.speed_of_light;
    let op = ScatteringOperator::new(m, omega, c)?;
    let grid = m.grid().clone();
    let e0: Vec<CVec3> = (0..grid.len())
        .map(|v| incident_plane_wave(pulse, omega, grid.center(v), c))
        .collect();
    let e0_flat = flatten(&e0);
    let e0_norm = norm2(&e0_flat);
    let done = |values: Vec<CVec3>, method, iterations, residual| {
        Ok((
            ComplexVectorField {
                grid: grid.clone(),
                frequency: omega,
                values,
            },
            SolveReport {
                method,
                iterations,
                residual,
            },
        ))
    };
    if e0_norm == 0.0 || op.mu.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return done(e0, SolverMethod::Neumann, 0, 0.0);
    }

    let mut last_residual = f64::INFINITY;
    if opts.method != SolverMethod::Gmres {
        let mut e = e0.clone();
        let mut growth = 0;
        for it in 0..opts.max_iter {
            let te = op.apply(&e);
            let next: Vec<CVec3> = e0
                .iter()
                .zip(&te)
                .map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
                .collect();
            let diff: f64 = next
                .iter()
                .zip(&e)
                .map(|(a, b)| (0..3).map(|i| (a[i] - b[i]).norm_sqr()).sum::<f64>())
                .sum::<f64>()
                .sqrt();
            let residual = diff / e0_norm;
            e = next;
            if residual <= opts.tol {
                // `e` now carries residual at most |T| * residual.
                return done(e, SolverMethod::Neumann, it + 1, residual);
            }
            growth = if residual > last_residual {
                growth + 1
            } else {
                0
            };
            last_residual = residual;
            if growth >= 3 {
                break;
            }
        }
        if opts.method == SolverMethod::Neumann {
            return Err(Error::Convergence {
                solver: "neumann series",
                iterations: opts.max_iter,
                residual: last_residual,
            });
        }
        log::debug!("neumann series stalled at residual {last_residual:.3e}; switching to gmres");
    }

    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let xv = unflatten(x);
        let tx = op.apply(&xv);
        x.iter().zip(flatten(&tx)).map(|(a, b)| a - b).collect()
    };
    let mut x = e0_flat.clone();
    let report = gmres(
        apply,
        &e0_flat,
        &mut x,
        opts.tol,
        opts.restart,
        opts.max_iter,
    )?;
    done(
        unflatten(&x),
        SolverMethod::Gmres,
        report.iterations,
        report.residual,
    )
}
