//! Complex linear-algebra helpers: a three-dimensional FFT and restarted GMRES.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// In-place 3-D FFT on row-major `[n0][n1][n2]` arrays.
pub struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims,
            forward: dims.map(|n| planner.plan_fft_forward(n)),
            inverse: dims.map(|n| planner.plan_fft_inverse(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_n x_n exp(-2 pi i k.n / N)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse; divide by `len()` to undo [`Fft3::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n0, n1, n2] = self.dims;
        assert_eq!(data.len(), n0 * n1 * n2);
        // Axis 2 is contiguous.
        data.par_chunks_mut(n2)
            .for_each(|line| plans[2].process(line));
        // Axis 1: gather strided lines within each slab.
        data.par_chunks_mut(n1 * n2).for_each(|slab| {
            let mut line = vec![Complex64::new(0.0, 0.0); n1];
            for k in 0..n2 {
                for j in 0..n1 {
                    line[j] = slab[j * n2 + k];
                }
                plans[1].process(&mut line);
                for j in 0..n1 {
                    slab[j * n2 + k] = line[j];
                }
            }
        });
        // Axis 0: process columns grouped by the (j, k) pair.
        let stride = n1 * n2;
        let columns: Vec<Vec<Complex64>> = (0..stride)
            .into_par_iter()
            .map(|c| {
                let mut line: Vec<Complex64> = (0..n0).map(|i| data[i * stride + c]).collect();
                plans[0].process(&mut line);
                line
            })
            .collect();
        for (c, line) in columns.into_iter().enumerate() {
            for (i, v) in line.into_iter().enumerate() {
                data[i * stride + c] = v;
            }
        }
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `sum conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct GmresReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Restarted GMRES for `A x = b`, starting from `x`. The returned residual is
/// relative to `|b|`.
pub fn gmres(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresReport> {
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(GmresReport {
            iterations: 0,
            residual: 0.0,
        });
    }
    let m = restart.max(1);
    let mut total = 0;
    while total < max_iter {
        let ax = apply(x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(GmresReport {
                iterations: total,
                residual: rel,
            });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            let mut w = apply(&basis[j]);
            for (i, q) in basis.iter().enumerate() {
                let hij = inner(q, &w);
                h[i][j] = hij;
                w.iter_mut().zip(q).for_each(|(w, q)| *w -= hij * q);
            }
            let wn = norm2(&w);
            h[j + 1][j] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (a, bb) = (h[j][j], h[j + 1][j]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if d == 0.0 {
                used = j;
                break;
            }
            cs[j] = a / d;
            sn[j] = bb / d;
            h[j][j] = Complex64::new(d, 0.0);
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            used = j + 1;
            let rel = g[j + 1].norm() / bnorm;
            if rel <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![Complex64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let s: Complex64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            x.iter_mut().zip(q).for_each(|(x, q)| *x += yi * q);
        }
    }
    let ax = apply(x);
    let res = norm2(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / bnorm;
    if res <= tol {
        return Ok(GmresReport {
            iterations: total,
            residual: res,
        });
    }
    Err(Error::Convergence {
        solver: "gmres",
        iterations: total,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fft3_matches_direct_dft() {
        let dims = [3, 4, 5];
        let n: usize = dims.iter().product();
        let data: Vec<Complex64> = (0..n)
            .map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut out = data.clone();
        Fft3::new(dims).forward(&mut out);
        let idx = |a: usize, b: usize, d: usize| (a * dims[1] + b) * dims[2] + d;
        for &(k0, k1, k2) in &[(0, 0, 0), (1, 2, 3), (2, 3, 4)] {
            let mut acc = c(0.0, 0.0);
            for a in 0..dims[0] {
                for b in 0..dims[1] {
                    for d in 0..dims[2] {
                        let ph = -2.0 * std::f64::consts::PI * (k0 * a) as f64 / dims[0] as f64
                            - 2.0 * std::f64::consts::PI * (k1 * b) as f64 / dims[1] as f64
                            - 2.0 * std::f64::consts::PI * (k2 * d) as f64 / dims[2] as f64;
                        acc += data[idx(a, b, d)] * Complex64::from_polar(1.0, ph);
                    }
                }
            }
            assert!((acc - out[idx(k0, k1, k2)]).norm() < 1e-12);
        }
        Fft3::new(dims).inverse(&mut out);
        for (a, b) in out.iter().zip(&data) {
            assert!((a / n as f64 - b).norm() < 1e-13);
        }
    }

    #[test]
    fn gmres_solves_nonnormal_system() {
        let n = 30;
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    let mut v = x[i] * c(2.0, 0.3);
                    if i + 1 < n {
                        v += x[i + 1] * c(0.5, -0.2);
                    }
                    if i >= 2 {
                        v += x[i - 2] * c(-0.3, 0.1);
                    }
                    v
                })
                .collect()
        };
        let truth: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0 - i as f64 * 0.5)).collect();
        let b = apply(&truth);
        let mut x = vec![c(0.0, 0.0); n];
        let rep = gmres(apply, &b, &mut x, 1e-12, 8, 500).unwrap();
        assert!(rep.residual <= 1e-12);
        for (a, t) in x.iter().zip(&truth) {
            assert!((a - t).norm() < 1e-9);
        }
    }
}
