//! Time-domain retarded-potential evaluation of the field radiated by a
//! prescribed current, independent of the frequency-domain kernel.

use num_complex::Complex64;
use rayon::prelude::*;

use super::green::dyadic_kernel;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_kronrod, gauss_legendre};
use crate::vec3::{add, dot, norm, scale, sub, CVec3, Vec3};

/// Closed-form current density with its continuity-consistent charge.
pub trait CurrentSource: Sync {
    /// `grad rho + c^-2 d_t j` at `(t, y)`.
    fn source_term(&self, t: f64, y: Vec3, c: f64) -> Vec3;
    /// `F_t j(omega, y)`.
    fn current_spectrum(&self, omega: f64, y: Vec3) -> CVec3;
    /// Centre and radius of a ball outside which the source is negligible.
    fn spatial_support(&self) -> (Vec3, f64);
    /// Time interval outside which the source is negligible.
    fn active_interval(&self) -> (f64, f64);
}

/// `j(t, y) = J0 G'(t) b(y) n` with Gaussian `G` and `b`; the charge
/// `rho = -J0 G(t) n.grad b` satisfies continuity with zero initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBlobCurrent {
    pub amplitude: f64,
    pub center: Vec3,
    pub direction: Vec3,
    pub spatial_width: f64,
    pub temporal_center: f64,
    pub temporal_width: f64,
}

/// Number of widths beyond which the Gaussians are treated as zero.
const GAUSS_CUTOFF: f64 = 6.0;

impl GaussianBlobCurrent {
    fn blob(&self, y: Vec3) -> (f64, Vec3) {
        let d = sub(y, self.center);
        let s2 = self.spatial_width * self.spatial_width;
        ((-dot(d, d) / (2.0 * s2)).exp(), d)
    }

    fn temporal(&self, t: f64) -> (f64, f64) {
        let s2 = self.temporal_width * self.temporal_width;
        let u = t - self.temporal_center;
        let g = (-u * u / (2.0 * s2)).exp();
        (g, (u * u / (s2 * s2) - 1.0 / s2) * g)
    }
}

impl CurrentSource for GaussianBlobCurrent {
    fn source_term(&self, t: f64, y: Vec3, c: f64) -> Vec3 {
        let (g, g2) = self.temporal(t);
        let (b, d) = self.blob(y);
        if g == 0.0 || b == 0.0 {
            return [0.0; 3];
        }
        let s2 = self.spatial_width * self.spatial_width;
        let n = self.direction;
        let nd = dot(n, d);
        let j0 = self.amplitude;
        // grad(n.grad b) = b (-n / s2 + (n.d) d / s2^2)
        [0, 1, 2].map(|a| {
            let hess = b * (-n[a] / s2 + nd * d[a] / (s2 * s2));
            -j0 * g * hess + j0 * g2 * b * n[a] / (c * c)
        })
    }

    fn current_spectrum(&self, omega: f64, y: Vec3) -> CVec3 {
        let st = self.temporal_width;
        let fg = Complex64::from_polar(
            st * (2.0 * std::f64::consts::PI).sqrt() * (-st * st * omega * omega / 2.0).exp(),
            omega * self.temporal_center,
        );
        let (b, _) = self.blob(y);
        let v = Complex64::new(0.0, -omega) * fg * (self.amplitude * b);
        self.direction.map(|n| v * n)
    }

    fn spatial_support(&self) -> (Vec3, f64) {
        (self.center, GAUSS_CUTOFF * self.spatial_width)
    }

    fn active_interval(&self) -> (f64, f64) {
        let r = GAUSS_CUTOFF * self.temporal_width;
        (self.temporal_center - r, self.temporal_center + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub speed_of_light: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Gauss–Legendre nodes in `cos(polar angle)` over the visible cap.
    pub polar_nodes: usize,
    /// Trapezoid nodes in azimuth.
    pub azimuth_nodes: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            speed_of_light: crate::DEFAULT_SPEED_OF_LIGHT,
            abs_tol: 1e-13,
            rel_tol: 1e-9,
            max_intervals: 200,
            polar_nodes: 64,
            azimuth_nodes: 16,
        }
    }
}

/// Orthonormal frame whose third axis is `axis`.
fn frame(axis: Vec3) -> [Vec3; 3] {
    let w = scale(axis, 1.0 / norm(axis));
    let helper = if w[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let u = crate::vec3::normalized(crate::vec3::cross(helper, w));
    let v = crate::vec3::cross(w, u);
    [u, v, w]
}

/// `e(t, x) = e0(t, x) - ∫_{B_ct(x)} |y - x|^-1 [grad rho + c^-2 d_t j](t - |y - x|/c, y) dy`.
///
/// Spherical shells around `x`: adaptive Gauss–Kronrod in the radius, and on
/// each shell Gauss–Legendre in the polar cosine over the cap that meets the
/// source support, trapezoid in azimuth.
pub fn retarded_field_oracle<S: CurrentSource + ?Sized>(
    source: &S,
    incident: &dyn Fn(f64, Vec3) -> Vec3,
    t: f64,
    x: Vec3,
    opts: &OracleOptions,
) -> Result<Vec3> {
    let c = opts.speed_of_light;
    if !(c > 0.0) {
        return Err(Error::precondition("speed of light must be positive"));
    }
    let e0 = incident(t, x);
    let (center, support) = source.spatial_support();
    let (t_on, t_off) = source.active_interval();
    let offset = sub(center, x);
    let dist = norm(offset);
    // Shells that can meet both the spatial support and the active window.
    let r_lo = (dist - support).max(0.0).max(c * (t - t_off));
    let r_hi = (dist + support).min(c * (t - t_on)).min(c * t.max(0.0));
    if r_hi <= r_lo {
        return Ok(e0);
    }
    let axes = if dist > 0.0 {
        frame(offset)
    } else {
        frame([0.0, 0.0, 1.0])
    };
    let (gl_x, gl_w) = gauss_legendre(opts.polar_nodes);
    let n_phi = opts.azimuth_nodes.max(1);
    let shell = |r: f64| -> [f64; 3] {
        if r <= 0.0 {
            return [0.0; 3];
        }
        // Polar cosines where |r w - offset| <= support.
        let u_min = if dist > 0.0 {
            ((r * r + dist * dist - support * support) / (2.0 * r * dist)).max(-1.0)
        } else {
            -1.0
        };
        if u_min >= 1.0 {
            return [0.0; 3];
        }
        let half = 0.5 * (1.0 - u_min);
        let mid = 0.5 * (1.0 + u_min);
        let tr = t - r / c;
        let mut acc = [0.0; 3];
        for (xi, wi) in gl_x.iter().zip(&gl_w) {
            let u = mid + half * xi;
            let s = (1.0 - u * u).max(0.0).sqrt();
            for p in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * p as f64 / n_phi as f64;
                let dir = [0, 1, 2].map(|a| {
                    s * phi.cos() * axes[0][a] + s * phi.sin() * axes[1][a] + u * axes[2][a]
                });
                let f = source.source_term(tr, add(x, scale(dir, r)), c);
                for a in 0..3 {
                    acc[a] += wi * f[a];
                }
            }
        }
        let w = half * 2.0 * std::f64::consts::PI / n_phi as f64 * r;
        acc.map(|v| v * w)
    };
    let integral = adaptive_kronrod(
        shell,
        r_lo,
        r_hi,
        opts.abs_tol,
        opts.rel_tol,
        opts.max_intervals,
    )?;
    Ok([0, 1, 2].map(|a| e0[a] - integral[a]))
}

/// Trapezoid approximation of `∫ e(t, x) exp(i omega t) dt` for the oracle
/// field of a source started from rest (`e0 = 0`), over the arrival window.
pub fn retarded_field_spectrum<S: CurrentSource + ?Sized>(
    source: &S,
    omega: f64,
    x: Vec3,
    dt: f64,
    opts: &OracleOptions,
) -> Result<CVec3> {
    let c = opts.speed_of_light;
    let (center, support) = source.spatial_support();
    let (t_on, t_off) = source.active_interval();
    let dist = norm(sub(center, x));
    let start = t_on + (dist - support).max(0.0) / c;
    let stop = t_off + (dist + support) / c;
    let steps = ((stop - start) / dt).ceil() as usize;
    let zero = |_: f64, _: Vec3| [0.0; 3];
    let samples: Vec<Vec3> = (0..=steps)
        .into_par_iter()
        .map(|n| retarded_field_oracle(source, &zero, start + n as f64 * dt, x, opts))
        .collect::<Result<_>>()?;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (n, e) in samples.iter().enumerate() {
        let w = if n == 0 || n == steps { 0.5 * dt } else { dt };
        let phase = Complex64::from_polar(w, omega * (start + n as f64 * dt));
        for a in 0..3 {
            acc[a] += phase * e[a];
        }
    }
    Ok(acc)
}

/// `(grad div + k^2) ∫ i exp(i k |x - y|) / (omega |x - y|) F j(omega, y) dy`
/// for `x` outside the source, by midpoint quadrature on a cube of
/// `points_per_axis^3` cells covering the source support.
pub fn frequency_domain_field<S: CurrentSource + ?Sized>(
    source: &S,
    omega: f64,
    x: Vec3,
    c: f64,
    points_per_axis: usize,
) -> Result<CVec3> {
    let (center, support) = source.spatial_support();
    if norm(sub(x, center)) <= support {
        return Err(Error::precondition(
            "observation point must lie outside the source support",
        ));
    }
    if omega == 0.0 || points_per_axis == 0 {
        return Err(Error::precondition(
            "need omega != 0 and at least one cell per axis",
        ));
    }
    let h = 2.0 * support / points_per_axis as f64;
    let n = points_per_axis;
    let partial: Vec<CVec3> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for j in 0..n {
                for k in 0..n {
                    let y = [i, j, k].map(|q| q as f64);
                    let y = [0, 1, 2].map(|a| center[a] - support + h * (y[a] + 0.5));
                    let fj = source.current_spectrum(omega, y);
                    let g = dyadic_kernel(omega, c, sub(x, y));
                    for a in 0..3 {
                        for b in 0..3 {
                            acc[a] += g[a][b] * fj[b];
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let cell = h * h * h;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for p in partial {
        for a in 0..3 {
            out[a] += p[a] * cell;
        }
    }
    Ok(out)
}
