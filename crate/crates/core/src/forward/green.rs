//! Free-space kernels in the normalization `i exp(i k r) / (omega r)`, `k = omega / c`.

use num_complex::Complex64;

use crate::vec3::{norm, Vec3};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn scalar_kernel(omega: f64, c: f64, r: f64) -> Complex64 {
    let k = omega / c;
    I * Complex64::from_polar(1.0, k * r) / (omega * r)
}

/// Radius of the ball with the volume of a cubic voxel of side `h`.
pub fn equivalent_radius(h: f64) -> f64 {
    h * (3.0 / (4.0 * std::f64::consts::PI)).cbrt()
}

/// `(1 - i x) exp(i x) - 1`, by series near zero to avoid cancellation.
fn ball_factor(x: f64) -> Complex64 {
    if x.abs() < 0.5 {
        // sum_{n>=2} i^n (1 - n) x^n / n!
        let mut acc = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..=20u32 {
            term *= I * x / n as f64;
            if n >= 2 {
                acc += term * (1.0 - n as f64);
            }
        }
        acc
    } else {
        Complex64::new(1.0, -x) * Complex64::from_polar(1.0, x) - 1.0
    }
}

/// Integral of [`scalar_kernel`] over a ball of radius `a` centred on the singularity.
pub fn self_cell_integral(omega: f64, c: f64, a: f64) -> Complex64 {
    let k = omega / c;
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    I * (4.0 * std::f64::consts::PI / (k * k)) * ball_factor(k * a) / omega
}

/// `(grad grad + k^2 I)` applied to the scalar kernel at separation `r`.
pub fn dyadic_kernel(omega: f64, c: f64, r: Vec3) -> [[Complex64; 3]; 3] {
    let k = omega / c;
    let d = norm(r);
    let g = scalar_kernel(omega, c, d);
    let ikr = I * k / d;
    let inv2 = 1.0 / (d * d);
    let iso = g * (k * k + ikr - inv2);
    let rad = g * (-k * k - 3.0 * ikr + 3.0 * inv2);
    let u = [r[0] / d, r[1] / d, r[2] / d];
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = rad * (u[a] * u[b]);
            if a == b {
                out[a][b] += iso;
            }
        }
    }
    out
}
