//! One-dimensional quadrature rules.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let fc = f(c);
    for d in 0..N {
        k[d] = WGK[7] * fc[d];
        g[d] = WG[3] * fc[d];
    }
    for i in 0..7 {
        let f1 = f(c - h * XGK[i]);
        let f2 = f(c + h * XGK[i]);
        for d in 0..N {
            k[d] += WGK[i] * (f1[d] + f2[d]);
            if i % 2 == 1 {
                g[d] += WG[i / 2] * (f1[d] + f2[d]);
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..N {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).abs());
    }
    (k, err)
}

/// Adaptive Gauss–Kronrod (7/15) integration of a vector-valued integrand.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_kronrod<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<[f64; N]> {
    let mut parts = vec![(a, b, kronrod(&f, a, b))];
    loop {
        let mut total = [0.0; N];
        let mut err = 0.0;
        for (_, _, (v, e)) in &parts {
            for d in 0..N {
                total[d] += v[d];
            }
            err += e;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature {
                estimate: scale,
                bound: err,
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold(
                (0, -1.0),
                |(bi, be), (i, p)| if p.2 .1 > be { (i, p.2 .1) } else { (bi, be) },
            );
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, kronrod(&f, lo, mid)));
        parts.push((mid, hi, kronrod(&f, mid, hi)));
    }
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(samples: &[f64], step: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => step * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 {
                    0.0
                } else {
                    2.0 / (p as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn kronrod_handles_peaked_integrand() {
        let v = adaptive_kronrod(
            |x| [(-(x * 40.0).powi(2)).exp(), x.cos()],
            -1.0,
            2.0,
            1e-13,
            1e-12,
            200,
        )
        .unwrap();
        let gauss = std::f64::consts::PI.sqrt() / 40.0;
        assert!((v[0] - gauss).abs() < 1e-12);
        assert!((v[1] - (2f64.sin() + 1f64.sin())).abs() < 1e-12);
    }

    #[test]
    fn kronrod_reports_failure() {
        let r = adaptive_kronrod(
            |x: f64| [1.0 / x.abs().sqrt().max(1e-300)],
            -1.0,
            1.0,
            1e-15,
            0.0,
            4,
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn trapezoid_linear() {
        assert!((trapezoid(&[0.0, 1.0, 2.0], 0.5) - 1.0).abs() < 1e-15);
    }
}
