use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Fraction of the lattice tapered at each end before transforming.
const TAPER_FRACTION: f64 = 0.1;
/// Zero padding factor relative to the lattice length.
const PAD_FACTOR: usize = 16;

/// Spacing of a uniform lattice, or an error.
fn uniform_step(lattice: &[f64]) -> Result<f64> {
    if lattice.len() < 2 {
        return Err(Error::precondition("Hilbert transform needs at least two samples"));
    }
    let step = lattice[1] - lattice[0];
    let tol = 1e-9 * step.abs().max(lattice[lattice.len() - 1].abs());
    if !(step > 0.0) || lattice.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(Error::precondition(
            "Kramers–Kronig transform needs a uniform, increasing frequency lattice",
        ));
    }
    Ok(step)
}

/// `Im(nu) = -(1/pi) PV ∫ g(nu') / (nu' - nu) d nu'` on a uniform lattice.
///
/// Discrete Hilbert transform: cosine taper on the outer tenth at each end,
/// zero padding to `16 n` (next power of two), Fourier multiplier `-i sgn(k)`.
/// The transform commutes with translation, so only the spacing matters;
/// on a lattice symmetric about zero, even input gives exactly odd output.
pub fn kramers_kronig(samples: &[f64], lattice: &[f64]) -> Result<Vec<f64>> {
    if samples.len() != lattice.len() {
        return Err(Error::precondition("samples and lattice differ in length"));
    }
    uniform_step(lattice)?;
    let n = samples.len();
    let taper = ((TAPER_FRACTION * n as f64).ceil() as usize).max(1);
    let window = |i: usize| {
        let edge = i.min(n - 1 - i);
        if edge >= taper {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * (edge as f64 + 0.5) / taper as f64).cos())
        }
    };
    let len = (PAD_FACTOR * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (i, v) in samples.iter().enumerate() {
        buf[i].re = v * window(i);
    }
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= if k == 0 || 2 * k == len {
            Complex64::new(0.0, 0.0)
        } else if 2 * k < len {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    Ok(buf[..n].iter().map(|v| v.re / len as f64).collect())
}

/// [`kramers_kronig`] for an even function sampled at `nu_i = i step`, `i = 1..=n`.
///
/// The lattice is mirrored to `-n..=n`; the missing `nu = 0` sample comes
/// from the even quadratic through the first two, `(4 g_1 - g_2) / 3`.
/// Returns the (odd) transform at the positive nodes.
pub fn kramers_kronig_half(samples: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 || !(step > 0.0) {
        return Err(Error::precondition(
            "half-lattice transform needs two samples and a positive step",
        ));
    }
    let origin = (4.0 * samples[0] - samples[1]) / 3.0;
    let full: Vec<f64> = samples
        .iter()
        .rev()
        .copied()
        .chain(std::iter::once(origin))
        .chain(samples.iter().copied())
        .collect();
    let lattice: Vec<f64> = (0..full.len()).map(|i| (i as f64 - n as f64) * step).collect();
    let out = kramers_kronig(&full, &lattice)?;
    Ok(out[n + 1..].to_vec())
}

/// Step of a lattice `nu_i = i step`, `i = 1..=n`.
pub fn half_lattice_step(freqs: &[f64]) -> Result<f64> {
    let step = *freqs
        .first()
        .ok_or_else(|| Error::precondition("empty frequency list"))?;
    let ok = step > 0.0
        && freqs
            .iter()
            .enumerate()
            .all(|(i, &f)| (f - (i + 1) as f64 * step).abs() <= 1e-9 * f.abs().max(1.0));
    if !ok {
        return Err(Error::precondition(
            "frequencies must form the lattice nu_i = i * step, i = 1..n",
        ));
    }
    Ok(step)
}
