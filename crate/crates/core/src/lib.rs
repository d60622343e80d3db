//! Forward simulation and quantitative inversion for a combined
//! photoacoustic / optical coherence tomography experiment.
//!
//! A single frequency-dependent medium, described by the temporal Fourier
//! transform of its susceptibility kernel `F_t mu(omega, x)`, is probed by a bank of
//! narrowband pulses. The OCT arm records back-scattered far fields, the PAT
//! arm records absorbed energy scaled by the Grüneisen parameter. The
//! [`inversion`] module combines both through a second-kind Fredholm equation
//! on the sampled cone `k = (nu/c)(theta + e3)` and recovers the Grüneisen
//! parameter.
//!
//! Conventions used throughout:
//! - `F f(omega) = ∫ f(t) exp(i omega t) dt`;
//! - Gaussian units, with the speed of light `c` passed explicitly
//!   ([`DEFAULT_SPEED_OF_LIGHT`] is 1);
//! - voxel centres are `origin + spacing * (i, j, k)` in row-major order.

pub mod error;
pub mod forward;
pub mod inversion;
pub mod linalg;
pub mod medium;
pub mod oct;
pub mod pat;
pub mod pipeline;
pub mod quadrature;
pub mod rte;
pub mod vec3;

pub use error::{Error, ErrorCategory, Result};
pub use num_complex::Complex64;

/// Speed of light in dimensionless mode.
pub const DEFAULT_SPEED_OF_LIGHT: f64 = 1.0;
