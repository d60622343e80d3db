use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forward::check_direction;
use crate::medium::PulseSpectrum;
use crate::vec3::{norm, scale, Vec3};

/// Point detectors on the plane `x_3 = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPlane {
    depth: f64,
    points: Vec<Vec3>,
}

impl DetectorPlane {
    pub fn new(depth: f64, lateral: &[[f64; 2]]) -> Result<Self> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::precondition(format!(
                "detector plane depth must be positive, got {depth}"
            )));
        }
        Ok(Self {
            depth,
            points: lateral.iter().map(|p| [p[0], p[1], depth]).collect(),
        })
    }

    /// Places one detector along each direction: `xi = d theta / theta_3`.
    pub fn from_directions(depth: f64, directions: &[Vec3]) -> Result<Self> {
        let mut lateral = Vec::with_capacity(directions.len());
        for &theta in directions {
            check_direction(theta)?;
            lateral.push([depth * theta[0] / theta[2], depth * theta[1] / theta[2]]);
        }
        Self::new(depth, &lateral)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn directions(&self) -> Vec<Vec3> {
        self.points.iter().map(|&p| scale(p, 1.0 / norm(p))).collect()
    }

    /// The incident pulse must have passed the plane by `t = 0`.
    pub fn check_clearance(&self, pulse: &PulseSpectrum, c: f64) -> Result<()> {
        let (_, hi) = pulse.temporal_support();
        if self.depth < c * hi {
            return Err(Error::precondition(format!(
                "detector plane at d = {} still sees the incident pulse for t >= 0 (need d >= {})",
                self.depth,
                c * hi
            )));
        }
        Ok(())
    }
}

/// Equal-area directions on the cap `theta_3 >= cos(asin(na))`.
///
/// Stratified in `theta_3` (one band of equal area per direction), golden-angle
/// azimuths with a seeded global rotation and a seeded offset inside each band.
pub fn cap_directions(count: usize, numerical_aperture: f64, seed: u64) -> Result<Vec<Vec3>> {
    if count == 0 {
        return Err(Error::precondition("direction count must be positive"));
    }
    if !(numerical_aperture > 0.0 && numerical_aperture < 1.0) {
        return Err(Error::precondition(format!(
            "numerical aperture must lie in (0, 1), got {numerical_aperture}"
        )));
    }
    let cos_max = (1.0 - numerical_aperture * numerical_aperture).sqrt();
    let height = 1.0 - cos_max;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotation = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    Ok((0..count)
        .map(|i| {
            let offset = 0.25 + 0.5 * rng.gen::<f64>();
            let z = 1.0 - height * (i as f64 + offset) / count as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = rotation + golden * i as f64;
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect())
}
