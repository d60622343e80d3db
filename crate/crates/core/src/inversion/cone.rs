use crate::error::{Error, Result};
use crate::forward::check_direction;
use crate::medium::FrequencyLattice;
use crate::oct::OctRecord;
use crate::vec3::Vec3;

/// One spatial-frequency sample `k = (nu / c)(theta + e3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSample {
    /// Index into the frequency list the sampling was built from.
    pub nu_index: usize,
    pub nu: f64,
    pub direction: Vec3,
    pub k: Vec3,
    /// Quadrature weight for `d kappa` on the cone.
    pub weight: f64,
}

/// Cone samples in frequency-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSampling {
    samples: Vec<ConeSample>,
    freqs: Vec<f64>,
}

impl ConeSampling {
    /// Every direction at every frequency.
    ///
    /// `d kappa = (nu^2 (1 + theta_3) / c^3) d nu dS(theta)`; `d nu` by the
    /// trapezoid rule over `freqs`, `dS` as the cap area of the aperture
    /// divided evenly over the (equal-area) directions.
    pub fn new(freqs: &[f64], directions: &[Vec3], numerical_aperture: f64, c: f64) -> Result<Self> {
        if freqs.is_empty() || directions.is_empty() {
            return Err(Error::precondition("cone sampling needs frequencies and directions"));
        }
        if !(numerical_aperture > 0.0 && numerical_aperture < 1.0) {
            return Err(Error::precondition(format!(
                "numerical aperture must lie in (0, 1), got {numerical_aperture}"
            )));
        }
        if freqs.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::precondition("cone frequencies must be positive"));
        }
        for &d in directions {
            check_direction(d)?;
        }
        let nu_weights = if freqs.len() == 1 {
            vec![1.0]
        } else {
            FrequencyLattice::new(freqs.to_vec(), false)?.trapezoid_weights()
        };
        let cap = 2.0 * std::f64::consts::PI * (1.0 - (1.0 - numerical_aperture.powi(2)).sqrt());
        let ds = cap / directions.len() as f64;
        let mut samples = Vec::with_capacity(freqs.len() * directions.len());
        for (i, (&nu, &dnu)) in freqs.iter().zip(&nu_weights).enumerate() {
            for &theta in directions {
                let s = nu / c;
                samples.push(ConeSample {
                    nu_index: i,
                    nu,
                    direction: theta,
                    k: [s * theta[0], s * theta[1], s * (theta[2] + 1.0)],
                    weight: nu * nu * (1.0 + theta[2]) / (c * c * c) * dnu * ds,
                });
            }
        }
        let out = Self {
            samples,
            freqs: freqs.to_vec(),
        };
        out.check_distinct()?;
        Ok(out)
    }

    /// Sampling matching the rows of an OCT record, which must list the same
    /// directions for each of its frequencies.
    pub fn from_record(record: &OctRecord, numerical_aperture: f64, c: f64) -> Result<Self> {
        if record.is_empty() {
            return Err(Error::precondition("OCT record is empty"));
        }
        let freqs = record.frequencies();
        let per = record.len() / freqs.len();
        if per * freqs.len() != record.len() {
            return Err(Error::precondition(
                "OCT record does not hold the same number of directions per frequency",
            ));
        }
        let directions: Vec<Vec3> = record.samples[..per].iter().map(|s| s.direction).collect();
        for (n, s) in record.samples.iter().enumerate() {
            if s.nu != freqs[n / per] || s.direction != directions[n % per] {
                return Err(Error::precondition(
                    "OCT record rows are not a frequency-major product lattice",
                ));
            }
        }
        Self::new(&freqs, &directions, numerical_aperture, c)
    }

    pub fn samples(&self) -> &[ConeSample] {
        &self.samples
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Keeps only the samples whose frequency index passes `keep`, re-indexing frequencies.
    pub fn restrict(&self, keep: &[bool], numerical_aperture: f64, c: f64) -> Result<Self> {
        let freqs: Vec<f64> = self
            .freqs
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(f, _)| *f)
            .collect();
        let per = self.samples.len() / self.freqs.len();
        let directions: Vec<Vec3> = self.samples[..per].iter().map(|s| s.direction).collect();
        Self::new(&freqs, &directions, numerical_aperture, c)
    }

    fn check_distinct(&self) -> Result<()> {
        let mut keys: Vec<[u64; 3]> = self.samples.iter().map(|s| s.k.map(f64::to_bits)).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::precondition("cone sampling contains repeated k vectors"));
        }
        Ok(())
    }
}
