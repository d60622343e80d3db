use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Causal frequency response `F_t mu(omega)` of one material.
///
/// Implementations must satisfy `response(-omega) = conj(response(omega))`.
pub trait DispersionModel: Debug + Send + Sync {
    fn response(&self, omega: f64) -> Complex64;

    /// e-folding time of the temporal kernel, used to size FFT padding.
    fn decay_time(&self) -> f64;
}

/// Damped oscillator for the susceptibility, differentiated in time:
/// `s (-i omega) / (omega0^2 - omega^2 - i gamma omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentz {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

impl DispersionModel for Lorentz {
    fn response(&self, omega: f64) -> Complex64 {
        let num = Complex64::new(0.0, -omega) * self.strength;
        let den = Complex64::new(
            self.resonance * self.resonance - omega * omega,
            -self.damping * omega,
        );
        num / den
    }

    fn decay_time(&self) -> f64 {
        2.0 / self.damping
    }
}

/// Relaxation response `s (-i omega) / (1 - i omega tau)`.
///
/// Tends to `s / tau` at high frequency, so Kramers–Kronig reconstruction
/// needs the constant subtracted first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Debye {
    pub strength: f64,
    pub relaxation_time: f64,
}

impl DispersionModel for Debye {
    fn response(&self, omega: f64) -> Complex64 {
        Complex64::new(0.0, -omega) * self.strength
            / Complex64::new(1.0, -omega * self.relaxation_time)
    }

    fn decay_time(&self) -> f64 {
        self.relaxation_time
    }
}

/// Free-carrier conductivity `s / (gamma - i omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drude {
    pub strength: f64,
    pub damping: f64,
}

impl DispersionModel for Drude {
    fn response(&self, omega: f64) -> Complex64 {
        Complex64::new(self.strength, 0.0) / Complex64::new(self.damping, -omega)
    }

    fn decay_time(&self) -> f64 {
        1.0 / self.damping
    }
}

/// Serializable choice of dispersion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Lorentz {
        strength: f64,
        resonance: f64,
        damping: f64,
    },
    Debye {
        strength: f64,
        relaxation_time: f64,
    },
    Drude {
        strength: f64,
        damping: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Arc<dyn DispersionModel>> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::precondition(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        Ok(match *self {
            ModelSpec::Lorentz {
                strength,
                resonance,
                damping,
            } => {
                positive("damping", damping)?;
                positive("resonance", resonance)?;
                Arc::new(Lorentz {
                    strength,
                    resonance,
                    damping,
                })
            }
            ModelSpec::Debye {
                strength,
                relaxation_time,
            } => {
                positive("relaxation_time", relaxation_time)?;
                Arc::new(Debye {
                    strength,
                    relaxation_time,
                })
            }
            ModelSpec::Drude { strength, damping } => {
                positive("damping", damping)?;
                Arc::new(Drude { strength, damping })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<Box<dyn DispersionModel>> {
        vec![
            Box::new(Lorentz {
                strength: 1.3,
                resonance: 2.0,
                damping: 0.5,
            }),
            Box::new(Debye {
                strength: 0.7,
                relaxation_time: 0.4,
            }),
            Box::new(Drude {
                strength: 0.2,
                damping: 1.1,
            }),
        ]
    }

    #[test]
    fn all_models_are_hermitian() {
        for m in models() {
            for &w in &[0.3, 1.0, 2.5, 7.0] {
                let d = m.response(-w) - m.response(w).conj();
                assert!(d.norm() < 1e-15, "{m:?} at {w}");
            }
        }
    }

    #[test]
    fn lorentz_matches_closed_form() {
        let m = Lorentz {
            strength: 1.0,
            resonance: 2.0,
            damping: 0.5,
        };
        // -i / (3 - 0.5 i) = (0.5 - 3 i) / 9.25
        let expected = Complex64::new(0.5 / 9.25, -3.0 / 9.25);
        assert!((m.response(1.0) - expected).norm() < 1e-15);
        assert_eq!(m.response(0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn spec_rejects_nonpositive_damping() {
        let s = ModelSpec::Lorentz {
            strength: 1.0,
            resonance: 1.0,
            damping: 0.0,
        };
        assert!(s.build().is_err());
    }
}
