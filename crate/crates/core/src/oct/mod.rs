//! OCT detector model: detector plane and direction lattice, interferometric
//! measurements against a moving mirror, recovery of the detector field
//! `h` from those measurements, and the reduced data `h~` used by the inversion.

mod detector;
mod measurement;
mod reduced;

pub use detector::{cap_directions, DetectorPlane};
pub use measurement::{
    detector_spectrum, effective_measurement, effective_measurement_product, extract_h,
    interferometric_intensity, measurement_window, mirror_reference_field, simulate_scan,
    MirrorScan, SpectralField, TimeGrid,
};
pub(crate) use reduced::csv_error;
pub use reduced::{
    check_linearity, h_tilde, h_tilde_components, LinearityReport, OctRecord, OctSample,
};
