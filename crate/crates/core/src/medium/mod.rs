//! Computational grid, frequency lattice, medium description and the
//! illumination pulse spectra shared by every other module.

mod field;
mod grid;
mod lattice;
mod model;
mod pulse;
pub mod volume;

pub use field::{
    build_lorentzian_phantom, build_phantom, validate_medium, GruneisenField, Inclusion,
    LorentzInclusion, MediumReport, SusceptibilityField, DEFAULT_BOUNDARY_WIDTH,
};
pub use grid::Grid3;
pub use lattice::{FrequencyLattice, LatticePoint};
pub use model::{Debye, DispersionModel, Drude, Lorentz, ModelSpec};
pub use pulse::{PulseShape, PulseSpectrum};
